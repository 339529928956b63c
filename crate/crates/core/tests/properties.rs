//! Property tests for the numeric invariants that hold across the scoring
//! and evaluation stack.

use moralframe::axes::{build_axis, SemanticAxis};
use moralframe::embedding::{cosine_similarity, EmbeddingStore};
use moralframe::eval::{correlation_matrix, metrics};
use moralframe::scorer::{corpus_baseline, document_bias, document_intensity, TokenBag};
use proptest::prelude::*;
use std::collections::BTreeSet;

fn vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(-10.0..10.0f64, dim)
}

fn nonzero_vector(dim: usize) -> impl Strategy<Value = Vec<f64>> {
    vector(dim).prop_filter("nonzero norm", |v| {
        v.iter().map(|c| c * c).sum::<f64>().sqrt() > 1e-6
    })
}

proptest! {
    // cosine(a u, b v) = cosine(u, v) for positive scales
    #[test]
    fn cosine_scale_invariance(
        u in nonzero_vector(5),
        v in nonzero_vector(5),
        a in 0.01..100.0f64,
        b in 0.01..100.0f64,
    ) {
        let base = cosine_similarity(&u, &v).unwrap();
        let su: Vec<f64> = u.iter().map(|c| c * a).collect();
        let sv: Vec<f64> = v.iter().map(|c| c * b).collect();
        let scaled = cosine_similarity(&su, &sv).unwrap();
        prop_assert!((base - scaled).abs() < 1e-9);
    }

    #[test]
    fn cosine_antisymmetry_under_negation(
        u in nonzero_vector(5),
        v in nonzero_vector(5),
    ) {
        let base = cosine_similarity(&u, &v).unwrap();
        let nu: Vec<f64> = u.iter().map(|c| -c).collect();
        let negated = cosine_similarity(&nu, &v).unwrap();
        prop_assert!((base + negated).abs() < 1e-12);
    }
}

fn word_set(names: &[&str]) -> BTreeSet<String> {
    names.iter().map(|w| w.to_string()).collect()
}

// a small random scoring scene: a 6-word store, a 2v/2v axis, and a bag
fn scene() -> impl Strategy<Value = (EmbeddingStore, SemanticAxis, TokenBag)> {
    (
        prop::collection::vec(nonzero_vector(4), 6),
        prop::collection::vec(0u64..5, 6),
    )
        .prop_filter_map("valid scene", |(vectors, counts)| {
            let names = ["va", "vb", "xa", "xb", "oa", "ob"];
            let store = EmbeddingStore::from_entries(
                4,
                names
                    .iter()
                    .zip(&vectors)
                    .map(|(n, v)| (n.to_string(), v.clone())),
            );
            let axis =
                build_axis(&store, "axis", &word_set(&["va", "vb"]), &word_set(&["xa", "xb"]))
                    .ok()?;
            if counts.iter().sum::<u64>() == 0 {
                return None;
            }
            let bag = TokenBag::from_counts(
                names
                    .iter()
                    .zip(&counts)
                    .map(|(n, c)| (n.to_string(), *c)),
            );
            Some((store, axis, bag))
        })
}

proptest! {
    // swapping virtue and vice sets negates bias exactly and leaves
    // intensity unchanged (both the cosine and the baseline flip sign)
    #[test]
    fn pole_swap_negates_bias_and_preserves_intensity((store, axis, bag) in scene()) {
        let swapped = build_axis(
            &store,
            "axis",
            &word_set(&["xa", "xb"]),
            &word_set(&["va", "vb"]),
        ).unwrap();

        let bags = [bag.clone()];
        let baseline = corpus_baseline(&bags, &axis, &store).unwrap();
        let baseline_swapped = corpus_baseline(&bags, &swapped, &store).unwrap();
        prop_assert_eq!(baseline, -baseline_swapped);

        let bias = document_bias(&bag, &axis, &store).unwrap();
        let bias_swapped = document_bias(&bag, &swapped, &store).unwrap();
        prop_assert_eq!(bias, -bias_swapped);

        let intensity = document_intensity(&bag, &axis, baseline, &store).unwrap();
        let intensity_swapped =
            document_intensity(&bag, &swapped, baseline_swapped, &store).unwrap();
        prop_assert!((intensity - intensity_swapped).abs() < 1e-12);
    }

    // multiplying every token count by the same positive integer changes
    // neither bias nor intensity
    #[test]
    fn frequency_homogeneity((store, axis, bag) in scene(), factor in 1u64..20) {
        let scaled = TokenBag::from_counts(
            bag.iter().map(|(t, c)| (t.to_string(), c * factor)),
        );
        let bias = document_bias(&bag, &axis, &store).unwrap();
        let bias_scaled = document_bias(&scaled, &axis, &store).unwrap();
        prop_assert!((bias - bias_scaled).abs() < 1e-12);

        let intensity = document_intensity(&bag, &axis, 0.125, &store).unwrap();
        let intensity_scaled = document_intensity(&scaled, &axis, 0.125, &store).unwrap();
        prop_assert!((intensity - intensity_scaled).abs() < 1e-12);
    }

    // bias stays in [-1, 1]; intensity stays in [0, 4] for baselines in [-1, 1]
    #[test]
    fn score_ranges((store, axis, bag) in scene(), baseline in -1.0..1.0f64) {
        let bias = document_bias(&bag, &axis, &store).unwrap();
        prop_assert!((-1.0..=1.0).contains(&bias));
        let intensity = document_intensity(&bag, &axis, baseline, &store).unwrap();
        prop_assert!((0.0..=4.0).contains(&intensity));
    }
}

proptest! {
    // jointly shuffling (predicted, truth) changes no metric
    #[test]
    fn metrics_permutation_invariance(
        pairs in prop::collection::vec((0u8..2, 0u8..2), 1..50),
        seed in 0u64..1000,
    ) {
        let predicted: Vec<u8> = pairs.iter().map(|(p, _)| *p).collect();
        let truth: Vec<u8> = pairs.iter().map(|(_, t)| *t).collect();
        let base = metrics(&predicted, &truth).unwrap();

        // deterministic pseudo-shuffle driven by the seed
        let mut order: Vec<usize> = (0..pairs.len()).collect();
        let mut state = seed;
        for i in (1..order.len()).rev() {
            state = state.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            order.swap(i, (state % (i as u64 + 1)) as usize);
        }
        let p2: Vec<u8> = order.iter().map(|&i| predicted[i]).collect();
        let t2: Vec<u8> = order.iter().map(|&i| truth[i]).collect();
        prop_assert_eq!(metrics(&p2, &t2).unwrap(), base);
    }

    // Pearson is invariant to positive affine transforms and negates under
    // negation of one column
    #[test]
    fn pearson_affine_invariance(
        x in prop::collection::vec(-100.0..100.0f64, 3..30),
        scale in 0.01..50.0f64,
        shift in -100.0..100.0f64,
    ) {
        let y: Vec<f64> = x.iter().map(|v| v * 1.5 + 3.0).collect();
        let columns = vec![("x".to_string(), x.clone()), ("y".to_string(), y.clone())];
        let m = correlation_matrix(&columns).unwrap();
        let Some(base) = m.get(0, 1) else {
            return Ok(()); // constant column: correlation undefined
        };

        let transformed: Vec<f64> = x.iter().map(|v| v * scale + shift).collect();
        let columns2 = vec![("x".to_string(), transformed), ("y".to_string(), y.clone())];
        let affine = correlation_matrix(&columns2).unwrap().get(0, 1).unwrap();
        prop_assert!((base - affine).abs() < 1e-9);

        let negated: Vec<f64> = x.iter().map(|v| -v).collect();
        let columns3 = vec![("x".to_string(), negated), ("y".to_string(), y)];
        let flipped = correlation_matrix(&columns3).unwrap().get(0, 1).unwrap();
        prop_assert!((base + flipped).abs() < 1e-9);
    }
}

// metrics on the concatenation of a split equal metrics on the whole set
proptest! {
    #[test]
    fn split_then_concat_preserves_metrics(
        pairs in prop::collection::vec((0u8..2, 0u8..2), 4..60),
        seed in 0u64..100,
    ) {
        let predicted: Vec<u8> = pairs.iter().map(|(p, _)| *p).collect();
        let truth: Vec<u8> = pairs.iter().map(|(_, t)| *t).collect();
        let indices: Vec<usize> = (0..pairs.len()).collect();
        let spec = moralframe::eval::SplitSpec { train_fraction: 0.75, seed };
        let Ok((train, test)) = moralframe::eval::split(&indices, spec) else {
            return Ok(());
        };
        let order: Vec<usize> = train.into_iter().chain(test).collect();
        let p2: Vec<u8> = order.iter().map(|&i| predicted[i]).collect();
        let t2: Vec<u8> = order.iter().map(|&i| truth[i]).collect();
        prop_assert_eq!(
            metrics(&p2, &t2).unwrap(),
            metrics(&predicted, &truth).unwrap()
        );
    }
}
