//! Corpus ingestion: headline CSVs with source-leaning and topic filters,
//! annotation vote tables, and external per-document feature files.

use super::{io_error, PipelineError};
use crate::classifier::{FeatureMatrix, FeatureRow};
use crate::scorer::tokenize;
use serde::{Deserialize, Serialize};
use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::Path;

/// One news headline with its source's political leaning
/// (liberal = 1, conservative = 0).
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadlineRecord {
    pub id: String,
    pub text: String,
    pub source: String,
    pub leaning: u8,
    pub topic: Option<String>,
}

/// Source name → leaning map. Names match case-insensitively after
/// trimming; only `liberal` and `conservative` entries keep rows, anything
/// else (for example `center`) drops them.
#[derive(Debug, Clone, Default, Serialize, Deserialize)]
pub struct SourceLeanings {
    pub leanings: BTreeMap<String, String>,
}

const DEFAULT_LEANINGS_JSON: &str = include_str!("../../assets/default_leanings.json");
const DEFAULT_TOPICS_JSON: &str = include_str!("../../assets/default_topics.json");

impl SourceLeanings {
    /// Bundled default covering fourteen common outlets. The ratings are
    /// externally sourced and meant as a starting point, not ground truth.
    pub fn builtin() -> SourceLeanings {
        SourceLeanings::from_json(DEFAULT_LEANINGS_JSON).expect("bundled leanings are valid")
    }

    pub fn builtin_json() -> &'static str {
        DEFAULT_LEANINGS_JSON
    }

    /// Accepts either a bare `{source: leaning}` object or a document with a
    /// `leanings` field.
    pub fn from_json(text: &str) -> Result<SourceLeanings, PipelineError> {
        if let Ok(bare) = serde_json::from_str::<BTreeMap<String, String>>(text) {
            return Ok(SourceLeanings { leanings: bare });
        }
        let wrapped: SourceLeanings = serde_json::from_str(text)?;
        Ok(wrapped)
    }

    pub fn load(path: impl AsRef<Path>) -> Result<SourceLeanings, PipelineError> {
        let text =
            fs::read_to_string(path.as_ref()).map_err(|e| io_error(path.as_ref(), e))?;
        SourceLeanings::from_json(&text)
    }

    fn leaning_of(&self, source: &str) -> Option<u8> {
        let wanted = source.trim().to_lowercase();
        self.leanings
            .iter()
            .find(|(name, _)| name.trim().to_lowercase() == wanted)
            .and_then(|(_, leaning)| match leaning.trim().to_lowercase().as_str() {
                "liberal" => Some(1),
                "conservative" => Some(0),
                _ => None,
            })
    }
}

/// Named topic with its whole-token keyword list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct TopicSpec {
    pub name: String,
    pub keywords: Vec<String>,
}

/// Bundled immigration/election keyword lists. Hand-picked and
/// non-canonical; override with `--topics` for serious use.
pub fn builtin_topics() -> Vec<TopicSpec> {
    serde_json::from_str(DEFAULT_TOPICS_JSON).expect("bundled topics are valid")
}

pub fn builtin_topics_json() -> &'static str {
    DEFAULT_TOPICS_JSON
}

pub fn load_topics(path: impl AsRef<Path>) -> Result<Vec<TopicSpec>, PipelineError> {
    let text = fs::read_to_string(path.as_ref()).map_err(|e| io_error(path.as_ref(), e))?;
    Ok(serde_json::from_str(&text)?)
}

/// Conservation holds: `input_rows = kept + dropped_source + dropped_topic
/// + dropped_empty`.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct HeadlineIngestReport {
    pub input_rows: usize,
    pub kept: usize,
    pub dropped_source: usize,
    pub dropped_topic: usize,
    pub dropped_empty: usize,
}

fn find_column(headers: &csv::StringRecord, names: &[&str]) -> Option<usize> {
    headers.iter().position(|h| {
        let h = h.trim().to_lowercase();
        names.iter().any(|n| h == *n)
    })
}

/// Read a headline CSV (text column: `title`/`headline`/`text`; source
/// column: `publication`/`source`/`outlet`; optional `id`). Rows from
/// sources that do not map to liberal or conservative are dropped. When
/// topics are given, each row is tagged with the first topic (in declared
/// order) whose keyword appears as a whole token in the headline, and
/// untagged rows are dropped.
pub fn ingest_headlines(
    path: impl AsRef<Path>,
    leanings: &SourceLeanings,
    topics: Option<&[TopicSpec]>,
) -> Result<(Vec<HeadlineRecord>, HeadlineIngestReport), PipelineError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(PipelineError::Csv)?;
    let headers = reader.headers()?.clone();
    let text_col = find_column(&headers, &["title", "headline", "text"]).ok_or_else(|| {
        PipelineError::MissingColumn {
            path: path.display().to_string(),
            column: "title/headline/text".to_string(),
        }
    })?;
    let source_col =
        find_column(&headers, &["publication", "source", "outlet"]).ok_or_else(|| {
            PipelineError::MissingColumn {
                path: path.display().to_string(),
                column: "publication/source/outlet".to_string(),
            }
        })?;
    let id_col = find_column(&headers, &["id"]);

    let keyword_sets: Vec<(String, BTreeSet<String>)> = topics
        .unwrap_or(&[])
        .iter()
        .map(|t| {
            (
                t.name.clone(),
                t.keywords.iter().map(|k| k.trim().to_lowercase()).collect(),
            )
        })
        .collect();

    let mut report = HeadlineIngestReport::default();
    let mut records = Vec::new();
    for (row_index, row) in reader.records().enumerate() {
        let row = row?;
        report.input_rows += 1;
        let text = row.get(text_col).unwrap_or("").trim().to_string();
        if text.is_empty() {
            report.dropped_empty += 1;
            continue;
        }
        let source = row.get(source_col).unwrap_or("").trim().to_string();
        let leaning = match leanings.leaning_of(&source) {
            Some(l) => l,
            None => {
                report.dropped_source += 1;
                continue;
            }
        };
        let topic = if keyword_sets.is_empty() {
            None
        } else {
            let tokens: BTreeSet<String> =
                tokenize(&text).iter().map(|(t, _)| t.to_string()).collect();
            let tag = keyword_sets
                .iter()
                .find(|(_, keywords)| keywords.iter().any(|k| tokens.contains(k)))
                .map(|(name, _)| name.clone());
            match tag {
                Some(t) => Some(t),
                None => {
                    report.dropped_topic += 1;
                    continue;
                }
            }
        };
        let id = id_col
            .and_then(|c| row.get(c))
            .map(|s| s.to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| format!("h{row_index}"));
        records.push(HeadlineRecord {
            id,
            text,
            source,
            leaning,
            topic,
        });
        report.kept += 1;
    }
    if records.is_empty() {
        return Err(PipelineError::NoRowsKept(path.display().to_string()));
    }
    Ok((records, report))
}

/// One annotated document with per-dimension vote counts.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationRecord {
    pub id: String,
    pub text: String,
    pub votes: BTreeMap<String, u64>,
    pub annotator_count: u64,
}

/// An annotated corpus with a fixed, ordered dimension list.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct AnnotationCorpus {
    pub dimensions: Vec<String>,
    pub records: Vec<AnnotationRecord>,
}

impl AnnotationCorpus {
    pub fn ids(&self) -> Vec<String> {
        self.records.iter().map(|r| r.id.clone()).collect()
    }

    pub fn texts(&self) -> Vec<String> {
        self.records.iter().map(|r| r.text.clone()).collect()
    }

    /// Binary label columns: 1 iff a dimension got at least `min_votes`.
    pub fn labels(&self, min_votes: u64) -> Vec<(String, Vec<u8>)> {
        self.dimensions
            .iter()
            .map(|dim| {
                let column = self
                    .records
                    .iter()
                    .map(|r| (r.votes.get(dim).copied().unwrap_or(0) >= min_votes) as u8)
                    .collect();
                (dim.clone(), column)
            })
            .collect()
    }

    /// Raw vote-count columns as reals, for correlation reports.
    pub fn vote_columns(&self) -> Vec<(String, Vec<f64>)> {
        self.dimensions
            .iter()
            .map(|dim| {
                let column = self
                    .records
                    .iter()
                    .map(|r| r.votes.get(dim).copied().unwrap_or(0) as f64)
                    .collect();
                (dim.clone(), column)
            })
            .collect()
    }

    /// Merge vote columns into new dimensions by per-row maximum, so a
    /// merged dimension crosses the vote threshold iff any source column
    /// does.
    pub fn aggregate(
        &self,
        map: &BTreeMap<String, Vec<String>>,
    ) -> Result<AnnotationCorpus, PipelineError> {
        for (target, sources) in map {
            for source in sources {
                if !self.dimensions.contains(source) {
                    return Err(PipelineError::UnknownAggregationColumn {
                        target: target.clone(),
                        column: source.clone(),
                    });
                }
            }
        }
        let dimensions: Vec<String> = map.keys().cloned().collect();
        let records = self
            .records
            .iter()
            .map(|r| {
                let votes = map
                    .iter()
                    .map(|(target, sources)| {
                        let merged = sources
                            .iter()
                            .map(|s| r.votes.get(s).copied().unwrap_or(0))
                            .max()
                            .unwrap_or(0);
                        (target.clone(), merged)
                    })
                    .collect();
                AnnotationRecord {
                    id: r.id.clone(),
                    text: r.text.clone(),
                    votes,
                    annotator_count: r.annotator_count,
                }
            })
            .collect();
        Ok(AnnotationCorpus {
            dimensions,
            records,
        })
    }
}

/// Read an annotation table (CSV, or TSV for `.tsv` paths). Required: a text
/// column; optional: `id` and `annotators`; every other column is a
/// per-dimension vote count. Vote counts above the annotator count are data
/// errors.
pub fn ingest_annotations(
    path: impl AsRef<Path>,
    min_votes: u64,
) -> Result<AnnotationCorpus, PipelineError> {
    let path = path.as_ref();
    let delimiter = if path.extension().and_then(|e| e.to_str()) == Some("tsv") {
        b'\t'
    } else {
        b','
    };
    let mut reader = csv::ReaderBuilder::new()
        .delimiter(delimiter)
        .from_path(path)
        .map_err(PipelineError::Csv)?;
    let headers = reader.headers()?.clone();
    let text_col = find_column(&headers, &["text", "tweet", "headline", "title"]).ok_or_else(
        || PipelineError::MissingColumn {
            path: path.display().to_string(),
            column: "text/tweet/headline/title".to_string(),
        },
    )?;
    let id_col = find_column(&headers, &["id"]);
    let annotator_col = find_column(&headers, &["annotators", "annotator_count"]);

    let mut dimensions = Vec::new();
    let mut dimension_cols = Vec::new();
    for (i, header) in headers.iter().enumerate() {
        if Some(i) == Some(text_col) || Some(i) == id_col || Some(i) == annotator_col {
            continue;
        }
        dimensions.push(header.trim().to_string());
        dimension_cols.push(i);
    }
    if dimensions.is_empty() {
        return Err(PipelineError::MissingColumn {
            path: path.display().to_string(),
            column: "per-dimension vote counts".to_string(),
        });
    }

    let mut records = Vec::new();
    let mut seen = BTreeSet::new();
    for (row_index, row) in reader.records().enumerate() {
        let row = row?;
        let id = id_col
            .and_then(|c| row.get(c))
            .map(|s| s.to_string())
            .filter(|s| !s.is_empty())
            .unwrap_or_else(|| format!("a{row_index}"));
        if !seen.insert(id.clone()) {
            return Err(PipelineError::DuplicateId(id));
        }
        let parse_count = |column: usize| -> Result<u64, PipelineError> {
            let raw = row.get(column).unwrap_or("").trim();
            raw.parse::<u64>().map_err(|_| PipelineError::MalformedCount {
                row: row_index,
                column: headers.get(column).unwrap_or("?").to_string(),
                value: raw.to_string(),
            })
        };
        let mut votes = BTreeMap::new();
        for (dim, &col) in dimensions.iter().zip(&dimension_cols) {
            votes.insert(dim.clone(), parse_count(col)?);
        }
        let max_votes = votes.values().copied().max().unwrap_or(0);
        let annotator_count = match annotator_col {
            Some(col) => {
                let count = parse_count(col)?;
                if count < 3 {
                    return Err(PipelineError::TooFewAnnotators { id, count });
                }
                count
            }
            None => max_votes.max(3),
        };
        if max_votes > annotator_count {
            let dimension = votes
                .iter()
                .find(|(_, &v)| v > annotator_count)
                .map(|(d, _)| d.clone())
                .unwrap_or_default();
            return Err(PipelineError::VotesExceedAnnotators { id, dimension });
        }
        let text = row.get(text_col).unwrap_or("").trim().to_string();
        records.push(AnnotationRecord {
            id,
            text,
            votes,
            annotator_count,
        });
    }
    if records.is_empty() {
        return Err(PipelineError::NoRowsKept(path.display().to_string()));
    }
    let _ = min_votes; // thresholding happens in labels(); kept for call-site symmetry
    Ok(AnnotationCorpus {
        dimensions,
        records,
    })
}

/// Ids present on only one side of the feature/corpus alignment.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct AlignmentReport {
    pub matched: usize,
    pub unmatched_file_ids: Vec<String>,
    pub unmatched_corpus_ids: Vec<String>,
}

/// Read an external feature CSV (header row; first column is the document
/// id, remaining columns are numeric features) and align it against the
/// corpus id order.
pub fn ingest_external_features(
    path: impl AsRef<Path>,
    corpus_ids: &[String],
) -> Result<(FeatureMatrix, AlignmentReport), PipelineError> {
    let path = path.as_ref();
    let mut reader = csv::ReaderBuilder::new()
        .from_path(path)
        .map_err(PipelineError::Csv)?;
    let headers = reader.headers()?.clone();
    if headers.len() < 2 {
        return Err(PipelineError::MissingColumn {
            path: path.display().to_string(),
            column: "id plus at least one feature".to_string(),
        });
    }
    let feature_names: Vec<String> = headers.iter().skip(1).map(|h| h.to_string()).collect();

    let mut by_id: BTreeMap<String, Vec<f64>> = BTreeMap::new();
    for (row_index, row) in reader.records().enumerate() {
        let row = row?;
        let id = row.get(0).unwrap_or("").trim().to_string();
        let values = row
            .iter()
            .skip(1)
            .enumerate()
            .map(|(j, raw)| {
                raw.trim()
                    .parse::<f64>()
                    .map_err(|_| PipelineError::MalformedCount {
                        row: row_index,
                        column: feature_names[j].clone(),
                        value: raw.to_string(),
                    })
            })
            .collect::<Result<Vec<f64>, _>>()?;
        if by_id.insert(id.clone(), values).is_some() {
            return Err(PipelineError::DuplicateId(id));
        }
    }

    let corpus_set: BTreeSet<&String> = corpus_ids.iter().collect();
    let mut rows = Vec::new();
    let mut report = AlignmentReport::default();
    for id in corpus_ids {
        match by_id.get(id) {
            Some(values) => {
                rows.push(FeatureRow {
                    id: id.clone(),
                    values: values.clone(),
                });
                report.matched += 1;
            }
            None => report.unmatched_corpus_ids.push(id.clone()),
        }
    }
    report.unmatched_file_ids = by_id
        .keys()
        .filter(|id| !corpus_set.contains(id))
        .cloned()
        .collect();
    if rows.is_empty() {
        return Err(PipelineError::NoOverlap);
    }
    let matrix = FeatureMatrix::new(feature_names, rows).map_err(PipelineError::Train)?;
    Ok((matrix, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_file(content: &str) -> tempfile::NamedTempFile {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        f.write_all(content.as_bytes()).unwrap();
        f
    }

    fn test_leanings() -> SourceLeanings {
        SourceLeanings::from_json(
            r#"{"Daily Left":"liberal","Right Post":"conservative","Reuters":"center"}"#,
        )
        .unwrap()
    }

    fn test_topics() -> Vec<TopicSpec> {
        vec![TopicSpec {
            name: "immigration".to_string(),
            keywords: vec!["immigration".to_string(), "border".to_string()],
        }]
    }

    #[test]
    fn keyword_containment_is_whole_token() {
        let csv = "title,publication\n\
                   Senate vote on immigration bill,Daily Left\n\
                   New election selection process,Right Post\n";
        let f = write_file(csv);
        let (records, report) =
            ingest_headlines(f.path(), &test_leanings(), Some(&test_topics())).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].topic.as_deref(), Some("immigration"));
        assert_eq!(records[0].leaning, 1);
        assert_eq!(report.dropped_topic, 1);
    }

    #[test]
    fn center_and_unknown_sources_are_dropped() {
        let csv = "title,publication\n\
                   Border wall debate,Reuters\n\
                   Border wall debate,Unknown Gazette\n\
                   Border wall debate,Right Post\n";
        let f = write_file(csv);
        let (records, report) =
            ingest_headlines(f.path(), &test_leanings(), Some(&test_topics())).unwrap();
        assert_eq!(records.len(), 1);
        assert_eq!(records[0].source, "Right Post");
        assert_eq!(records[0].leaning, 0);
        assert_eq!(report.dropped_source, 2);
    }

    // Manual application of the keyword and leaning rules to ten rows.
    #[test]
    fn ten_row_fixture_keeps_the_expected_set() {
        let csv = "id,title,publication\n\
                   r0,Immigration bill passes,Daily Left\n\
                   r1,Stock markets rally,Daily Left\n\
                   r2,Border agents testify,Right Post\n\
                   r3,Immigration raids continue,Reuters\n\
                   r4,New border fence,Unknown Gazette\n\
                   r5,Weather tomorrow,Right Post\n\
                   r6,immigration IMMIGRATION Immigration,Daily Left\n\
                   r7,A borderline case,Right Post\n\
                   r8,Refugees at the border,Daily Left\n\
                   r9,,Daily Left\n";
        let f = write_file(csv);
        let (records, report) =
            ingest_headlines(f.path(), &test_leanings(), Some(&test_topics())).unwrap();
        let kept: Vec<&str> = records.iter().map(|r| r.id.as_str()).collect();
        assert_eq!(kept, vec!["r0", "r2", "r6", "r8"]);
        assert_eq!(report.input_rows, 10);
        assert_eq!(report.kept, 4);
        assert_eq!(report.dropped_source, 2); // r3 center, r4 unknown
        assert_eq!(report.dropped_topic, 3); // r1, r5, r7
        assert_eq!(report.dropped_empty, 1); // r9
        assert_eq!(
            report.kept + report.dropped_source + report.dropped_topic + report.dropped_empty,
            report.input_rows
        );
    }

    #[test]
    fn missing_column_is_reported() {
        let f = write_file("headline_text,paper\nfoo,bar\n");
        assert!(matches!(
            ingest_headlines(f.path(), &test_leanings(), None),
            Err(PipelineError::MissingColumn { .. })
        ));
    }

    #[test]
    fn empty_result_is_an_error() {
        let f = write_file("title,publication\nfoo,Nobody Knows\n");
        assert!(matches!(
            ingest_headlines(f.path(), &test_leanings(), None),
            Err(PipelineError::NoRowsKept(_))
        ));
    }

    #[test]
    fn vote_thresholding_matches_the_rule() {
        let csv = "id,text,annotators,care,purity,non-moral\n\
                   t0,some text,3,2,1,0\n";
        let f = write_file(csv);
        let corpus = ingest_annotations(f.path(), 2).unwrap();
        let labels = corpus.labels(2);
        let by_name: BTreeMap<&str, u8> = labels
            .iter()
            .map(|(d, col)| (d.as_str(), col[0]))
            .collect();
        assert_eq!(by_name["care"], 1);
        assert_eq!(by_name["purity"], 0);
        assert_eq!(by_name["non-moral"], 0);
    }

    #[test]
    fn all_zero_votes_give_all_zero_labels() {
        let f = write_file("id,text,annotators,care,harm\nt0,words here,4,0,0\n");
        let corpus = ingest_annotations(f.path(), 2).unwrap();
        for (_, col) in corpus.labels(2) {
            assert_eq!(col, vec![0]);
        }
    }

    // Manual thresholding of a six-row fixture.
    #[test]
    fn six_row_fixture_label_matrix() {
        let csv = "id,text,annotators,care,fairness\n\
                   t0,a,3,0,3\n\
                   t1,b,3,1,2\n\
                   t2,c,4,2,1\n\
                   t3,d,3,3,0\n\
                   t4,e,5,5,5\n\
                   t5,f,3,0,0\n";
        let f = write_file(csv);
        let corpus = ingest_annotations(f.path(), 2).unwrap();
        let labels: BTreeMap<String, Vec<u8>> = corpus.labels(2).into_iter().collect();
        assert_eq!(labels["care"], vec![0, 0, 1, 1, 1, 0]);
        assert_eq!(labels["fairness"], vec![1, 1, 0, 0, 1, 0]);
    }

    #[test]
    fn votes_beyond_annotators_are_rejected() {
        let f = write_file("id,text,annotators,care\nt0,words,3,4\n");
        assert!(matches!(
            ingest_annotations(f.path(), 2),
            Err(PipelineError::VotesExceedAnnotators { .. })
        ));
    }

    #[test]
    fn malformed_count_is_located() {
        let f = write_file("id,text,annotators,care\nt0,words,3,two\n");
        match ingest_annotations(f.path(), 2).unwrap_err() {
            PipelineError::MalformedCount { column, value, .. } => {
                assert_eq!(column, "care");
                assert_eq!(value, "two");
            }
            other => panic!("unexpected: {other}"),
        }
    }

    #[test]
    fn aggregation_merges_by_maximum() {
        let csv = "id,text,annotators,care,harm\n\
                   t0,a,3,2,0\n\
                   t1,b,3,0,2\n\
                   t2,c,3,1,1\n";
        let f = write_file(csv);
        let corpus = ingest_annotations(f.path(), 2).unwrap();
        let map: BTreeMap<String, Vec<String>> =
            [("care_harm".to_string(), vec!["care".to_string(), "harm".to_string()])]
                .into_iter()
                .collect();
        let merged = corpus.aggregate(&map).unwrap();
        assert_eq!(merged.dimensions, vec!["care_harm"]);
        let labels: BTreeMap<String, Vec<u8>> = merged.labels(2).into_iter().collect();
        assert_eq!(labels["care_harm"], vec![1, 1, 0]);
    }

    #[test]
    fn external_features_align_by_corpus_order() {
        let f = write_file("id,f1,f2,f3,f4\nd2,5,6,7,8\nd1,1,2,3,4\nd9,9,9,9,9\n");
        let corpus: Vec<String> = vec!["d1".into(), "d2".into(), "d3".into()];
        let (matrix, report) = ingest_external_features(f.path(), &corpus).unwrap();
        assert_eq!(matrix.feature_names(), &["f1", "f2", "f3", "f4"]);
        assert_eq!(matrix.ids(), vec!["d1", "d2"]);
        assert_eq!(matrix.rows()[0].values, vec![1.0, 2.0, 3.0, 4.0]);
        assert_eq!(report.matched, 2);
        assert_eq!(report.unmatched_corpus_ids, vec!["d3"]);
        assert_eq!(report.unmatched_file_ids, vec!["d9"]);
    }

    #[test]
    fn duplicate_feature_ids_are_rejected() {
        let f = write_file("id,f1\nd1,1\nd1,2\n");
        assert!(matches!(
            ingest_external_features(f.path(), &["d1".to_string()]),
            Err(PipelineError::DuplicateId(_))
        ));
    }

    #[test]
    fn zero_overlap_is_an_error() {
        let f = write_file("id,f1\nd1,1\n");
        assert!(matches!(
            ingest_external_features(f.path(), &["other".to_string()]),
            Err(PipelineError::NoOverlap)
        ));
    }

    // The matrix writer and the feature reader are exact inverses, checked
    // at the bit level on a wide random matrix.
    #[test]
    fn wide_matrix_round_trips_bit_exactly() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(768);
        let names: Vec<String> = (0..768).map(|j| format!("f{j}")).collect();
        let rows: Vec<FeatureRow> = (0..3)
            .map(|i| FeatureRow {
                id: format!("d{i}"),
                values: (0..768).map(|_| rng.random_range(-5.0..5.0)).collect(),
            })
            .collect();
        let matrix = FeatureMatrix::new(names, rows).unwrap();

        let mut buf = Vec::new();
        matrix.write_csv(&mut buf).unwrap();
        let mut file = tempfile::NamedTempFile::new().unwrap();
        file.write_all(&buf).unwrap();
        let ids: Vec<String> = matrix.ids().iter().map(|s| s.to_string()).collect();
        let (reloaded, report) = ingest_external_features(file.path(), &ids).unwrap();
        assert_eq!(report.matched, 3);
        assert_eq!(reloaded.feature_names(), matrix.feature_names());
        for (a, b) in matrix.rows().iter().zip(reloaded.rows()) {
            for (x, y) in a.values.iter().zip(&b.values) {
                assert_eq!(x.to_bits(), y.to_bits());
            }
        }
    }

    #[test]
    fn builtin_defaults_parse() {
        let leanings = SourceLeanings::builtin();
        assert_eq!(leanings.leaning_of("Fox News"), Some(0));
        assert_eq!(leanings.leaning_of("vox"), Some(1));
        assert_eq!(leanings.leaning_of("Reuters"), None);
        let topics = builtin_topics();
        assert_eq!(topics.len(), 2);
        assert_eq!(topics[0].name, "immigration");
    }
}
