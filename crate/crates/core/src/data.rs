//! Query-grouped ranking data and the LETOR/SVMLight ranking text format.
//!
//! A dataset is a sequence of queries, each holding the judged documents
//! retrieved for it. Every document carries a relevance grade on the 5-level
//! scale (0 = irrelevant .. 4 = most relevant) and a dense feature vector of
//! the dataset's declared dimensionality.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::io::BufRead;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::error::{Error, Result};

/// Highest admissible relevance grade.
pub const MAX_LABEL: u8 = 4;

/// One judged query-document pair: relevance grade plus feature vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Document {
    pub label: u8,
    pub features: Vec<f64>,
}

/// A query and the documents retrieved for it. Never empty.
#[derive(Debug, Clone, PartialEq)]
pub struct Query {
    pub qid: String,
    pub documents: Vec<Document>,
}

/// A query-grouped ranking dataset with a fixed feature dimensionality.
#[derive(Debug, Clone, PartialEq)]
pub struct Dataset {
    pub queries: Vec<Query>,
    pub feature_count: usize,
    pub feature_names: Option<Vec<String>>,
}

impl Dataset {
    /// Total number of documents across all queries.
    pub fn document_count(&self) -> usize {
        self.queries.iter().map(|q| q.documents.len()).sum()
    }
}

/// Parses the LETOR/SVMLight ranking format:
///
/// ```text
/// <label> qid:<id> <fid>:<value> ... # comment
/// ```
///
/// Lines are grouped by qid preserving first-appearance query order and
/// in-query line order. `feature_count` is the largest feature id seen;
/// absent ids densify to 0.0. `#` starts a comment running to end of line.
pub fn parse_letor<R: BufRead>(reader: R) -> Result<Dataset> {
    let mut order: Vec<String> = Vec::new();
    let mut groups: HashMap<String, Vec<(u8, Vec<(usize, f64)>)>> = HashMap::new();
    let mut feature_count = 0usize;

    for (idx, line) in reader.lines().enumerate() {
        let line_no = idx + 1;
        let line = line?;
        let content = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        };
        let content = content.trim();
        if content.is_empty() {
            continue;
        }

        let mut tokens = content.split_whitespace();
        let label_tok = tokens.next().expect("non-empty line has a first token");
        let label: i64 = label_tok.parse().map_err(|_| Error::Parse {
            line: line_no,
            message: format!("invalid label '{label_tok}'"),
        })?;
        if !(0..=i64::from(MAX_LABEL)).contains(&label) {
            return Err(Error::LabelOutOfRange { line: line_no, label });
        }

        let qid_tok = tokens.next().ok_or_else(|| Error::Parse {
            line: line_no,
            message: "missing qid".into(),
        })?;
        let qid = qid_tok.strip_prefix("qid:").ok_or_else(|| Error::Parse {
            line: line_no,
            message: format!("expected qid:<id>, got '{qid_tok}'"),
        })?;
        if qid.is_empty() {
            return Err(Error::Parse {
                line: line_no,
                message: "empty qid".into(),
            });
        }

        let mut pairs = Vec::new();
        for tok in tokens {
            let (fid_str, val_str) = tok.split_once(':').ok_or_else(|| Error::Parse {
                line: line_no,
                message: format!("expected <fid>:<value>, got '{tok}'"),
            })?;
            let fid: usize = fid_str.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("invalid feature id '{fid_str}'"),
            })?;
            if fid == 0 {
                return Err(Error::Parse {
                    line: line_no,
                    message: "feature ids are 1-based".into(),
                });
            }
            let value: f64 = val_str.parse().map_err(|_| Error::Parse {
                line: line_no,
                message: format!("unparsable value '{val_str}'"),
            })?;
            if !value.is_finite() {
                return Err(Error::Parse {
                    line: line_no,
                    message: format!("non-finite value '{val_str}'"),
                });
            }
            feature_count = feature_count.max(fid);
            pairs.push((fid, value));
        }

        if !groups.contains_key(qid) {
            order.push(qid.to_string());
        }
        groups
            .entry(qid.to_string())
            .or_default()
            .push((label as u8, pairs));
    }

    if order.is_empty() {
        return Err(Error::EmptyDataset);
    }

    let queries = order
        .into_iter()
        .map(|qid| {
            let documents = groups
                .remove(&qid)
                .expect("grouped qid")
                .into_iter()
                .map(|(label, pairs)| {
                    let mut features = vec![0.0; feature_count];
                    for (fid, value) in pairs {
                        features[fid - 1] = value;
                    }
                    Document { label, features }
                })
                .collect();
            Query { qid, documents }
        })
        .collect();

    Ok(Dataset {
        queries,
        feature_count,
        feature_names: None,
    })
}

/// Writes a dataset back to LETOR lines. Every feature id is written
/// explicitly so that re-parsing reproduces the dataset exactly.
pub fn serialize_letor(dataset: &Dataset) -> String {
    let mut out = String::new();
    for query in &dataset.queries {
        for doc in &query.documents {
            write!(out, "{} qid:{}", doc.label, query.qid).unwrap();
            for (i, value) in doc.features.iter().enumerate() {
                write!(out, " {}:{}", i + 1, value).unwrap();
            }
            out.push('\n');
        }
    }
    out
}

/// Splits a dataset into train/validation/test parts at query granularity.
///
/// Fractions must be positive and sum to 1 (within 1e-9). Part sizes are
/// rounded by largest remainder so the counts sum exactly; the assignment is
/// a seeded shuffle, deterministic for a fixed seed. Queries keep their
/// original dataset order within each part.
pub fn split_dataset(
    dataset: &Dataset,
    fractions: (f64, f64, f64),
    seed: u64,
) -> Result<(Dataset, Dataset, Dataset)> {
    let (a, b, c) = fractions;
    if !(a > 0.0 && b > 0.0 && c > 0.0) || (a + b + c - 1.0).abs() > 1e-9 {
        return Err(Error::BadFractions(a, b, c));
    }
    let n = dataset.queries.len();
    if n < 3 {
        return Err(Error::TooFewQueries {
            required: 3,
            actual: n,
        });
    }

    let counts = largest_remainder_counts(n, &[a, b, c]);

    let mut indices: Vec<usize> = (0..n).collect();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    indices.shuffle(&mut rng);

    let mut parts = Vec::with_capacity(3);
    let mut offset = 0;
    for &count in &counts {
        let mut chosen: Vec<usize> = indices[offset..offset + count].to_vec();
        chosen.sort_unstable();
        offset += count;
        parts.push(Dataset {
            queries: chosen
                .into_iter()
                .map(|i| dataset.queries[i].clone())
                .collect(),
            feature_count: dataset.feature_count,
            feature_names: dataset.feature_names.clone(),
        });
    }

    let test = parts.pop().unwrap();
    let valid = parts.pop().unwrap();
    let train = parts.pop().unwrap();
    Ok((train, valid, test))
}

/// Concatenates two datasets with the same feature dimensionality.
/// Qids must not collide.
pub fn merge_datasets(a: &Dataset, b: &Dataset) -> Result<Dataset> {
    if a.feature_count != b.feature_count {
        return Err(Error::DimensionMismatch {
            expected: a.feature_count,
            actual: b.feature_count,
        });
    }
    let mut queries = a.queries.clone();
    let existing: std::collections::HashSet<&str> =
        a.queries.iter().map(|q| q.qid.as_str()).collect();
    for query in &b.queries {
        if existing.contains(query.qid.as_str()) {
            return Err(Error::InvalidConfig(format!(
                "duplicate qid '{}' when merging datasets",
                query.qid
            )));
        }
        queries.push(query.clone());
    }
    Ok(Dataset {
        queries,
        feature_count: a.feature_count,
        feature_names: a.feature_names.clone(),
    })
}

fn largest_remainder_counts(n: usize, fractions: &[f64]) -> Vec<usize> {
    let ideals: Vec<f64> = fractions.iter().map(|f| f * n as f64).collect();
    let mut counts: Vec<usize> = ideals.iter().map(|x| x.floor() as usize).collect();
    let assigned: usize = counts.iter().sum();
    let mut order: Vec<usize> = (0..fractions.len()).collect();
    order.sort_by(|&i, &j| {
        let ri = ideals[i] - ideals[i].floor();
        let rj = ideals[j] - ideals[j].floor();
        rj.total_cmp(&ri).then(i.cmp(&j))
    });
    for k in 0..(n - assigned) {
        counts[order[k % order.len()]] += 1;
    }
    counts
}
