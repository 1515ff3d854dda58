//! Nearest-neighbor selection over table headers or embedding vectors.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::num;

/// Field names and cell values of one structured record, as sets.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TableSource {
    pub fields: BTreeSet<String>,
    pub values: BTreeSet<String>,
}

impl TableSource {
    /// Field names are kept whole; values contribute their whitespace
    /// unigrams, since the distance compares value token sets.
    pub fn from_pairs<S: AsRef<str>>(pairs: &[(S, S)]) -> Self {
        TableSource {
            fields: pairs.iter().map(|(f, _)| f.as_ref().into()).collect(),
            values: pairs
                .iter()
                .flat_map(|(_, v)| v.as_ref().split_whitespace())
                .map(String::from)
                .collect(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RetrievalError {
    /// Cosine distance is undefined against an all-zero vector.
    ZeroNorm,
    DimensionMismatch { a_len: usize, b_len: usize },
    CorpusTooSmall { corpus: usize, k: usize },
    QueryOutOfRange { query: usize, corpus: usize },
}

impl core::fmt::Display for RetrievalError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            RetrievalError::ZeroNorm => write!(f, "cosine distance against a zero vector"),
            RetrievalError::DimensionMismatch { a_len, b_len } => {
                write!(f, "embedding dimensions differ: {a_len} vs {b_len}")
            }
            RetrievalError::CorpusTooSmall { corpus, k } => {
                write!(f, "corpus of {corpus} cannot supply {k} neighbors per query")
            }
            RetrievalError::QueryOutOfRange { query, corpus } => {
                write!(f, "query index {query} outside corpus of {corpus}")
            }
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for RetrievalError {}

/// Dice-style set overlap: 2|A n B| / (|A| + |B|). Two empty sets agree
/// perfectly; one empty set against a non-empty one scores zero.
fn set_f1(a: &BTreeSet<String>, b: &BTreeSet<String>) -> f64 {
    if a.is_empty() && b.is_empty() {
        return 1.0;
    }
    if a.is_empty() || b.is_empty() {
        return 0.0;
    }
    let inter = a.intersection(b).count() as f64;
    2.0 * inter / (a.len() + b.len()) as f64
}

/// Header distance: 1.1 - F1(fields) - 0.1 * F1(values). Field overlap
/// dominates; values only break near-ties. Zero iff both sets coincide.
pub fn table_distance(a: &TableSource, b: &TableSource) -> f64 {
    1.1 - set_f1(&a.fields, &b.fields) - 0.1 * set_f1(&a.values, &b.values)
}

pub fn cosine_distance(a: &[f64], b: &[f64]) -> Result<f64, RetrievalError> {
    if a.len() != b.len() {
        return Err(RetrievalError::DimensionMismatch {
            a_len: a.len(),
            b_len: b.len(),
        });
    }
    let mut dot = 0.0;
    let mut na = 0.0;
    let mut nb = 0.0;
    for (x, y) in a.iter().zip(b) {
        dot += x * y;
        na += x * x;
        nb += y * y;
    }
    if na == 0.0 || nb == 0.0 {
        return Err(RetrievalError::ZeroNorm);
    }
    Ok(1.0 - dot / (num::sqrt(na) * num::sqrt(nb)))
}

/// The `k` nearest corpus entries to `query` by `dist`, self excluded,
/// ascending by distance with index as the tiebreak.
pub fn top_k_by<F>(
    corpus_len: usize,
    query: usize,
    k: usize,
    mut dist: F,
) -> Result<Vec<(usize, f64)>, RetrievalError>
where
    F: FnMut(usize) -> Result<f64, RetrievalError>,
{
    if query >= corpus_len {
        return Err(RetrievalError::QueryOutOfRange {
            query,
            corpus: corpus_len,
        });
    }
    if corpus_len <= k {
        return Err(RetrievalError::CorpusTooSmall {
            corpus: corpus_len,
            k,
        });
    }
    let mut scored = Vec::with_capacity(corpus_len - 1);
    for i in 0..corpus_len {
        if i == query {
            continue;
        }
        scored.push((i, dist(i)?));
    }
    scored.sort_by(|(i, d), (j, e)| d.total_cmp(e).then(i.cmp(j)));
    scored.truncate(k);
    Ok(scored)
}

pub fn top_k_tables(
    corpus: &[TableSource],
    query: usize,
    k: usize,
) -> Result<Vec<(usize, f64)>, RetrievalError> {
    top_k_by(corpus.len(), query, k, |i| {
        Ok(table_distance(&corpus[query], &corpus[i]))
    })
}

pub fn top_k_embeddings(
    corpus: &[Vec<f64>],
    query: usize,
    k: usize,
) -> Result<Vec<(usize, f64)>, RetrievalError> {
    top_k_by(corpus.len(), query, k, |i| {
        cosine_distance(&corpus[query], &corpus[i])
    })
}
