//! Corpus preparation: source-span neighbors, copy masking, and PMI
//! association masking.
//!
//! Masking replaces tokens of a neighbor's text with the mask sentinel so
//! the parser cannot copy material that is specific to that neighbor's own
//! record. The mask sentinel never matches anything, including itself.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use crate::num;
use crate::seq::TokenSequence;
use crate::vocab::{whitespace_tokenize, TokenId, Vocab, BOS, EOS, MASK};

pub const DEFAULT_PMI_TAU: f64 = 3.0;
pub const DEFAULT_PMI_MIN_COUNT: u32 = 10;

/// Common English function words, exempt from overlap masking.
pub const STOPWORDS: [&str; 127] = [
    "i", "me", "my", "myself", "we", "our", "ours", "ourselves", "you", "your", "yours",
    "yourself", "yourselves", "he", "him", "his", "himself", "she", "her", "hers", "herself",
    "it", "its", "itself", "they", "them", "their", "theirs", "themselves", "what", "which",
    "who", "whom", "this", "that", "these", "those", "am", "is", "are", "was", "were", "be",
    "been", "being", "have", "has", "had", "having", "do", "does", "did", "doing", "a", "an",
    "the", "and", "but", "if", "or", "because", "as", "until", "while", "of", "at", "by", "for",
    "with", "about", "against", "between", "into", "through", "during", "before", "after",
    "above", "below", "to", "from", "up", "down", "in", "out", "on", "off", "over", "under",
    "again", "further", "then", "once", "here", "there", "when", "where", "why", "how", "all",
    "any", "both", "each", "few", "more", "most", "other", "some", "such", "no", "nor", "not",
    "only", "own", "same", "so", "than", "too", "very", "s", "t", "can", "will", "just", "don",
    "should", "now",
];

pub fn stopword_ids(vocab: &mut Vocab) -> BTreeSet<TokenId> {
    STOPWORDS.iter().map(|w| vocab.intern(w)).collect()
}

/// One neighbor span per record value, labeled with its field name.
/// `padded` wraps each span in the boundary sentinels so padded targets can
/// copy those tokens too.
pub fn extract_source_spans(
    pairs: &[(String, String)],
    vocab: &mut Vocab,
    lowercase: bool,
    padded: bool,
) -> Vec<(TokenSequence, Option<String>)> {
    pairs
        .iter()
        .map(|(field, value)| {
            let tokens = vocab.intern_all(&whitespace_tokenize(value, lowercase));
            let seq = if padded {
                let mut padded_tokens = Vec::with_capacity(tokens.len() + 2);
                padded_tokens.push(BOS);
                padded_tokens.extend_from_slice(&tokens);
                padded_tokens.push(EOS);
                TokenSequence::pre_padded(padded_tokens)
            } else {
                TokenSequence::new(tokens)
            };
            (seq, Some(field.clone()))
        })
        .collect()
}

/// Token runs for overlap masking: one `field value` run per record pair.
/// Matches never cross a run boundary.
pub fn source_runs(pairs: &[(String, String)], vocab: &mut Vocab, lowercase: bool) -> Vec<Vec<TokenId>> {
    pairs
        .iter()
        .map(|(field, value)| {
            let mut words = whitespace_tokenize(field, lowercase);
            words.extend(whitespace_tokenize(value, lowercase));
            vocab.intern_all(&words)
        })
        .collect()
}

/// Mask every maximal interval of `text` that occurs contiguously inside
/// one source run, unless the interval is made of stopwords only. An
/// interval is maximal when it reaches further right than any interval
/// found at an earlier start.
pub fn mask_source_overlap(
    text: &[TokenId],
    source_runs: &[Vec<TokenId>],
    stopwords: &BTreeSet<TokenId>,
) -> Vec<TokenId> {
    let mut out = text.to_vec();
    let mut best_end = 0usize;
    for p in 0..text.len() {
        let mut ext = 0usize;
        for run in source_runs {
            for q in 0..run.len() {
                let mut len = 0;
                while p + len < text.len()
                    && q + len < run.len()
                    && text[p + len] == run[q + len]
                {
                    len += 1;
                }
                ext = ext.max(len);
            }
        }
        if ext == 0 || p + ext <= best_end {
            continue;
        }
        best_end = p + ext;
        if text[p..p + ext].iter().all(|t| stopwords.contains(t)) {
            continue;
        }
        for slot in &mut out[p..p + ext] {
            *slot = MASK;
        }
    }
    out
}

/// Example-level co-occurrence counts between source and text token types.
#[derive(Debug, Clone, Default)]
pub struct PmiTable {
    pub examples: u32,
    source_counts: BTreeMap<TokenId, u32>,
    text_counts: BTreeMap<TokenId, u32>,
    joint: BTreeMap<(TokenId, TokenId), u32>,
}

impl PmiTable {
    /// Each example contributes one event per distinct token (and pair),
    /// however often the token repeats inside the example.
    pub fn build<'a, I>(examples: I) -> Self
    where
        I: IntoIterator<Item = (&'a [TokenId], &'a [TokenId])>,
    {
        let mut table = PmiTable::default();
        for (source, text) in examples {
            table.examples += 1;
            let s_types: BTreeSet<TokenId> = source.iter().copied().collect();
            let t_types: BTreeSet<TokenId> = text.iter().copied().collect();
            for &s in &s_types {
                *table.source_counts.entry(s).or_insert(0) += 1;
            }
            for &t in &t_types {
                *table.text_counts.entry(t).or_insert(0) += 1;
            }
            for &s in &s_types {
                for &t in &t_types {
                    *table.joint.entry((s, t)).or_insert(0) += 1;
                }
            }
        }
        table
    }

    pub fn text_count(&self, t: TokenId) -> u32 {
        self.text_counts.get(&t).copied().unwrap_or(0)
    }

    /// ln(P(s,t) / (P(s) P(t))) over examples; None when never co-observed.
    pub fn pmi(&self, s: TokenId, t: TokenId) -> Option<f64> {
        let joint = self.joint.get(&(s, t)).copied().unwrap_or(0);
        if joint == 0 {
            return None;
        }
        let cs = self.source_counts[&s] as f64;
        let ct = self.text_counts[&t] as f64;
        Some(num::ln(joint as f64 * self.examples as f64 / (cs * ct)))
    }
}

/// Mask text tokens whose association with any source token exceeds `tau`,
/// provided the token is frequent enough for the estimate to be trusted.
pub fn mask_pmi(
    text: &[TokenId],
    source: &[TokenId],
    table: &PmiTable,
    tau: f64,
    min_count: u32,
) -> Vec<TokenId> {
    let s_types: BTreeSet<TokenId> = source.iter().copied().collect();
    text.iter()
        .map(|&t| {
            if table.text_count(t) >= min_count
                && s_types
                    .iter()
                    .filter_map(|&s| table.pmi(s, t))
                    .any(|v| v > tau)
            {
                MASK
            } else {
                t
            }
        })
        .collect()
}

/// Drop later repeats, keeping first occurrences in order.
pub fn dedupe_pairs<T: Ord + Clone>(items: &[T]) -> Vec<T> {
    let mut seen = BTreeSet::new();
    items
        .iter()
        .filter(|item| seen.insert((*item).clone()))
        .cloned()
        .collect()
}
