//! The expanded neighbor set a derivation may splice from.

use alloc::collections::BTreeSet;
use alloc::string::String;
use alloc::vec::Vec;

use crate::seq::TokenSequence;
use crate::vocab::{TokenId, MASK};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Origin {
    /// Span lifted from the example's own source.
    SourceSpan,
    /// Target sequence of a retrieved neighbor example.
    Retrieved,
    /// Single-token sequence added to cover an otherwise absent token type.
    SingletonFallback,
}

impl Origin {
    pub fn as_str(&self) -> &'static str {
        match self {
            Origin::SourceSpan => "source-span",
            Origin::Retrieved => "retrieved",
            Origin::SingletonFallback => "singleton-fallback",
        }
    }
}

/// One spliceable sequence plus where it came from. `source_link` is the id
/// of the example the sequence was taken from, when there is one.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NeighborEntry {
    pub seq: TokenSequence,
    pub origin: Origin,
    pub source_link: Option<String>,
}

/// Ordered list of sequences actions index into: source spans first, then
/// retrieved neighbors, then singleton fallbacks. Action field `n` is the
/// 0-based position in this list, so source material holds the low indices.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct ExpandedNeighborSet {
    pub entries: Vec<NeighborEntry>,
}

impl ExpandedNeighborSet {
    /// Wrap explicit sequences as-is, with no singleton expansion. Used when
    /// replaying a derivation against the exact neighbor list it shipped with.
    pub fn from_sequences(seqs: Vec<TokenSequence>) -> Self {
        ExpandedNeighborSet {
            entries: seqs
                .into_iter()
                .map(|seq| NeighborEntry {
                    seq,
                    origin: Origin::Retrieved,
                    source_link: None,
                })
                .collect(),
        }
    }

    pub fn sequences(&self) -> Vec<TokenSequence> {
        self.entries.iter().map(|e| e.seq.clone()).collect()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Every token type of `target` occurs unmasked in some entry.
    pub fn covers(&self, target: &TokenSequence) -> bool {
        let present: BTreeSet<TokenId> = self
            .entries
            .iter()
            .flat_map(|e| e.seq.tokens().iter().copied())
            .filter(|&t| t != MASK)
            .collect();
        target.tokens().iter().all(|t| present.contains(t))
    }
}

/// Builds the expanded neighbor set for a target: source spans, then the
/// retrieved neighbor sequences, then one singleton pseudo-neighbor for each
/// target token type no earlier entry provides (in first-occurrence order).
/// Masked positions do not count as providing a token.
pub fn expand_neighbors(
    target: &TokenSequence,
    retrieved: &[(TokenSequence, Option<String>)],
    source_spans: &[(TokenSequence, Option<String>)],
) -> ExpandedNeighborSet {
    let mut entries = Vec::with_capacity(source_spans.len() + retrieved.len());
    for (seq, link) in source_spans {
        entries.push(NeighborEntry {
            seq: seq.clone(),
            origin: Origin::SourceSpan,
            source_link: link.clone(),
        });
    }
    for (seq, link) in retrieved {
        entries.push(NeighborEntry {
            seq: seq.clone(),
            origin: Origin::Retrieved,
            source_link: link.clone(),
        });
    }

    let mut covered: BTreeSet<TokenId> = entries
        .iter()
        .flat_map(|e| e.seq.tokens().iter().copied())
        .filter(|&t| t != MASK)
        .collect();
    for &t in target.tokens() {
        if covered.insert(t) {
            entries.push(NeighborEntry {
                seq: TokenSequence::new(alloc::vec![t]),
                origin: Origin::SingletonFallback,
                source_link: None,
            });
        }
    }

    ExpandedNeighborSet { entries }
}
