//! JSONL corpus records and their mapping onto the core types.
//!
//! One example per line. Derivations carry their own neighbor manifest
//! (token ids inline), so a derivation line can be replayed without joining
//! against other records or other files.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::{Deserialize, Serialize};
use splice_core::{
    token_checksum, Derivation, ExpandedNeighborSet, SpliceAction, TokenSequence, Vocab,
};

use crate::errors::CliError;

/// A table given as (field, value) pairs, or a pre-tokenized raw sequence.
/// Tables serialize as a list of two-string arrays, raw sources as a flat
/// string list; the two shapes cannot collide.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(untagged)]
pub enum SourceField {
    Pairs(Vec<(String, String)>),
    Raw(Vec<String>),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExampleRecord {
    pub id: String,
    pub source: SourceField,
    pub target: String,
    /// (neighbor id, distance) pairs, ascending by distance.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub neighbors: Option<Vec<(String, f64)>>,
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub derivations: Option<BTreeMap<String, DerivationRecord>>,
}

/// One spliceable sequence of the manifest, with its provenance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ManifestEntry {
    pub tokens: Vec<u32>,
    /// "source-span", "retrieved", or "singleton-fallback".
    pub origin: String,
    /// Neighbor example id or source field name, when there is one.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub label: Option<String>,
}

/// A replayable derivation. `target` holds the token ids the actions must
/// reproduce (padded when the derive run padded); `manifest` holds every
/// sequence the action `n` fields index into.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DerivationRecord {
    pub cost: u32,
    pub checksum: u64,
    pub target: Vec<u32>,
    /// One [i, j, n, k, l] array per action.
    pub actions: Vec<[u32; 5]>,
    /// Per action, every (n, k, l) span with identical tokens, own included.
    pub alternatives: Vec<Vec<[u32; 3]>>,
    pub manifest: Vec<ManifestEntry>,
    /// Wall-clock milliseconds of the minimum-cost parse; present only when
    /// derive ran with --timings.
    #[serde(skip_serializing_if = "Option::is_none")]
    #[serde(default)]
    pub parse_ms: Option<f64>,
}

impl DerivationRecord {
    pub fn from_core(
        derivation: &Derivation,
        target: &TokenSequence,
        neighbors: &ExpandedNeighborSet,
        parse_ms: Option<f64>,
    ) -> Self {
        DerivationRecord {
            cost: derivation.cost,
            checksum: derivation.target_checksum,
            target: target.tokens().to_vec(),
            actions: derivation
                .actions
                .iter()
                .map(|a| [a.i, a.j, a.n, a.k, a.l])
                .collect(),
            alternatives: derivation
                .actions
                .iter()
                .map(|a| a.alternatives.iter().map(|&(n, k, l)| [n, k, l]).collect())
                .collect(),
            manifest: neighbors
                .entries
                .iter()
                .map(|e| ManifestEntry {
                    tokens: e.seq.tokens().to_vec(),
                    origin: e.origin.as_str().to_string(),
                    label: e.source_link.clone(),
                })
                .collect(),
            parse_ms,
        }
    }

    /// Rebuild the core action list and manifest sequences. Validates the
    /// parallel actions/alternatives arrays and checksum coherence.
    pub fn to_core(&self) -> Result<(Vec<SpliceAction>, Vec<TokenSequence>), CliError> {
        if self.actions.len() != self.alternatives.len() {
            return Err(CliError::data(format!(
                "derivation has {} actions but {} alternative lists",
                self.actions.len(),
                self.alternatives.len()
            )));
        }
        let actions = self
            .actions
            .iter()
            .zip(&self.alternatives)
            .map(|(&[i, j, n, k, l], alts)| {
                let mut a = SpliceAction::new(i, j, n, k, l);
                a.alternatives = alts.iter().map(|&[n, k, l]| (n, k, l)).collect();
                a
            })
            .collect();
        let seqs = self
            .manifest
            .iter()
            .map(|e| TokenSequence::new(e.tokens.clone()))
            .collect();
        Ok((actions, seqs))
    }

    /// The stored target's checksum must match the stored checksum field.
    pub fn checksum_consistent(&self) -> bool {
        token_checksum(&self.target) == self.checksum
    }
}

/// Reads a JSONL corpus. Schema violations name the file and 1-based line;
/// duplicate ids name both lines.
pub fn read_corpus(path: &Path) -> Result<Vec<ExampleRecord>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut records = Vec::new();
    let mut seen: BTreeMap<String, usize> = BTreeMap::new();
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let record: ExampleRecord = serde_json::from_str(line).map_err(|e| {
            CliError::data(format!("{}:{lineno}: invalid record: {e}", path.display()))
        })?;
        if let Some(first) = seen.insert(record.id.clone(), lineno) {
            return Err(CliError::data(format!(
                "{}:{lineno}: duplicate id {:?} (first seen on line {first})",
                path.display(),
                record.id
            )));
        }
        records.push(record);
    }
    if records.is_empty() {
        return Err(CliError::data(format!(
            "{}: corpus has no records",
            path.display()
        )));
    }
    Ok(records)
}

pub fn write_corpus(path: &Path, records: &[ExampleRecord]) -> Result<(), CliError> {
    let file = fs::File::create(path)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))?;
    let mut out = BufWriter::new(file);
    for record in records {
        let line = serde_json::to_string(record)
            .map_err(|e| CliError::data(format!("cannot serialize record {}: {e}", record.id)))?;
        out.write_all(line.as_bytes())?;
        out.write_all(b"\n")?;
    }
    out.flush()?;
    Ok(())
}

/// Tokens a source contributes, in interning order: per pair, field tokens
/// then value tokens; raw sources contribute their tokens as written.
pub fn source_token_texts(source: &SourceField, lowercase: bool) -> Vec<String> {
    let mut texts = Vec::new();
    match source {
        SourceField::Pairs(pairs) => {
            for (field, value) in pairs {
                texts.extend(splice_core::whitespace_tokenize(field, lowercase));
                texts.extend(splice_core::whitespace_tokenize(value, lowercase));
            }
        }
        SourceField::Raw(tokens) => {
            for token in tokens {
                texts.extend(splice_core::whitespace_tokenize(token, lowercase));
            }
        }
    }
    texts
}

/// Interns the whole corpus in a fixed order: records in file order, each
/// record's source tokens before its target tokens. Rebuilding from the same
/// file therefore always reproduces the same ids, which is what lets replay
/// render stored token ids as text.
pub fn build_vocab(records: &[ExampleRecord], lowercase: bool) -> Vocab {
    let mut vocab = Vocab::new();
    for record in records {
        let source_texts = source_token_texts(&record.source, lowercase);
        vocab.intern_all(&source_texts);
        vocab.intern_all(&splice_core::whitespace_tokenize(&record.target, lowercase));
    }
    vocab
}

/// Index from record id to position, for neighbor resolution.
pub fn id_index(records: &[ExampleRecord]) -> BTreeMap<&str, usize> {
    records
        .iter()
        .enumerate()
        .map(|(i, r)| (r.id.as_str(), i))
        .collect()
}

/// Renders token ids through the vocabulary; unknown ids keep their number.
pub fn render_tokens(vocab: &Vocab, tokens: &[u32]) -> String {
    let mut out = String::new();
    for (i, &id) in tokens.iter().enumerate() {
        if i > 0 {
            out.push(' ');
        }
        match vocab.text(id) {
            Some(text) => out.push_str(text),
            None => out.push_str(&format!("<token {id}>")),
        }
    }
    out
}

/// Duplicate (source, target) records dropped, first kept. Returns kept
/// records and the number dropped.
pub fn dedupe_records(records: Vec<ExampleRecord>) -> (Vec<ExampleRecord>, usize) {
    let pairs: Vec<(SourceField, String)> = records
        .iter()
        .map(|r| (r.source.clone(), r.target.clone()))
        .collect();
    let kept = splice_core::dedupe_pairs(&pairs);
    let mut kept_iter = kept.iter().peekable();
    let before = records.len();
    let filtered: Vec<ExampleRecord> = records
        .into_iter()
        .zip(pairs)
        .filter_map(|(record, pair)| {
            // dedupe_pairs keeps first occurrences in order, so walking both
            // lists with one pointer keeps exactly those records.
            if kept_iter.peek() == Some(&&pair) {
                kept_iter.next();
                Some(record)
            } else {
                None
            }
        })
        .collect();
    let dropped = before - filtered.len();
    (filtered, dropped)
}

pub type StopwordSet = BTreeSet<splice_core::TokenId>;
