//! Turning a parse tree into a replayable splice-action sequence.
//!
//! Actions are emitted in the order cost-1 tree nodes are met in a
//! left-to-right depth-first walk. A `Splice` node emits one action that
//! inserts the full contiguous neighbor run from its prefix through its last
//! resumed segment, gaps included; each nested derivation then overwrites
//! the gap it displaces (a pure insertion when the gap is empty). Canvas
//! positions are computed against a canvas simulated during the walk, and
//! the result is checked by replay rather than trusted.

use alloc::string::String;
use alloc::vec::Vec;

use crate::action::{replay, splice_tokens, SpliceAction};
use crate::match_table::MatchTable;
use crate::neighbors::ExpandedNeighborSet;
use crate::parser::ParseTree;
use crate::seq::TokenSequence;
use crate::vocab::TokenId;

/// A verified action sequence deriving one target.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Derivation {
    pub actions: Vec<SpliceAction>,
    /// Number of actions; equals the parse cost for extracted derivations.
    pub cost: u32,
    /// FNV-1a digest of the derived token sequence.
    pub target_checksum: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExtractError {
    pub detail: String,
}

impl core::fmt::Display for ExtractError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "extraction inconsistency: {}", self.detail)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ExtractError {}

/// FNV-1a over the token ids.
pub fn token_checksum(tokens: &[TokenId]) -> u64 {
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for &t in tokens {
        h ^= t as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    h
}

struct Walker<'a> {
    neighbors: Vec<TokenSequence>,
    table: &'a MatchTable,
    canvas: Vec<TokenId>,
    actions: Vec<SpliceAction>,
}

impl Walker<'_> {
    fn emit(&mut self, pos: usize, placeholder: usize, n: u32, k0: u32, len: u32) -> Result<(), ExtractError> {
        let mut action = SpliceAction::new(
            pos as u32,
            (pos + placeholder + 1) as u32,
            n,
            k0 + 1,
            k0 + len,
        );
        let span = &self.neighbors[n as usize].tokens()[k0 as usize..(k0 + len) as usize];
        action.alternatives = self.table.identical_spans(span);
        self.canvas = splice_tokens(&self.canvas, &action, &self.neighbors).map_err(|e| {
            ExtractError {
                detail: alloc::format!("emitted action is invalid: {e}"),
            }
        })?;
        self.actions.push(action);
        Ok(())
    }

    /// Realizes `node` so that the canvas slice `[pos, pos + placeholder)`
    /// (gap tokens awaiting replacement) becomes the node's yield.
    fn realize(&mut self, node: &ParseTree, pos: usize, placeholder: usize) -> Result<(), ExtractError> {
        match node {
            ParseTree::Leaf { span, n, start } => {
                self.emit(pos, placeholder, *n, *start, span.len())
            }
            ParseTree::Pair { left, right, .. } => {
                self.realize(left, pos, placeholder)?;
                self.realize(right, pos + left.span().len() as usize, 0)
            }
            ParseTree::Splice {
                n,
                start,
                prefix_len,
                chain,
                ..
            } => {
                let last = chain.last().expect("splice chains are non-empty");
                let run_len = last.seg_start + last.seg_len - start;
                self.emit(pos, placeholder, *n, *start, run_len)?;

                let mut cursor = pos + *prefix_len as usize;
                let mut prev_end = start + prefix_len;
                for link in chain {
                    debug_assert!(link.seg_start >= prev_end);
                    let gap = (link.seg_start - prev_end) as usize;
                    self.realize(&link.nested, cursor, gap)?;
                    cursor += link.nested.span().len() as usize + link.seg_len as usize;
                    prev_end = link.seg_start + link.seg_len;
                }
                Ok(())
            }
        }
    }
}

/// Extracts the action sequence for `tree`, a parse of `target` against
/// `neighbors`. The sequence is replay-checked before being returned.
pub fn extract_actions(
    tree: &ParseTree,
    target: &TokenSequence,
    neighbors: &ExpandedNeighborSet,
) -> Result<Derivation, ExtractError> {
    let table = MatchTable::build(target.tokens(), neighbors);
    let mut walker = Walker {
        neighbors: neighbors.sequences(),
        table: &table,
        canvas: Vec::new(),
        actions: Vec::new(),
    };
    walker.realize(tree, 0, 0)?;

    if walker.canvas != target.tokens() {
        return Err(ExtractError {
            detail: String::from("simulated canvas does not equal the target"),
        });
    }
    if walker.actions.len() as u32 != tree.cost() {
        return Err(ExtractError {
            detail: String::from("action count differs from tree cost"),
        });
    }

    let derivation = Derivation {
        cost: walker.actions.len() as u32,
        target_checksum: token_checksum(target.tokens()),
        actions: walker.actions,
    };
    if !verify_derivation(&derivation, target, neighbors) {
        return Err(ExtractError {
            detail: String::from("replay verification failed"),
        });
    }
    Ok(derivation)
}

/// True iff replaying the actions reproduces `target` exactly and the
/// provenance trace is non-interleaving.
pub fn verify_derivation(
    derivation: &Derivation,
    target: &TokenSequence,
    neighbors: &ExpandedNeighborSet,
) -> bool {
    let seqs = neighbors.sequences();
    match replay(&derivation.actions, &seqs) {
        Ok((canvas, trace)) => {
            canvas.tokens() == target.tokens() && crate::action::check_non_interleaving(&trace)
        }
        Err(_) => false,
    }
}
