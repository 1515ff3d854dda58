//! The three derivation policies over one expanded neighbor set.
//!
//! `oracle_full` extracts a minimum-action derivation from the chart parser.
//! `oracle_l2rs` appends the longest matching neighbor span left to right.
//! `oracle_l2rt` copies one token per action. Their action counts satisfy
//! `full <= l2rs <= l2rt == |target|` on every parseable input.

use alloc::vec::Vec;

use crate::action::SpliceAction;
use crate::extract::{extract_actions, token_checksum, verify_derivation, Derivation, ExtractError};
use crate::match_table::MatchTable;
use crate::neighbors::ExpandedNeighborSet;
use crate::parser::{parse_min_cost, ParseError};
use crate::seq::TokenSequence;

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum OracleError {
    Parse(ParseError),
    Extract(ExtractError),
}

impl core::fmt::Display for OracleError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            OracleError::Parse(e) => write!(f, "{e}"),
            OracleError::Extract(e) => write!(f, "{e}"),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for OracleError {}

impl From<ParseError> for OracleError {
    fn from(e: ParseError) -> Self {
        OracleError::Parse(e)
    }
}

impl From<ExtractError> for OracleError {
    fn from(e: ExtractError) -> Self {
        OracleError::Extract(e)
    }
}

/// Minimum-action derivation via parsing and extraction.
pub fn oracle_full(
    target: &TokenSequence,
    neighbors: &ExpandedNeighborSet,
) -> Result<Derivation, OracleError> {
    let parse = parse_min_cost(target, neighbors)?;
    Ok(extract_actions(&parse.tree, target, neighbors)?)
}

/// Greedy left-to-right spans: at each position append the longest matching
/// neighbor span, ties to the smallest neighbor index, then smallest start.
/// This greedy choice attains the minimum over all left-to-right span
/// decompositions, since any span can be trimmed on the left.
pub fn oracle_l2rs(
    target: &TokenSequence,
    neighbors: &ExpandedNeighborSet,
) -> Result<Derivation, OracleError> {
    let tokens = target.tokens();
    if tokens.is_empty() {
        return Err(ParseError::EmptyTarget.into());
    }
    let table = MatchTable::build(tokens, neighbors);

    let mut actions: Vec<SpliceAction> = Vec::new();
    let mut a = 0usize;
    while a < tokens.len() {
        let mut best: Option<(u32, u32, u32)> = None; // (len, n, k0), max len wins
        for &(n, k0) in table.starts_at(a) {
            let ext = table.lce(n as usize, k0 as usize, a);
            if best.map_or(true, |(len, _, _)| ext > len) {
                best = Some((ext, n, k0));
            }
        }
        let (len, n, k0) = best.ok_or(ParseError::Unparseable {
            position: a,
            token: tokens[a],
        })?;
        let mut action = SpliceAction::new(a as u32, a as u32 + 1, n, k0 + 1, k0 + len);
        action.alternatives = table.identical_spans(&tokens[a..a + len as usize]);
        actions.push(action);
        a += len as usize;
    }

    finish(actions, target, neighbors)
}

/// One action per token, copied from the first (smallest neighbor index,
/// then start) matching position.
pub fn oracle_l2rt(
    target: &TokenSequence,
    neighbors: &ExpandedNeighborSet,
) -> Result<Derivation, OracleError> {
    let tokens = target.tokens();
    if tokens.is_empty() {
        return Err(ParseError::EmptyTarget.into());
    }
    let table = MatchTable::build(tokens, neighbors);

    let mut actions: Vec<SpliceAction> = Vec::new();
    for (a, &token) in tokens.iter().enumerate() {
        let &(n, k0) = table
            .starts_at(a)
            .first()
            .ok_or(ParseError::Unparseable { position: a, token })?;
        let mut action = SpliceAction::new(a as u32, a as u32 + 1, n, k0 + 1, k0 + 1);
        action.alternatives = table.identical_spans(&[token]);
        actions.push(action);
    }

    finish(actions, target, neighbors)
}

fn finish(
    actions: Vec<SpliceAction>,
    target: &TokenSequence,
    neighbors: &ExpandedNeighborSet,
) -> Result<Derivation, OracleError> {
    let derivation = Derivation {
        cost: actions.len() as u32,
        target_checksum: token_checksum(target.tokens()),
        actions,
    };
    if !verify_derivation(&derivation, target, neighbors) {
        return Err(OracleError::Extract(ExtractError {
            detail: alloc::string::String::from("greedy derivation failed replay"),
        }));
    }
    Ok(derivation)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::neighbors::expand_neighbors;
    use crate::vocab::TokenId;

    const A: TokenId = 10;
    const B: TokenId = 11;
    const C: TokenId = 12;
    const X: TokenId = 13;

    fn set(target: &[TokenId], nbrs: &[&[TokenId]]) -> (TokenSequence, ExpandedNeighborSet) {
        let target = TokenSequence::new(target.to_vec());
        let retrieved: Vec<_> = nbrs
            .iter()
            .map(|t| (TokenSequence::new(t.to_vec()), None))
            .collect();
        let expanded = expand_neighbors(&target, &retrieved, &[]);
        (target, expanded)
    }

    #[test]
    fn l2rs_takes_whole_spans() {
        let (y, nbrs) = set(&[A, B], &[&[A, B]]);
        let d = oracle_l2rs(&y, &nbrs).unwrap();
        assert_eq!(d.cost, 1);
        let (y, nbrs) = set(&[A, C, B], &[&[A, B], &[C]]);
        let d = oracle_l2rs(&y, &nbrs).unwrap();
        assert_eq!(d.cost, 3); // a | c | b: no left-to-right two-span split
        let (y, nbrs) = set(&[A, B, A, B], &[&[A, B]]);
        let d = oracle_l2rs(&y, &nbrs).unwrap();
        assert_eq!(d.cost, 2);
    }

    #[test]
    fn l2rs_prefers_smallest_indices_on_ties() {
        let (y, nbrs) = set(&[A, B], &[&[A, B], &[A, B]]);
        let d = oracle_l2rs(&y, &nbrs).unwrap();
        assert_eq!(d.actions[0].n, 0);
        let (y, nbrs) = set(&[A], &[&[A, A]]);
        let d = oracle_l2rs(&y, &nbrs).unwrap();
        assert_eq!((d.actions[0].k, d.actions[0].l), (1, 1));
    }

    #[test]
    fn l2rt_is_one_action_per_token() {
        let (y, nbrs) = set(&[A, C, B], &[&[A, B], &[C]]);
        let d = oracle_l2rt(&y, &nbrs).unwrap();
        assert_eq!(d.cost, 3);
        assert!(d.actions.iter().all(|a| a.span_len() == 1));
        assert_eq!(d.actions[2].n, 0); // b copied from the first neighbor
    }

    #[test]
    fn l2rt_alternatives_list_every_matching_position() {
        let (y, nbrs) = set(&[A], &[&[A, A], &[B, A]]);
        let d = oracle_l2rt(&y, &nbrs).unwrap();
        assert_eq!(d.actions[0].alternatives, [(0, 1, 1), (0, 2, 2), (1, 2, 2)]);
    }

    #[test]
    fn policy_ordering_holds() {
        let (y, nbrs) = set(&[X, A, C, B, X], &[&[A, B], &[C], &[X]]);
        let full = oracle_full(&y, &nbrs).unwrap();
        let l2rs = oracle_l2rs(&y, &nbrs).unwrap();
        let l2rt = oracle_l2rt(&y, &nbrs).unwrap();
        assert!(full.cost <= l2rs.cost);
        assert!(l2rs.cost <= l2rt.cost);
        assert_eq!(l2rt.cost, 5);
    }

    #[test]
    fn empty_target_is_rejected_by_both_greedy_policies() {
        let (y, nbrs) = set(&[], &[&[A]]);
        assert!(matches!(
            oracle_l2rs(&y, &nbrs),
            Err(OracleError::Parse(ParseError::EmptyTarget))
        ));
        assert!(matches!(
            oracle_l2rt(&y, &nbrs),
            Err(OracleError::Parse(ParseError::EmptyTarget))
        ));
    }
}
