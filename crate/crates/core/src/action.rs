//! Splice actions: inserting or replacing with neighbor spans.
//!
//! An action `(i, j, n, k, l)` rewrites a canvas of length `M` to
//! `canvas[1:i] . nu(n)[k:l] . canvas[j:M]` (1-based inclusive slices, with
//! `canvas[1:0]` and `canvas[M+1:M]` empty). `i` counts the kept prefix
//! tokens, `j` is the 1-based position of the first kept suffix token, so
//! `j = i+1` is a pure insertion and `j > i+1` replaces the tokens between.
//! `n` is a 0-based index into the neighbor list; `k <= l` are 1-based
//! inclusive positions in that neighbor. Deletion is not representable:
//! every action inserts at least one token.

use alloc::vec::Vec;

use crate::seq::TokenSequence;
use crate::vocab::TokenId;

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct SpliceAction {
    /// Kept prefix length: insert after canvas position `i` (0 = at front).
    pub i: u32,
    /// 1-based position of the first kept suffix token; `i < j <= M+1`.
    pub j: u32,
    /// 0-based neighbor index.
    pub n: u32,
    /// 1-based inclusive span start in neighbor `n`.
    pub k: u32,
    /// 1-based inclusive span end in neighbor `n`.
    pub l: u32,
    /// Every `(n, k, l)` whose span is token-identical to this action's span,
    /// the action's own triple included. Filled at extraction time.
    pub alternatives: Vec<(u32, u32, u32)>,
}

impl SpliceAction {
    pub fn new(i: u32, j: u32, n: u32, k: u32, l: u32) -> Self {
        SpliceAction {
            i,
            j,
            n,
            k,
            l,
            alternatives: Vec::new(),
        }
    }

    /// Span length `l - k + 1`.
    pub fn span_len(&self) -> u32 {
        self.l - self.k + 1
    }

    /// True when the action overwrites at least one canvas token.
    pub fn is_replacement(&self) -> bool {
        self.j > self.i + 1
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum GinsertError {
    /// `n` does not address a neighbor.
    NoSuchNeighbor { n: u32, neighbor_count: usize },
    /// One of the `i < j <= M+1` or `1 <= k <= l <= T_n` constraints failed.
    IndexOutOfBounds {
        i: u32,
        j: u32,
        k: u32,
        l: u32,
        canvas_len: usize,
        neighbor_len: usize,
    },
}

impl core::fmt::Display for GinsertError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            GinsertError::NoSuchNeighbor { n, neighbor_count } => {
                write!(f, "no neighbor {n} (set has {neighbor_count})")
            }
            GinsertError::IndexOutOfBounds {
                i,
                j,
                k,
                l,
                canvas_len,
                neighbor_len,
            } => write!(
                f,
                "action ({i},{j},_,{k},{l}) out of bounds for canvas len {canvas_len}, neighbor len {neighbor_len}"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for GinsertError {}

/// Applies one splice action to a canvas, returning the new canvas.
pub fn ginsert(
    canvas: &TokenSequence,
    action: &SpliceAction,
    neighbors: &[TokenSequence],
) -> Result<TokenSequence, GinsertError> {
    let spliced = splice_tokens(canvas.tokens(), action, neighbors)?;
    Ok(TokenSequence::new(spliced))
}

/// Token-level splice shared by `ginsert` and `replay`.
pub(crate) fn splice_tokens(
    canvas: &[TokenId],
    action: &SpliceAction,
    neighbors: &[TokenSequence],
) -> Result<Vec<TokenId>, GinsertError> {
    let nu = neighbors
        .get(action.n as usize)
        .ok_or(GinsertError::NoSuchNeighbor {
            n: action.n,
            neighbor_count: neighbors.len(),
        })?
        .tokens();

    let m = canvas.len();
    let (i, j, k, l) = (
        action.i as usize,
        action.j as usize,
        action.k as usize,
        action.l as usize,
    );
    let bounds_ok = i < j && j <= m + 1 && k >= 1 && k <= l && l <= nu.len();
    if !bounds_ok {
        return Err(GinsertError::IndexOutOfBounds {
            i: action.i,
            j: action.j,
            k: action.k,
            l: action.l,
            canvas_len: m,
            neighbor_len: nu.len(),
        });
    }

    let mut out = Vec::with_capacity(i + (l - k + 1) + (m + 1 - j));
    out.extend_from_slice(&canvas[..i]);
    out.extend_from_slice(&nu[k - 1..l]);
    out.extend_from_slice(&canvas[j - 1..]);
    Ok(out)
}

/// Which action last wrote each canvas position. Labels are the 1-based
/// ordinals of the actions in the replayed sequence.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ProvenanceTrace {
    pub labels: Vec<u32>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ReplayError {
    /// 1-based ordinal of the action that failed.
    pub ordinal: usize,
    pub source: GinsertError,
}

impl core::fmt::Display for ReplayError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "action {} failed: {}", self.ordinal, self.source)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ReplayError {}

/// Replays a derivation from the empty canvas, tracking provenance labels.
pub fn replay(
    actions: &[SpliceAction],
    neighbors: &[TokenSequence],
) -> Result<(TokenSequence, ProvenanceTrace), ReplayError> {
    let mut canvas: Vec<TokenId> = Vec::new();
    let mut labels: Vec<u32> = Vec::new();

    for (idx, action) in actions.iter().enumerate() {
        let ordinal = idx + 1;
        canvas = splice_tokens(&canvas, action, neighbors)
            .map_err(|source| ReplayError { ordinal, source })?;

        let i = action.i as usize;
        let j = action.j as usize;
        let mut next = Vec::with_capacity(canvas.len());
        next.extend_from_slice(&labels[..i]);
        next.extend(core::iter::repeat(ordinal as u32).take(action.span_len() as usize));
        next.extend_from_slice(&labels[j - 1..]);
        labels = next;
    }

    debug_assert_eq!(canvas.len(), labels.len());
    Ok((TokenSequence::new(canvas), ProvenanceTrace { labels }))
}

/// True when no two labels interleave, i.e. there is no `a < b < c < d` with
/// `labels[a] = labels[c] != labels[b] = labels[d]`. Single stack pass.
pub fn check_non_interleaving(trace: &ProvenanceTrace) -> bool {
    let labels = &trace.labels;
    let mut first: alloc::collections::BTreeMap<u32, usize> = alloc::collections::BTreeMap::new();
    let mut last: alloc::collections::BTreeMap<u32, usize> = alloc::collections::BTreeMap::new();
    for (pos, &lab) in labels.iter().enumerate() {
        first.entry(lab).or_insert(pos);
        last.insert(lab, pos);
    }

    // Blocks must nest like brackets: a label may reappear only while it is
    // still the innermost open block.
    let mut stack: Vec<(u32, usize)> = Vec::new();
    for (pos, &lab) in labels.iter().enumerate() {
        while let Some(&(_, end)) = stack.last() {
            if end < pos {
                stack.pop();
            } else {
                break;
            }
        }
        match stack.last() {
            Some(&(top, _)) if top == lab => continue,
            top => {
                if first[&lab] != pos {
                    return false; // reappeared under a different open block
                }
                if let Some(&(_, top_end)) = top {
                    if last[&lab] > top_end {
                        return false; // extends past the enclosing block
                    }
                }
                stack.push((lab, last[&lab]));
            }
        }
    }
    true
}

#[cfg(test)]
mod tests {
    use super::*;
    use alloc::vec;

    fn seqs(raw: &[&[TokenId]]) -> Vec<TokenSequence> {
        raw.iter().map(|t| TokenSequence::new(t.to_vec())).collect()
    }

    // Tokens: a=10 b=11 c=12 x=13 y=14.
    const A: TokenId = 10;
    const B: TokenId = 11;
    const C: TokenId = 12;
    const X: TokenId = 13;
    const Y: TokenId = 14;

    #[test]
    fn insert_whole_span_into_empty_canvas() {
        let nbrs = seqs(&[&[A, B]]);
        let out = ginsert(
            &TokenSequence::new(vec![]),
            &SpliceAction::new(0, 1, 0, 1, 2),
            &nbrs,
        )
        .unwrap();
        assert_eq!(out.tokens(), &[A, B]);
    }

    #[test]
    fn pure_insertion_in_the_middle() {
        let nbrs = seqs(&[&[A, B], &[C]]);
        let out = ginsert(
            &TokenSequence::new(vec![A, B]),
            &SpliceAction::new(1, 2, 1, 1, 1),
            &nbrs,
        )
        .unwrap();
        assert_eq!(out.tokens(), &[A, C, B]);
    }

    #[test]
    fn replacement_drops_displaced_tokens() {
        let nbrs = seqs(&[&[A, B], &[C]]);
        let out = ginsert(
            &TokenSequence::new(vec![A, X, Y, B]),
            &SpliceAction::new(1, 4, 1, 1, 1),
            &nbrs,
        )
        .unwrap();
        assert_eq!(out.tokens(), &[A, C, B]);
    }

    #[test]
    fn bounds_violations_are_rejected() {
        let nbrs = seqs(&[&[A, B]]);
        let canvas = TokenSequence::new(vec![A, B]);
        for bad in [
            SpliceAction::new(1, 1, 0, 1, 1), // i >= j
            SpliceAction::new(0, 4, 0, 1, 1), // j > M+1
            SpliceAction::new(0, 1, 0, 0, 1), // k < 1
            SpliceAction::new(0, 1, 0, 2, 1), // k > l
            SpliceAction::new(0, 1, 0, 1, 3), // l > T_n
        ] {
            assert!(matches!(
                ginsert(&canvas, &bad, &nbrs),
                Err(GinsertError::IndexOutOfBounds { .. })
            ));
        }
        assert!(matches!(
            ginsert(&canvas, &SpliceAction::new(0, 1, 5, 1, 1), &nbrs),
            Err(GinsertError::NoSuchNeighbor { n: 5, .. })
        ));
    }

    #[test]
    fn replay_single_action() {
        let nbrs = seqs(&[&[A, B]]);
        let (out, trace) = replay(&[SpliceAction::new(0, 1, 0, 1, 2)], &nbrs).unwrap();
        assert_eq!(out.tokens(), &[A, B]);
        assert_eq!(trace.labels, vec![1, 1]);
    }

    #[test]
    fn replay_nested_insertion() {
        let nbrs = seqs(&[&[A, B], &[C]]);
        let (out, trace) = replay(
            &[SpliceAction::new(0, 1, 0, 1, 2), SpliceAction::new(1, 2, 1, 1, 1)],
            &nbrs,
        )
        .unwrap();
        assert_eq!(out.tokens(), &[A, C, B]);
        assert_eq!(trace.labels, vec![1, 2, 1]);
    }

    #[test]
    fn replay_replacement_relabels() {
        let nbrs = seqs(&[&[A, X, Y, B], &[C]]);
        let (out, trace) = replay(
            &[SpliceAction::new(0, 1, 0, 1, 4), SpliceAction::new(1, 4, 1, 1, 1)],
            &nbrs,
        )
        .unwrap();
        assert_eq!(out.tokens(), &[A, C, B]);
        assert_eq!(trace.labels, vec![1, 2, 1]);
    }

    #[test]
    fn replay_reports_failing_ordinal() {
        let nbrs = seqs(&[&[A]]);
        let err = replay(
            &[SpliceAction::new(0, 1, 0, 1, 1), SpliceAction::new(5, 6, 0, 1, 1)],
            &nbrs,
        )
        .unwrap_err();
        assert_eq!(err.ordinal, 2);
    }

    #[test]
    fn interleaving_detection() {
        let t = |labels: &[u32]| ProvenanceTrace {
            labels: labels.to_vec(),
        };
        assert!(check_non_interleaving(&t(&[])));
        assert!(check_non_interleaving(&t(&[1, 2, 1])));
        assert!(check_non_interleaving(&t(&[1, 1, 2, 2, 3])));
        assert!(check_non_interleaving(&t(&[1, 2, 2, 1, 3])));
        assert!(!check_non_interleaving(&t(&[1, 2, 1, 2])));
        assert!(!check_non_interleaving(&t(&[1, 2, 1, 2, 1])));
        assert!(!check_non_interleaving(&t(&[3, 1, 2, 1, 3, 2])));
    }
}
