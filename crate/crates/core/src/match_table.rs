//! Longest-common-extension table between a target and its neighbor set.

use alloc::vec;
use alloc::vec::Vec;

use crate::neighbors::ExpandedNeighborSet;
use crate::vocab::{tokens_match, TokenId};

/// For each neighbor `n`, `lce(n, k0, a)` is the length of the longest run
/// with `nu(n)[k0..k0+m] == y[a..a+m]`, using match semantics that exclude
/// MASK. Built once per target in O(sum |nu| * |y|).
pub struct MatchTable {
    target: Vec<TokenId>,
    seqs: Vec<Vec<TokenId>>,
    /// Per neighbor: (T_n + 1) x (T + 1) suffix-extension matrix.
    lce: Vec<Vec<u32>>,
    /// Per target position: all (n, k0) with lce >= 1, sorted ascending.
    starts: Vec<Vec<(u32, u32)>>,
}

impl MatchTable {
    pub fn build(target: &[TokenId], neighbors: &ExpandedNeighborSet) -> MatchTable {
        let seqs: Vec<Vec<TokenId>> = neighbors
            .entries
            .iter()
            .map(|e| e.seq.tokens().to_vec())
            .collect();
        Self::build_from_tokens(target, seqs)
    }

    pub(crate) fn build_from_tokens(target: &[TokenId], seqs: Vec<Vec<TokenId>>) -> MatchTable {
        let t = target.len();
        let mut lce = Vec::with_capacity(seqs.len());
        let mut starts = vec![Vec::new(); t];

        for (n, nu) in seqs.iter().enumerate() {
            let tn = nu.len();
            let mut table = vec![0u32; (tn + 1) * (t + 1)];
            for k0 in (0..tn).rev() {
                for a in (0..t).rev() {
                    if tokens_match(nu[k0], target[a]) {
                        table[k0 * (t + 1) + a] = 1 + table[(k0 + 1) * (t + 1) + a + 1];
                    }
                }
            }
            for a in 0..t {
                for k0 in 0..tn {
                    if table[k0 * (t + 1) + a] > 0 {
                        starts[a].push((n as u32, k0 as u32));
                    }
                }
            }
            lce.push(table);
        }
        // Rebuild starts in (n, k0) ascending order; pushed per n already sorted.
        for list in &mut starts {
            list.sort_unstable();
        }

        MatchTable {
            target: target.to_vec(),
            seqs,
            lce,
            starts,
        }
    }

    pub fn target_len(&self) -> usize {
        self.target.len()
    }

    pub fn neighbor_count(&self) -> usize {
        self.seqs.len()
    }

    pub fn neighbor(&self, n: usize) -> &[TokenId] {
        &self.seqs[n]
    }

    /// Longest matching extension of neighbor `n` at `k0` against the target
    /// at `a` (both 0-based).
    pub fn lce(&self, n: usize, k0: usize, a: usize) -> u32 {
        let t = self.target.len();
        debug_assert!(k0 <= self.seqs[n].len() && a <= t);
        self.lce[n][k0 * (t + 1) + a]
    }

    /// All (n, k0) whose extension at target position `a` is at least 1,
    /// ascending in (n, k0).
    pub fn starts_at(&self, a: usize) -> &[(u32, u32)] {
        &self.starts[a]
    }

    /// Smallest k0 such that neighbor `n` matches `y[a..a+len)` from k0.
    pub fn min_start(&self, n: usize, a: usize, len: u32) -> Option<u32> {
        self.starts[a]
            .iter()
            .filter(|&&(sn, _)| sn == n as u32)
            .find(|&&(sn, k0)| self.lce(sn as usize, k0 as usize, a) >= len)
            .map(|&(_, k0)| k0)
    }

    /// Every (n, k, l) triple (1-based k, l) whose span is byte-for-byte the
    /// given tokens. Raw id equality here, so MASK positions compare equal;
    /// swapping in any returned span reproduces the same token string.
    pub fn identical_spans(&self, span: &[TokenId]) -> Vec<(u32, u32, u32)> {
        let mut out = Vec::new();
        if span.is_empty() {
            return out;
        }
        for (n, nu) in self.seqs.iter().enumerate() {
            if nu.len() < span.len() {
                continue;
            }
            for k0 in 0..=nu.len() - span.len() {
                if &nu[k0..k0 + span.len()] == span {
                    out.push((n as u32, k0 as u32 + 1, (k0 + span.len()) as u32));
                }
            }
        }
        out
    }
}
