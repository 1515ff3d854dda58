//! Exhaustive minimum-action search over splice derivations, used to
//! cross-check the chart parser on small instances.
//!
//! Iterative deepening over action count. With pruning enabled the search
//! only discards branches that cannot lead to a minimal derivation in
//! emission form (spans sharing no token with the target, canvases needing
//! more repair gaps than actions remain, canvases too long to shrink back),
//! so the returned count stays exact. `pruned: false` disables every cut
//! for slow independent runs.

use alloc::collections::{BTreeMap, BTreeSet};
use alloc::string::String;
use alloc::vec::Vec;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::action::{splice_tokens, SpliceAction};
use crate::neighbors::ExpandedNeighborSet;
use crate::seq::TokenSequence;
use crate::vocab::TokenId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchLimits {
    /// Longest target the search will accept.
    pub max_target_len: usize,
    /// Cap on the summed length of all expanded neighbors.
    pub max_neighbor_tokens: usize,
}

impl Default for SearchLimits {
    fn default() -> Self {
        SearchLimits {
            max_target_len: 8,
            max_neighbor_tokens: 24,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct SearchConfig {
    pub limits: SearchLimits,
    /// When false, every exactness-preserving cut is disabled and the
    /// search enumerates the full action space at each depth.
    pub pruned: bool,
}

impl Default for SearchConfig {
    fn default() -> Self {
        SearchConfig {
            limits: SearchLimits::default(),
            pruned: true,
        }
    }
}

/// Instance is too large for exhaustive search.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct LimitExceeded {
    pub detail: String,
}

impl core::fmt::Display for LimitExceeded {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        write!(f, "instance too large for exhaustive search: {}", self.detail)
    }
}

#[cfg(feature = "std")]
impl std::error::Error for LimitExceeded {}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SearchOutcome {
    /// Minimum number of actions that produce the target exactly.
    Exact(u32),
    /// No action sequence of length <= bound produces the target.
    NotReachableWithinBound,
}

pub fn min_actions_bruteforce(
    target: &TokenSequence,
    neighbors: &ExpandedNeighborSet,
    bound: u32,
) -> Result<SearchOutcome, LimitExceeded> {
    min_actions_bruteforce_with(target, neighbors, bound, &SearchConfig::default())
}

pub fn min_actions_bruteforce_with(
    target: &TokenSequence,
    neighbors: &ExpandedNeighborSet,
    bound: u32,
    config: &SearchConfig,
) -> Result<SearchOutcome, LimitExceeded> {
    let y = target.tokens();
    let seqs = neighbors.sequences();
    let total: usize = seqs.iter().map(|s| s.len()).sum();
    if y.len() > config.limits.max_target_len {
        return Err(LimitExceeded {
            detail: alloc::format!(
                "target has {} tokens, limit {}",
                y.len(),
                config.limits.max_target_len
            ),
        });
    }
    if total > config.limits.max_neighbor_tokens {
        return Err(LimitExceeded {
            detail: alloc::format!(
                "neighbors hold {} tokens, limit {}",
                total,
                config.limits.max_neighbor_tokens
            ),
        });
    }
    if y.is_empty() {
        return Ok(SearchOutcome::Exact(0));
    }

    let y_types: BTreeSet<TokenId> = y.iter().copied().collect();
    if config.pruned {
        let reachable: BTreeSet<TokenId> = seqs
            .iter()
            .flat_map(|s| s.tokens().iter().copied())
            .collect();
        if !y_types.is_subset(&reachable) {
            return Ok(SearchOutcome::NotReachableWithinBound);
        }
    }

    // span_useful[n][k0][len-1]: span holds at least one target token type.
    let span_useful: Vec<Vec<Vec<bool>>> = seqs
        .iter()
        .map(|s| {
            let s = s.tokens();
            (0..s.len())
                .map(|k0| {
                    let mut any = false;
                    (k0..s.len())
                        .map(|end| {
                            any |= y_types.contains(&s[end]);
                            any
                        })
                        .collect()
                })
                .collect()
        })
        .collect();
    let max_span = seqs.iter().map(|s| s.len()).max().unwrap_or(0);

    let mut search = Search {
        y,
        seqs,
        span_useful,
        max_span,
        pruned: config.pruned,
        failed_at: BTreeMap::new(),
        gaps_cache: BTreeMap::new(),
    };
    for depth in 1..=bound {
        if search.dfs(&Vec::new(), depth) {
            return Ok(SearchOutcome::Exact(depth));
        }
    }
    Ok(SearchOutcome::NotReachableWithinBound)
}

struct Search<'a> {
    y: &'a [TokenId],
    seqs: Vec<TokenSequence>,
    span_useful: Vec<Vec<Vec<bool>>>,
    max_span: usize,
    pruned: bool,
    /// canvas -> largest remaining budget already shown to fail from it.
    failed_at: BTreeMap<Vec<TokenId>, u32>,
    gaps_cache: BTreeMap<Vec<TokenId>, u32>,
}

impl Search<'_> {
    fn dfs(&mut self, canvas: &Vec<TokenId>, remaining: u32) -> bool {
        if canvas.as_slice() == self.y {
            return true;
        }
        if remaining == 0 {
            return false;
        }
        if self.pruned {
            if let Some(&failed) = self.failed_at.get(canvas) {
                if failed >= remaining {
                    return false;
                }
            }
            if self.min_repair_gaps(canvas) > remaining {
                return false;
            }
        }

        let m = canvas.len() as u32;
        for n in 0..self.seqs.len() {
            let nu_len = self.seqs[n].len();
            for k0 in 0..nu_len {
                for len in 1..=(nu_len - k0) {
                    if self.pruned && !self.span_useful[n][k0][len - 1] {
                        continue;
                    }
                    for i in 0..=m {
                        for j in (i + 1)..=(m + 1) {
                            let action = SpliceAction::new(
                                i,
                                j,
                                n as u32,
                                k0 as u32 + 1,
                                (k0 + len) as u32,
                            );
                            let child = splice_tokens(canvas, &action, &self.seqs)
                                .expect("enumerated indices are in bounds");
                            if self.pruned
                                && child.len()
                                    > self.y.len()
                                        + self.max_span * (remaining as usize - 1)
                            {
                                continue;
                            }
                            if self.dfs(&child, remaining - 1) {
                                return true;
                            }
                        }
                    }
                }
            }
        }

        if self.pruned {
            let entry = self.failed_at.entry(canvas.clone()).or_insert(0);
            if *entry < remaining {
                *entry = remaining;
            }
        }
        false
    }

    /// Fewest contiguous canvas blocks that must each be rewritten by at
    /// least one future action for the canvas to become the target. Every
    /// remaining action repairs at most one such block, so a canvas with
    /// more blocks than budget is dead.
    fn min_repair_gaps(&mut self, canvas: &Vec<TokenId>) -> u32 {
        if let Some(&g) = self.gaps_cache.get(canvas) {
            return g;
        }
        const INF: u32 = u32::MAX / 2;
        let c = canvas.len();
        let t = self.y.len();
        // g[ci][yi]: min gap blocks matching canvas[ci..] to target[yi..].
        // h[ci][yi]: min of g over all (ci' >= ci, yi' >= yi).
        let mut g = alloc::vec![INF; (c + 1) * (t + 1)];
        let mut h = alloc::vec![INF; (c + 1) * (t + 1)];
        let idx = |ci: usize, yi: usize| ci * (t + 1) + yi;
        for ci in (0..=c).rev() {
            for yi in (0..=t).rev() {
                let mut best = if ci == c && yi == t { 0 } else { INF };
                if ci < c && yi < t && canvas[ci] == self.y[yi] {
                    best = best.min(g[idx(ci + 1, yi + 1)]);
                }
                if yi < t {
                    // One gap: skip any canvas run, produce >= 1 target token.
                    best = best.min(1 + h[idx(ci, yi + 1)]);
                }
                g[idx(ci, yi)] = best;
                let mut m = best;
                if ci < c {
                    m = m.min(h[idx(ci + 1, yi)]);
                }
                if yi < t {
                    m = m.min(h[idx(ci, yi + 1)]);
                }
                h[idx(ci, yi)] = m;
            }
        }
        let result = g[idx(0, 0)];
        self.gaps_cache.insert(canvas.clone(), result);
        result
    }
}

/// Left-to-right span decomposition minimum, by dynamic programming over
/// start positions. Independent check for the greedy span policy.
pub fn min_spans_l2rs_dp(
    target: &TokenSequence,
    neighbors: &ExpandedNeighborSet,
) -> Result<u32, crate::parser::ParseError> {
    let y = target.tokens();
    if y.is_empty() {
        return Err(crate::parser::ParseError::EmptyTarget);
    }
    let seqs = neighbors.sequences();
    const INF: u32 = u32::MAX / 2;
    let t = y.len();
    let mut dp = alloc::vec![INF; t + 1];
    dp[t] = 0;
    for a in (0..t).rev() {
        let mut ext = 0usize;
        for s in &seqs {
            let s = s.tokens();
            for k0 in 0..s.len() {
                let mut p = 0;
                while k0 + p < s.len()
                    && a + p < t
                    && crate::vocab::tokens_match(s[k0 + p], y[a + p])
                {
                    p += 1;
                }
                ext = ext.max(p);
            }
        }
        if ext == 0 {
            return Err(crate::parser::ParseError::Unparseable {
                position: a,
                token: y[a],
            });
        }
        for p in 1..=ext {
            dp[a] = dp[a].min(1 + dp[a + p]);
        }
    }
    Ok(dp[0])
}

/// A small randomized parse instance for cross-checking search and parser.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MicroInstance {
    pub seed: u64,
    pub target: TokenSequence,
    pub retrieved: Vec<TokenSequence>,
}

/// Deterministic instance from a seed. Cycles through four shapes: fully
/// random, target equal to a neighbor, target a permutation of a neighbor,
/// and a mid-sequence substitution that rewards replacement over
/// concatenation. Token ids start above the reserved sentinels.
pub fn gen_micro_instance(seed: u64, max_target_len: usize) -> MicroInstance {
    assert!(max_target_len >= 1);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let vocab: u32 = rng.gen_range(2..=5);
    let tok = |rng: &mut ChaCha8Rng| 10 + rng.gen_range(0..vocab);

    let template = seed % 4;
    let (target, retrieved) = match template {
        1 => {
            let len = rng.gen_range(1..=max_target_len.min(6));
            let nu: Vec<TokenId> = (0..len).map(|_| tok(&mut rng)).collect();
            let mut nbrs = alloc::vec![nu.clone()];
            for _ in 0..rng.gen_range(0..=2u32) {
                let len = rng.gen_range(1..=6);
                nbrs.push((0..len).map(|_| tok(&mut rng)).collect());
            }
            (nu, nbrs)
        }
        2 => {
            let len = rng.gen_range(1..=max_target_len.min(6));
            let nu: Vec<TokenId> = (0..len).map(|_| tok(&mut rng)).collect();
            let mut y = nu.clone();
            // Fisher-Yates against the same stream keeps the shape seeded.
            for i in (1..y.len()).rev() {
                let j = rng.gen_range(0..=i);
                y.swap(i, j);
            }
            (y, alloc::vec![nu])
        }
        3 if max_target_len >= 3 => {
            let a = tok(&mut rng);
            let mut b = tok(&mut rng);
            while b == a {
                b = tok(&mut rng);
            }
            let head_len = rng.gen_range(1..=(max_target_len - 2).min(2));
            let tail_len = rng.gen_range(1..=(max_target_len - head_len - 1).min(2));
            let head: Vec<TokenId> = (0..head_len).map(|_| tok(&mut rng)).collect();
            let tail: Vec<TokenId> = (0..tail_len).map(|_| tok(&mut rng)).collect();
            let mut nu = head.clone();
            nu.push(a);
            nu.extend_from_slice(&tail);
            let mut y = head;
            y.push(b);
            y.extend_from_slice(&tail);
            (y, alloc::vec![nu, alloc::vec![b]])
        }
        _ => {
            let len = rng.gen_range(1..=max_target_len);
            let y: Vec<TokenId> = (0..len).map(|_| tok(&mut rng)).collect();
            let n = rng.gen_range(1..=3u32);
            let nbrs = (0..n)
                .map(|_| {
                    let len = rng.gen_range(1..=6);
                    (0..len).map(|_| tok(&mut rng)).collect()
                })
                .collect();
            (y, nbrs)
        }
    };

    MicroInstance {
        seed,
        target: TokenSequence::new(target),
        retrieved: retrieved.into_iter().map(TokenSequence::new).collect(),
    }
}
