//! Minimum-cost chart parser over neighbor spans.
//!
//! A target `y` is parsed bottom-up over spans `[a, b)`. Three item kinds
//! exist. `S` derives any target span and pays 1 per spliced neighbor span.
//! `C(n, s)` covers gap material followed by a resumption of neighbor `n` at
//! position `s`; `R(n, s)` is that resumed remainder. The productions:
//!
//!   S -> span of nu(n)                         cost 1
//!   S -> S S                                   cost 0
//!   S -> prefix of nu(n) ending at l, C(n, s)  cost 1, requires l < s
//!   C(n, s) -> S R(n, s)                       cost 0
//!   R(n, s) -> nu(n)[s..t]                     cost 0
//!   R(n, s) -> nu(n)[s..t] C(n, u)             cost 0, requires t < u
//!
//! The minimum cost equals the length of the shortest splice-action sequence
//! deriving `y`. `C`/`R` items are materialized only for `(n, s)` pairs whose
//! resumption actually matches somewhere, read off the match table, which
//! keeps the chart sparse.
//!
//! Equal-cost ambiguity is resolved lexicographically: longer leftmost
//! neighbor-span leaf, then smaller neighbor index, then smaller span start,
//! then plain span over span-plus-continuation over concatenation. Remaining
//! ties fall to the earliest candidate in a fixed scan order, so parses are
//! deterministic.

use alloc::boxed::Box;
use alloc::collections::BTreeMap;
use alloc::vec;
use alloc::vec::Vec;

use crate::match_table::MatchTable;
use crate::neighbors::ExpandedNeighborSet;
use crate::seq::TokenSequence;
use crate::vocab::TokenId;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Span {
    pub start: u32,
    pub end: u32,
}

impl Span {
    pub fn len(&self) -> u32 {
        self.end - self.start
    }

    pub fn is_empty(&self) -> bool {
        self.start == self.end
    }
}

/// One link of a splice chain: the nested derivation that fills the gap,
/// then the resumed neighbor segment `[seg_start, seg_start + seg_len)`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ChainLink {
    pub nested: ParseTree,
    pub seg_start: u32,
    pub seg_len: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseTree {
    /// One neighbor span `nu(n)[start .. start + span.len())` read verbatim.
    Leaf { span: Span, n: u32, start: u32 },
    /// Two independent derivations side by side.
    Pair {
        span: Span,
        left: Box<ParseTree>,
        right: Box<ParseTree>,
    },
    /// A neighbor prefix `nu(n)[start .. start + prefix_len)` whose
    /// continuation is interrupted by nested derivations: each link fills a
    /// gap and resumes the same neighbor further right.
    Splice {
        span: Span,
        n: u32,
        start: u32,
        prefix_len: u32,
        chain: Vec<ChainLink>,
    },
}

impl ParseTree {
    pub fn span(&self) -> Span {
        match self {
            ParseTree::Leaf { span, .. }
            | ParseTree::Pair { span, .. }
            | ParseTree::Splice { span, .. } => *span,
        }
    }

    /// Recomputes cost from the rule weights: 1 per `Leaf`, 1 per `Splice`,
    /// 0 for everything else.
    pub fn cost(&self) -> u32 {
        match self {
            ParseTree::Leaf { .. } => 1,
            ParseTree::Pair { left, right, .. } => left.cost() + right.cost(),
            ParseTree::Splice { chain, .. } => {
                1 + chain.iter().map(|link| link.nested.cost()).sum::<u32>()
            }
        }
    }

    /// Neighbor-span leaves in left-to-right order as `(target_span, n,
    /// start, len)`. Their target spans tile the parsed span exactly.
    pub fn leaves(&self) -> Vec<(Span, u32, u32, u32)> {
        let mut out = Vec::new();
        self.collect_leaves(&mut out);
        out
    }

    fn collect_leaves(&self, out: &mut Vec<(Span, u32, u32, u32)>) {
        match self {
            ParseTree::Leaf { span, n, start } => {
                out.push((*span, *n, *start, span.len()));
            }
            ParseTree::Pair { left, right, .. } => {
                left.collect_leaves(out);
                right.collect_leaves(out);
            }
            ParseTree::Splice {
                span,
                n,
                start,
                prefix_len,
                chain,
            } => {
                let mut pos = span.start;
                out.push((
                    Span {
                        start: pos,
                        end: pos + prefix_len,
                    },
                    *n,
                    *start,
                    *prefix_len,
                ));
                pos += prefix_len;
                for link in chain {
                    link.nested.collect_leaves(out);
                    pos += link.nested.span().len();
                    out.push((
                        Span {
                            start: pos,
                            end: pos + link.seg_len,
                        },
                        *n,
                        link.seg_start,
                        link.seg_len,
                    ));
                    pos += link.seg_len;
                }
            }
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct ParseStats {
    /// Chart items stored, by kind.
    pub s_items: u64,
    pub c_items: u64,
    pub r_items: u64,
    /// Candidate rule combinations considered.
    pub rule_applications: u64,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseOutcome {
    pub cost: u32,
    pub tree: ParseTree,
    pub stats: ParseStats,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub enum ParseError {
    EmptyTarget,
    /// Some target token occurs unmasked in no neighbor, so no derivation
    /// exists at any cost.
    Unparseable { position: usize, token: TokenId },
}

impl core::fmt::Display for ParseError {
    fn fmt(&self, f: &mut core::fmt::Formatter<'_>) -> core::fmt::Result {
        match self {
            ParseError::EmptyTarget => write!(f, "target is empty"),
            ParseError::Unparseable { position, token } => write!(
                f,
                "token {token} at target position {position} occurs in no neighbor"
            ),
        }
    }
}

#[cfg(feature = "std")]
impl std::error::Error for ParseError {}

// Rule ranks for the final tie-break level.
const RANK_PLAIN: u8 = 0; // S -> span, R -> segment
const RANK_CHAIN: u8 = 1; // S -> span C, R -> segment C
const RANK_CONCAT: u8 = 2; // S -> S S

#[derive(Debug, Clone, Copy)]
enum Bp {
    /// S -> whole-span leaf (n, k0 in the item's tie key).
    Leaf,
    /// S -> S S at split m.
    Concat { split: u32 },
    /// S -> Y C: prefix (n, k0, p) then C(n, s0) over [a+p, b).
    Chain { p: u32, s0: u32 },
    /// C -> S R at split m.
    GapThen { split: u32 },
    /// R -> segment covering the whole span.
    Segment,
    /// R -> segment of length p then C(n, u0) over [a+p, b).
    SegmentChain { p: u32, u0: u32 },
}

#[derive(Debug, Clone, Copy)]
struct Item {
    cost: u32,
    leaf_len: u32,
    leaf_n: u32,
    leaf_k0: u32,
    rank: u8,
    bp: Bp,
}

impl Item {
    fn key(&self) -> (u32, core::cmp::Reverse<u32>, u32, u32, u8) {
        (
            self.cost,
            core::cmp::Reverse(self.leaf_len),
            self.leaf_n,
            self.leaf_k0,
            self.rank,
        )
    }
}

fn consider(slot: &mut Option<Item>, cand: Item) {
    match slot {
        None => *slot = Some(cand),
        Some(cur) => {
            if cand.key() < cur.key() {
                *slot = Some(cand);
            }
        }
    }
}

/// Per-span lookup: best C item per neighbor with resumption at or beyond a
/// bound, answered in O(log) from sorted suffix minima.
struct CQuery {
    per_n: BTreeMap<u32, CSuffix>,
}

struct CSuffix {
    s0s: Vec<u32>,
    /// best_from[idx] = (cost, s0) minimal over s0s[idx..], ties to smaller s0.
    best_from: Vec<(u32, u32)>,
}

impl CQuery {
    fn build(map: &BTreeMap<(u32, u32), Item>) -> CQuery {
        let mut per_n: BTreeMap<u32, CSuffix> = BTreeMap::new();
        for (&(n, s0), item) in map {
            let e = per_n.entry(n).or_insert_with(|| CSuffix {
                s0s: Vec::new(),
                best_from: Vec::new(),
            });
            e.s0s.push(s0);
            e.best_from.push((item.cost, s0));
        }
        for suffix in per_n.values_mut() {
            for idx in (0..suffix.best_from.len().saturating_sub(1)).rev() {
                if suffix.best_from[idx + 1] < suffix.best_from[idx] {
                    suffix.best_from[idx] = suffix.best_from[idx + 1];
                }
            }
        }
        CQuery { per_n }
    }

    /// Best (cost, s0) with s0 >= min_s0 for neighbor n.
    fn best_at_or_after(&self, n: u32, min_s0: u32) -> Option<(u32, u32)> {
        let suffix = self.per_n.get(&n)?;
        let idx = suffix.s0s.partition_point(|&s0| s0 < min_s0);
        suffix.best_from.get(idx).copied()
    }
}

struct Chart {
    t: usize,
    s: Vec<Option<Item>>,
    c: Vec<BTreeMap<(u32, u32), Item>>,
    r: Vec<BTreeMap<(u32, u32), Item>>,
    c_query: Vec<Option<CQuery>>,
}

impl Chart {
    fn new(t: usize) -> Chart {
        let cells = (t + 1) * (t + 1);
        Chart {
            t,
            s: vec![None; cells],
            c: (0..cells).map(|_| BTreeMap::new()).collect(),
            r: (0..cells).map(|_| BTreeMap::new()).collect(),
            c_query: (0..cells).map(|_| None).collect(),
        }
    }

    fn idx(&self, a: usize, b: usize) -> usize {
        a * (self.t + 1) + b
    }
}

/// Parses the target against the expanded neighbor set, returning the
/// minimum number of splice actions and one minimal tree.
pub fn parse_min_cost(
    target: &TokenSequence,
    neighbors: &ExpandedNeighborSet,
) -> Result<ParseOutcome, ParseError> {
    let table = MatchTable::build(target.tokens(), neighbors);
    parse_with_table(target.tokens(), &table)
}

/// Parse against a prebuilt match table (must be built for this target).
pub fn parse_with_table(
    target: &[TokenId],
    table: &MatchTable,
) -> Result<ParseOutcome, ParseError> {
    let t = target.len();
    if t == 0 {
        return Err(ParseError::EmptyTarget);
    }
    for a in 0..t {
        if table.starts_at(a).is_empty() {
            return Err(ParseError::Unparseable {
                position: a,
                token: target[a],
            });
        }
    }

    let mut chart = Chart::new(t);
    let mut stats = ParseStats::default();

    for len in 1..=t {
        for a in 0..=t - len {
            let b = a + len;
            fill_span(&mut chart, table, a, b, &mut stats);
        }
        for a in 0..=t - len {
            let b = a + len;
            let idx = a * (t + 1) + b;
            if !chart.c[idx].is_empty() {
                chart.c_query[idx] = Some(CQuery::build(&chart.c[idx]));
            }
        }
    }

    stats.s_items = chart.s.iter().filter(|i| i.is_some()).count() as u64;
    stats.c_items = chart.c.iter().map(|m| m.len() as u64).sum();
    stats.r_items = chart.r.iter().map(|m| m.len() as u64).sum();

    let root = chart.s[chart.idx(0, t)].expect("coverage guarantees a parse");
    let tree = build_s(&chart, 0, t);
    debug_assert_eq!(tree.cost(), root.cost);

    Ok(ParseOutcome {
        cost: root.cost,
        tree,
        stats,
    })
}

fn fill_span(chart: &mut Chart, table: &MatchTable, a: usize, b: usize, stats: &mut ParseStats) {
    let len = (b - a) as u32;
    let idx = chart.idx(a, b);

    // R items first: they only look at strictly shorter C spans, and C items
    // of this same span consume R items of shorter spans, not these.
    let mut r_new: BTreeMap<(u32, u32), Item> = BTreeMap::new();
    for &(n, s0) in table.starts_at(a) {
        let ext = table.lce(n as usize, s0 as usize, a);
        let mut slot: Option<Item> = None;
        if ext >= len {
            stats.rule_applications += 1;
            consider(
                &mut slot,
                Item {
                    cost: 0,
                    leaf_len: len,
                    leaf_n: n,
                    leaf_k0: s0,
                    rank: RANK_PLAIN,
                    bp: Bp::Segment,
                },
            );
        }
        let max_p = ext.min(len.saturating_sub(2));
        for p in 1..=max_p {
            let tail = chart.idx(a + p as usize, b);
            if let Some(q) = &chart.c_query[tail] {
                if let Some((c_cost, u0)) = q.best_at_or_after(n, s0 + p) {
                    stats.rule_applications += 1;
                    consider(
                        &mut slot,
                        Item {
                            cost: c_cost,
                            leaf_len: p,
                            leaf_n: n,
                            leaf_k0: s0,
                            rank: RANK_CHAIN,
                            bp: Bp::SegmentChain { p, u0 },
                        },
                    );
                }
            }
        }
        if let Some(item) = slot {
            r_new.insert((n, s0), item);
        }
    }
    chart.r[idx] = r_new;

    // C items: S over [a, m) then R(n, s0) over [m, b).
    let mut c_new: BTreeMap<(u32, u32), Item> = BTreeMap::new();
    for m in a + 1..b {
        let left = match chart.s[chart.idx(a, m)] {
            Some(item) => item,
            None => continue,
        };
        for (&(n, s0), r_item) in &chart.r[chart.idx(m, b)] {
            stats.rule_applications += 1;
            let cand = Item {
                cost: left.cost + r_item.cost,
                leaf_len: left.leaf_len,
                leaf_n: left.leaf_n,
                leaf_k0: left.leaf_k0,
                rank: RANK_PLAIN,
                bp: Bp::GapThen { split: m as u32 },
            };
            let slot = c_new.entry((n, s0)).or_insert(cand);
            if cand.key() < slot.key() {
                *slot = cand;
            }
        }
    }
    chart.c[idx] = c_new;

    // S items.
    let mut slot: Option<Item> = None;
    if let Some(&(n, k0)) = table
        .starts_at(a)
        .iter()
        .find(|&&(n, k0)| table.lce(n as usize, k0 as usize, a) >= len)
    {
        stats.rule_applications += 1;
        consider(
            &mut slot,
            Item {
                cost: 1,
                leaf_len: len,
                leaf_n: n,
                leaf_k0: k0,
                rank: RANK_PLAIN,
                bp: Bp::Leaf,
            },
        );
    }
    // Span prefix plus continuation chain. Only the smallest k0 per (n, p)
    // is tried: the chain constraint s0 >= k0 + p is loosest there and the
    // tie-break prefers it anyway.
    for p in 1..=len.saturating_sub(2) {
        let tail = chart.idx(a + p as usize, b);
        let query = match &chart.c_query[tail] {
            Some(q) => q,
            None => continue,
        };
        for (&n, _) in query.per_n.iter() {
            if let Some(k0) = table.min_start(n as usize, a, p) {
                if let Some((c_cost, s0)) = query.best_at_or_after(n, k0 + p) {
                    stats.rule_applications += 1;
                    consider(
                        &mut slot,
                        Item {
                            cost: 1 + c_cost,
                            leaf_len: p,
                            leaf_n: n,
                            leaf_k0: k0,
                            rank: RANK_CHAIN,
                            bp: Bp::Chain { p, s0 },
                        },
                    );
                }
            }
        }
    }
    for m in a + 1..b {
        if let (Some(left), Some(right)) = (
            chart.s[chart.idx(a, m)],
            chart.s[chart.idx(m, b)],
        ) {
            stats.rule_applications += 1;
            consider(
                &mut slot,
                Item {
                    cost: left.cost + right.cost,
                    leaf_len: left.leaf_len,
                    leaf_n: left.leaf_n,
                    leaf_k0: left.leaf_k0,
                    rank: RANK_CONCAT,
                    bp: Bp::Concat { split: m as u32 },
                },
            );
        }
    }
    chart.s[idx] = slot;
}

fn build_s(chart: &Chart, a: usize, b: usize) -> ParseTree {
    let item = chart.s[chart.idx(a, b)].expect("item exists");
    let span = Span {
        start: a as u32,
        end: b as u32,
    };
    match item.bp {
        Bp::Leaf => ParseTree::Leaf {
            span,
            n: item.leaf_n,
            start: item.leaf_k0,
        },
        Bp::Concat { split } => ParseTree::Pair {
            span,
            left: Box::new(build_s(chart, a, split as usize)),
            right: Box::new(build_s(chart, split as usize, b)),
        },
        Bp::Chain { p, s0 } => ParseTree::Splice {
            span,
            n: item.leaf_n,
            start: item.leaf_k0,
            prefix_len: p,
            chain: build_chain(chart, a + p as usize, b, item.leaf_n, s0),
        },
        _ => unreachable!("S item with non-S backpointer"),
    }
}

fn build_chain(chart: &Chart, a: usize, b: usize, n: u32, s0: u32) -> Vec<ChainLink> {
    let c_item = chart.c[chart.idx(a, b)][&(n, s0)];
    let split = match c_item.bp {
        Bp::GapThen { split } => split as usize,
        _ => unreachable!("C item with non-C backpointer"),
    };
    let nested = build_s(chart, a, split);
    let r_item = chart.r[chart.idx(split, b)][&(n, s0)];
    match r_item.bp {
        Bp::Segment => vec![ChainLink {
            nested,
            seg_start: s0,
            seg_len: (b - split) as u32,
        }],
        Bp::SegmentChain { p, u0 } => {
            let mut links = vec![ChainLink {
                nested,
                seg_start: s0,
                seg_len: p,
            }];
            links.extend(build_chain(chart, split + p as usize, b, n, u0));
            links
        }
        _ => unreachable!("R item with non-R backpointer"),
    }
}
