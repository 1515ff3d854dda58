//! End-to-end acceptance checks. One test per acceptance criterion; the
//! harness result line for each test is the per-criterion pass/fail report.

mod common;

use std::collections::BTreeSet;
use std::ffi::OsStr;
use std::time::{Duration, Instant};

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use common::{
    assert_ok, derived_fixture, run_splice, write_synthetic_corpus,
    write_synthetic_corpus_with_lengths,
};
use splice_cli::schema::{read_corpus, DerivationRecord, ExampleRecord};
use splice_core::{
    check_non_interleaving, expand_neighbors, gen_micro_instance, kmeans_prototypes,
    min_spans_l2rs_dp, oracle_l2rs, parse_min_cost, replay, table_distance, token_checksum,
    ExpandedNeighborSet, TableSource, TokenSequence,
};

const POLICIES: [&str; 3] = ["full", "l2rs", "l2rt"];

fn derivation<'a>(rec: &'a ExampleRecord, policy: &str) -> &'a DerivationRecord {
    rec.derivations
        .as_ref()
        .and_then(|d| d.get(policy))
        .unwrap_or_else(|| panic!("{}: missing {policy} derivation", rec.id))
}

/// Parser agrees with exhaustive search on 500 seeded micro-instances
/// (vocabulary of at most 5 word types, targets of at most 7 tokens, at most
/// 3 neighbors of at most 6 tokens), inside a 120 second budget.
#[test]
fn criterion_01_parse_cost_matches_exhaustive_search() {
    let start = Instant::now();
    let out = run_splice(["verify", "--instances", "500", "--seed", "1", "--max-len", "7"]);
    let elapsed = start.elapsed();
    assert_ok(&out, "verify --instances 500");
    let stdout = String::from_utf8(out.stdout).expect("verify emits UTF-8");
    let mut checked = 0usize;
    for line in stdout.lines() {
        let v: serde_json::Value = serde_json::from_str(line).expect("verify emits JSONL");
        assert_eq!(v["agree"], serde_json::Value::Bool(true), "disagreement: {line}");
        let target = v["target"].as_array().expect("target array");
        assert!(target.len() <= 7, "target too long: {line}");
        let neighbors = v["neighbors"].as_array().expect("neighbors array");
        assert!(neighbors.len() <= 3, "too many neighbors: {line}");
        let mut types: BTreeSet<u64> = BTreeSet::new();
        for tok in target {
            types.insert(tok.as_u64().expect("token id"));
        }
        for n in neighbors {
            let n = n.as_array().expect("neighbor array");
            assert!(n.len() <= 6, "neighbor too long: {line}");
            for tok in n {
                types.insert(tok.as_u64().expect("token id"));
            }
        }
        assert!(types.len() <= 5, "vocabulary too large: {line}");
        checked += 1;
    }
    assert_eq!(checked, 500, "expected one line per instance");
    assert!(
        elapsed < Duration::from_secs(120),
        "verification took {elapsed:?}, budget is 120s"
    );
}

/// Every stored derivation of every policy on the 1,000-example corpus
/// replays to exactly the stored target, and its action count equals its
/// recorded cost.
#[test]
fn criterion_02_derivations_replay_exactly() {
    let fixture = derived_fixture();
    let records = read_corpus(&fixture.derived).expect("read derived corpus");
    assert_eq!(records.len(), 1000);
    assert!(
        records
            .iter()
            .any(|r| r.neighbors.as_ref().is_some_and(|n| n.len() == 20)),
        "fixture should retrieve 20 neighbors per example"
    );
    let mut replayed = 0usize;
    for rec in &records {
        for policy in POLICIES {
            let dr = derivation(rec, policy);
            assert_eq!(
                dr.actions.len() as u32,
                dr.cost,
                "{}/{policy}: action count differs from cost",
                rec.id
            );
            let (actions, seqs) = dr.to_core().expect("decode stored actions");
            let (canvas, _) = replay(&actions, &seqs)
                .unwrap_or_else(|e| panic!("{}/{policy}: replay failed: {e:?}", rec.id));
            assert_eq!(
                canvas.tokens(),
                &dr.target[..],
                "{}/{policy}: replay diverged from the stored target",
                rec.id
            );
            assert!(
                dr.checksum_consistent() && token_checksum(canvas.tokens()) == dr.checksum,
                "{}/{policy}: checksum mismatch",
                rec.id
            );
            replayed += 1;
        }
    }
    assert_eq!(replayed, 3000);
}

/// cost(full) <= cost(l2rs) <= cost(l2rt), and the one-token policy uses
/// exactly one action per padded target token, on every example.
#[test]
fn criterion_03_policy_cost_ordering_holds_corpus_wide() {
    let fixture = derived_fixture();
    let records = read_corpus(&fixture.derived).expect("read derived corpus");
    for rec in &records {
        let full = derivation(rec, "full");
        let l2rs = derivation(rec, "l2rs");
        let l2rt = derivation(rec, "l2rt");
        assert!(
            full.cost <= l2rs.cost,
            "{}: full {} > l2rs {}",
            rec.id,
            full.cost,
            l2rs.cost
        );
        assert!(
            l2rs.cost <= l2rt.cost,
            "{}: l2rs {} > l2rt {}",
            rec.id,
            l2rs.cost,
            l2rt.cost
        );
        assert_eq!(
            l2rt.cost as usize,
            l2rt.target.len(),
            "{}: l2rt must spend one action per padded target token",
            rec.id
        );
    }
    let stats = run_splice([OsStr::new("stats"), fixture.derived.as_os_str()]);
    assert_ok(&stats, "stats over the derived corpus");
    let stdout = String::from_utf8(stats.stdout).expect("stats emits UTF-8");
    assert!(
        stdout.contains("cost ordering"),
        "stats must report the ordering check:\n{stdout}"
    );
}

/// The greedy left-to-right span policy is optimal: its span count equals
/// the dynamic-programming minimum on the 500 micro-instances and on every
/// example of the 1,000-example corpus.
#[test]
fn criterion_04_greedy_span_count_is_optimal() {
    for i in 0..500u64 {
        let inst = gen_micro_instance(1 + i, 7);
        let retrieved: Vec<(TokenSequence, Option<String>)> =
            inst.retrieved.iter().map(|s| (s.clone(), None)).collect();
        let expanded = expand_neighbors(&inst.target, &retrieved, &[]);
        let greedy = oracle_l2rs(&inst.target, &expanded).expect("greedy policy");
        let optimal = min_spans_l2rs_dp(&inst.target, &expanded).expect("span minimum");
        assert_eq!(
            greedy.cost, optimal,
            "seed {}: greedy used {} spans, the minimum is {}",
            inst.seed, greedy.cost, optimal
        );
    }
    let fixture = derived_fixture();
    let records = read_corpus(&fixture.derived).expect("read derived corpus");
    for rec in &records {
        let dr = derivation(rec, "l2rs");
        let target = TokenSequence::new(dr.target.clone());
        let seqs: Vec<TokenSequence> = dr
            .manifest
            .iter()
            .map(|e| TokenSequence::new(e.tokens.clone()))
            .collect();
        let expanded = ExpandedNeighborSet::from_sequences(seqs);
        let optimal = min_spans_l2rs_dp(&target, &expanded).expect("span minimum");
        assert_eq!(
            dr.cost, optimal,
            "{}: stored greedy cost {} differs from the span minimum {}",
            rec.id, dr.cost, optimal
        );
    }
}

/// Every replayed derivation on the 1,000-example corpus yields a provenance
/// trace with no interleaved neighbor segments.
#[test]
fn criterion_05_provenance_traces_never_interleave() {
    let fixture = derived_fixture();
    let records = read_corpus(&fixture.derived).expect("read derived corpus");
    for rec in &records {
        for policy in POLICIES {
            let dr = derivation(rec, policy);
            let (actions, seqs) = dr.to_core().expect("decode stored actions");
            let (_, trace) = replay(&actions, &seqs)
                .unwrap_or_else(|e| panic!("{}/{policy}: replay failed: {e:?}", rec.id));
            assert!(
                check_non_interleaving(&trace),
                "{}/{policy}: interleaved provenance trace",
                rec.id
            );
        }
    }
}

/// Adding the target itself as a neighbor makes the minimum cost exactly 1,
/// and adding any neighbor never increases the minimum cost (200 seeded
/// augmentation trials).
#[test]
fn criterion_06_self_neighbor_costs_one_and_augmentation_never_hurts() {
    let mut rng = ChaCha8Rng::seed_from_u64(0x6a75);
    for trial in 0..200u64 {
        let inst = gen_micro_instance(trial, 7);
        let base: Vec<(TokenSequence, Option<String>)> =
            inst.retrieved.iter().map(|s| (s.clone(), None)).collect();
        let baseline = parse_min_cost(&inst.target, &expand_neighbors(&inst.target, &base, &[]))
            .expect("baseline parse")
            .cost;

        let mut with_self = base.clone();
        with_self.push((inst.target.clone(), None));
        let self_cost =
            parse_min_cost(&inst.target, &expand_neighbors(&inst.target, &with_self, &[]))
                .expect("self-neighbor parse")
                .cost;
        assert_eq!(self_cost, 1, "trial {trial}: copying the target wholesale");

        let extra_len = rng.gen_range(1..=6);
        let extra =
            TokenSequence::new((0..extra_len).map(|_| 10 + rng.gen_range(0..5u32)).collect());
        let mut with_extra = base.clone();
        with_extra.push((extra, None));
        let augmented =
            parse_min_cost(&inst.target, &expand_neighbors(&inst.target, &with_extra, &[]))
                .expect("augmented parse")
                .cost;
        assert!(
            augmented <= baseline,
            "trial {trial}: cost rose from {baseline} to {augmented} after adding a neighbor"
        );
    }
}

/// Table distance is symmetric, bounded to [0, 1.1], zero between identical
/// non-empty tables (1,000 random pairs), and the two-field versus one-field
/// worked example lands on 0.4333 to four decimals.
#[test]
fn criterion_07_table_distance_is_a_bounded_semimetric() {
    const FIELDS: [&str; 8] = [
        "name", "born", "died", "team", "genre", "country", "label", "role",
    ];
    const WORDS: [&str; 12] = [
        "ada", "grace", "alan", "1815", "1906", "1912", "london", "york", "jazz", "blues",
        "red", "blue",
    ];
    let mut rng = ChaCha8Rng::seed_from_u64(0x7ab1e);
    let random_table = |rng: &mut ChaCha8Rng| {
        let pairs: Vec<(String, String)> = (0..rng.gen_range(0..=5))
            .map(|_| {
                let field = FIELDS[rng.gen_range(0..FIELDS.len())].to_string();
                let value = (0..rng.gen_range(0..=3))
                    .map(|_| WORDS[rng.gen_range(0..WORDS.len())])
                    .collect::<Vec<_>>()
                    .join(" ");
                (field, value)
            })
            .collect();
        (TableSource::from_pairs(&pairs), pairs.is_empty())
    };
    for pair in 0..1000 {
        let (a, a_empty) = random_table(&mut rng);
        let (b, _) = random_table(&mut rng);
        let ab = table_distance(&a, &b);
        let ba = table_distance(&b, &a);
        assert_eq!(ab, ba, "pair {pair}: distance is not symmetric");
        assert!(
            (-1e-12..=1.1 + 1e-12).contains(&ab),
            "pair {pair}: distance {ab} out of range"
        );
        if !a_empty {
            assert!(
                table_distance(&a, &a).abs() < 1e-12,
                "pair {pair}: identical non-empty tables must be at distance zero"
            );
        }
    }
    let two_fields = TableSource::from_pairs(&[("name", "grace hopper"), ("born", "1906")]);
    let one_field = TableSource::from_pairs(&[("name", "alan turing")]);
    let d = table_distance(&two_fields, &one_field);
    assert!(
        (d - 0.4333).abs() < 5e-5,
        "worked example: expected 0.4333 to four decimals, got {d}"
    );
}

/// A single 40-token, 20-neighbor parse stays under two seconds, and the
/// stats report records the parse-time factor across doubled target lengths.
#[test]
fn criterion_08_parse_time_within_budget_and_scaling_reported() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let word = |rng: &mut ChaCha8Rng| 3 + rng.gen_range(0..60u32);
    let target = TokenSequence::new((0..40).map(|_| word(&mut rng)).collect());
    let retrieved: Vec<(TokenSequence, Option<String>)> = (0..20)
        .map(|_| {
            let len = rng.gen_range(30..=40);
            let mut toks = Vec::with_capacity(len);
            for t in 0..len {
                // half the tokens copy the target so long matches exist
                if t % 2 == 0 && t < 40 {
                    toks.push(target.tokens()[t]);
                } else {
                    toks.push(word(&mut rng));
                }
            }
            (TokenSequence::new(toks), None)
        })
        .collect();
    let expanded = expand_neighbors(&target, &retrieved, &[]);
    let start = Instant::now();
    let outcome = parse_min_cost(&target, &expanded).expect("parse the 40-token target");
    let elapsed = start.elapsed();
    assert!(outcome.cost >= 1);
    assert!(
        elapsed < Duration::from_secs(2),
        "T=40, N=20 parse took {elapsed:?}, budget is 2s"
    );

    let dir = tempfile::tempdir().expect("create timing dir");
    let corpus = dir.path().join("timing.jsonl");
    let mut lengths = Vec::new();
    for len in [10usize, 20, 40] {
        lengths.extend(std::iter::repeat(len).take(20));
    }
    write_synthetic_corpus_with_lengths(&corpus, &lengths, 8);
    let retrieved_path = dir.path().join("retrieved.jsonl");
    assert_ok(
        &run_splice([
            OsStr::new("retrieve"),
            corpus.as_os_str(),
            retrieved_path.as_os_str(),
            OsStr::new("--k"),
            OsStr::new("10"),
        ]),
        "retrieve over the timing corpus",
    );
    let derived = dir.path().join("derived.jsonl");
    assert_ok(
        &run_splice([
            OsStr::new("derive"),
            retrieved_path.as_os_str(),
            derived.as_os_str(),
            OsStr::new("--policy"),
            OsStr::new("full"),
            OsStr::new("--timings"),
        ]),
        "derive --timings over the timing corpus",
    );
    let stats = run_splice([OsStr::new("stats"), derived.as_os_str()]);
    assert_ok(&stats, "stats over the timing corpus");
    let stdout = String::from_utf8(stats.stdout).expect("stats emits UTF-8");
    assert!(
        stdout.contains("doubling T=10 -> 20:") && stdout.contains("doubling T=20 -> 40:"),
        "stats must report per-pair doubling factors:\n{stdout}"
    );
    assert!(
        stdout.contains("median doubling factor:"),
        "stats must report the median doubling factor:\n{stdout}"
    );
}

/// On a fixture of three planted clusters, k-means returns one prototype id
/// from each cluster for at least 95 of 100 seeds.
#[test]
fn criterion_09_kmeans_recovers_planted_clusters() {
    let mut data = Vec::new();
    for (cx, cy) in [(1.0, 1.0), (10.0, 1.0), (1.0, 10.0)] {
        for _ in 0..4 {
            data.push(vec![cx, cy]);
        }
    }
    let mut hits = 0usize;
    for seed in 0..100u64 {
        let idx = kmeans_prototypes(&data, 3, 100, seed).expect("kmeans");
        assert_eq!(idx.len(), 3);
        let clusters: BTreeSet<usize> = idx.iter().map(|&i| i / 4).collect();
        if clusters.len() == 3 {
            hits += 1;
        }
    }
    assert!(
        hits >= 95,
        "recovered one prototype per planted cluster on only {hits}/100 seeds"
    );
}

/// Two seeded runs of retrieve, derive with masking, and stats produce
/// byte-identical corpora and byte-identical reports.
#[test]
fn criterion_10_pipeline_reruns_are_byte_identical() {
    let dir = tempfile::tempdir().expect("create pipeline dir");
    let input = dir.path().join("corpus.jsonl");
    write_synthetic_corpus(&input, 120, 7);
    let run_pipeline = |tag: &str| -> (Vec<u8>, Vec<u8>, Vec<u8>) {
        let retrieved = dir.path().join(format!("{tag}_retrieved.jsonl"));
        let derived = dir.path().join(format!("{tag}_derived.jsonl"));
        assert_ok(
            &run_splice([
                OsStr::new("retrieve"),
                input.as_os_str(),
                retrieved.as_os_str(),
                OsStr::new("--k"),
                OsStr::new("10"),
                OsStr::new("--seed"),
                OsStr::new("5"),
            ]),
            "pipeline retrieve",
        );
        assert_ok(
            &run_splice([
                OsStr::new("derive"),
                retrieved.as_os_str(),
                derived.as_os_str(),
                OsStr::new("--policy"),
                OsStr::new("all"),
                OsStr::new("--pad"),
                OsStr::new("--mask"),
                OsStr::new("--jobs"),
                OsStr::new("2"),
            ]),
            "pipeline derive",
        );
        let stats = run_splice([OsStr::new("stats"), derived.as_os_str()]);
        assert_ok(&stats, "pipeline stats");
        (
            std::fs::read(&retrieved).expect("read retrieved"),
            std::fs::read(&derived).expect("read derived"),
            stats.stdout,
        )
    };
    let first = run_pipeline("a");
    let second = run_pipeline("b");
    assert_eq!(first.0, second.0, "retrieve outputs differ between runs");
    assert_eq!(first.1, second.1, "derive outputs differ between runs");
    assert_eq!(first.2, second.2, "stats reports differ between runs");
}
