//! Shared helpers for the integration suites: binary invocation and a
//! deterministic synthetic corpus generator.

use std::ffi::OsStr;
use std::path::{Path, PathBuf};
use std::process::{Command, Output};
use std::sync::OnceLock;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

pub fn splice_cmd() -> Command {
    Command::new(env!("CARGO_BIN_EXE_splice"))
}

pub fn run_splice<I, S>(args: I) -> Output
where
    I: IntoIterator<Item = S>,
    S: AsRef<OsStr>,
{
    splice_cmd().args(args).output().expect("spawn splice binary")
}

pub fn assert_ok(out: &Output, what: &str) {
    assert!(
        out.status.success(),
        "{what} exited with {:?}\n--- stdout ---\n{}--- stderr ---\n{}",
        out.status.code(),
        String::from_utf8_lossy(&out.stdout),
        String::from_utf8_lossy(&out.stderr),
    );
}

const WORD_TYPES: usize = 60;
const PHRASE_POOL: usize = 40;
const FIELD_POOL: [&str; 6] = ["name", "born", "team", "genre", "country", "label"];

fn phrase_pool(rng: &mut ChaCha8Rng) -> Vec<Vec<String>> {
    (0..PHRASE_POOL)
        .map(|_| {
            let len = rng.gen_range(2..=6);
            (0..len)
                .map(|_| format!("w{}", rng.gen_range(0..WORD_TYPES)))
                .collect()
        })
        .collect()
}

/// One synthetic example per requested target length. Targets are stitched
/// from a corpus-wide phrase pool so different examples share multi-token
/// spans, and each source table quotes contiguous chunks of its own target.
pub fn write_synthetic_corpus_with_lengths(path: &Path, lengths: &[usize], seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let phrases = phrase_pool(&mut rng);
    let mut out = String::new();
    for (idx, &target_len) in lengths.iter().enumerate() {
        assert!(target_len >= 1, "synthetic targets cannot be empty");
        let mut words: Vec<String> = Vec::new();
        while words.len() < target_len {
            words.extend(phrases[rng.gen_range(0..phrases.len())].iter().cloned());
        }
        words.truncate(target_len);
        let pair_count = rng.gen_range(1..=4);
        let mut pairs = Vec::new();
        for _ in 0..pair_count {
            let field = FIELD_POOL[rng.gen_range(0..FIELD_POOL.len())];
            let vlen = rng.gen_range(1..=3.min(words.len()));
            let start = rng.gen_range(0..=words.len() - vlen);
            pairs.push(serde_json::json!([field, words[start..start + vlen].join(" ")]));
        }
        let record = serde_json::json!({
            "id": format!("ex{idx:04}"),
            "source": pairs,
            "target": words.join(" "),
        });
        out.push_str(&record.to_string());
        out.push('\n');
    }
    std::fs::write(path, out).expect("write synthetic corpus");
}

/// `examples` synthetic records with target lengths drawn uniformly from
/// 1..=40 tokens.
pub fn write_synthetic_corpus(path: &Path, examples: usize, seed: u64) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0x9e37_79b9);
    let lengths: Vec<usize> = (0..examples).map(|_| rng.gen_range(1..=40)).collect();
    write_synthetic_corpus_with_lengths(path, &lengths, seed);
}

// Not every test binary that compiles this module touches the fixture.
#[allow(dead_code)]
pub struct Fixture {
    _dir: tempfile::TempDir,
    pub raw: PathBuf,
    pub retrieved: PathBuf,
    pub derived: PathBuf,
}

/// 1,000 synthetic examples (targets 1..=40 tokens) carried through
/// `retrieve --k 20` and `derive --policy all --pad`, built once per test
/// binary and shared by every test that reads it.
#[allow(dead_code)]
pub fn derived_fixture() -> &'static Fixture {
    static FIXTURE: OnceLock<Fixture> = OnceLock::new();
    FIXTURE.get_or_init(|| {
        let dir = tempfile::tempdir().expect("create fixture dir");
        let raw = dir.path().join("corpus.jsonl");
        write_synthetic_corpus(&raw, 1000, 42);
        let retrieved = dir.path().join("retrieved.jsonl");
        let out = run_splice([
            OsStr::new("retrieve"),
            raw.as_os_str(),
            retrieved.as_os_str(),
            OsStr::new("--k"),
            OsStr::new("20"),
        ]);
        assert_ok(&out, "retrieve over the 1,000-example corpus");
        let derived = dir.path().join("derived.jsonl");
        let out = run_splice([
            OsStr::new("derive"),
            retrieved.as_os_str(),
            derived.as_os_str(),
            OsStr::new("--policy"),
            OsStr::new("all"),
            OsStr::new("--pad"),
        ]);
        assert_ok(&out, "derive --policy all over the 1,000-example corpus");
        Fixture {
            _dir: dir,
            raw,
            retrieved,
            derived,
        }
    })
}
