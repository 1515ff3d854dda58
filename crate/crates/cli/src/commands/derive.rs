//! Computes oracle derivations for every example and attaches them to the
//! corpus. Each derivation is replay-verified in-process before it is
//! written out.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use clap::Args;
use rayon::prelude::*;
use splice_core::{
    expand_neighbors, extract_actions, extract_source_spans, mask_pmi, mask_source_overlap,
    oracle_l2rs, oracle_l2rt, parse_min_cost, source_runs, stopword_ids, verify_derivation,
    whitespace_tokenize, OracleError, ParseError, PmiTable, TokenId, TokenSequence, Vocab,
    DEFAULT_PMI_MIN_COUNT, DEFAULT_PMI_TAU,
};

use crate::errors::CliError;
use crate::schema::{
    build_vocab, id_index, read_corpus, write_corpus, DerivationRecord, ExampleRecord,
    SourceField, StopwordSet,
};

#[derive(Debug, Args)]
pub struct DeriveArgs {
    /// Input corpus with neighbor lists attached.
    pub corpus_in: PathBuf,
    /// Output corpus with derivations attached.
    pub corpus_out: PathBuf,
    /// Oracle to run; `all` computes full, l2rs, and l2rt and checks their
    /// cost ordering.
    #[arg(long, value_parser = ["full", "l2rs", "l2rt", "all"], default_value = "full")]
    pub policy: String,
    /// Wrap targets and neighbor sequences in sentinel tokens first.
    #[arg(long)]
    pub pad: bool,
    /// Mask neighbor spans that also appear in the neighbor's own source,
    /// unless every token is a stopword.
    #[arg(long)]
    pub mask: bool,
    /// Mask neighbor tokens with high PMI against the neighbor's source.
    #[arg(long)]
    pub mask_pmi: bool,
    /// PMI threshold (natural log) above which a token is masked.
    #[arg(long, default_value_t = DEFAULT_PMI_TAU)]
    pub pmi_tau: f64,
    /// Minimum corpus count before a token is eligible for PMI masking.
    #[arg(long, default_value_t = DEFAULT_PMI_MIN_COUNT)]
    pub pmi_min_count: u32,
    /// Stopword file, one word per line; the built-in English list applies
    /// when absent.
    #[arg(long)]
    pub stopwords: Option<PathBuf>,
    /// Worker threads across the corpus; 0 or absent uses all logical cores.
    #[arg(long)]
    pub jobs: Option<usize>,
    /// Record per-example parse wall time in the output. Timed outputs vary
    /// run to run; leave off when byte-identical reruns matter.
    #[arg(long)]
    pub timings: bool,
    /// Keep original casing when tokenizing.
    #[arg(long)]
    pub keep_case: bool,
}

/// Per-record token material, precomputed sequentially so the parallel
/// phase shares it immutably.
struct Prepared {
    target_raw: Vec<TokenId>,
    source_spans: Vec<(TokenSequence, Option<String>)>,
    /// One `field value` token run per pair; masking never crosses a run.
    runs: Vec<Vec<TokenId>>,
    source_tokens: Vec<TokenId>,
}

fn prepare(
    record: &ExampleRecord,
    vocab: &mut Vocab,
    lowercase: bool,
    pad: bool,
) -> Prepared {
    let target_raw = vocab.intern_all(&whitespace_tokenize(&record.target, lowercase));
    match &record.source {
        SourceField::Pairs(pairs) => {
            let source_spans = extract_source_spans(pairs, vocab, lowercase, pad);
            let runs = source_runs(pairs, vocab, lowercase);
            let source_tokens = runs.concat();
            Prepared {
                target_raw,
                source_spans,
                runs,
                source_tokens,
            }
        }
        SourceField::Raw(tokens) => {
            // No field structure: the whole linearization is one span and
            // one masking run.
            let mut texts = Vec::new();
            for token in tokens {
                texts.extend(whitespace_tokenize(token, lowercase));
            }
            let ids = vocab.intern_all(&texts);
            let seq = TokenSequence::new(ids.clone());
            let seq = if pad {
                seq.pad().expect("fresh sequence is unpadded")
            } else {
                seq
            };
            Prepared {
                target_raw: target_raw.clone(),
                source_spans: if ids.is_empty() {
                    Vec::new()
                } else {
                    vec![(seq, None)]
                },
                runs: vec![ids.clone()],
                source_tokens: ids,
            }
        }
    }
}

fn load_stopwords(
    vocab: &mut Vocab,
    path: Option<&Path>,
    lowercase: bool,
) -> Result<StopwordSet, CliError> {
    match path {
        None => Ok(stopword_ids(vocab)),
        Some(path) => {
            let text = std::fs::read_to_string(path).map_err(|e| {
                CliError::data(format!("cannot read stopwords {}: {e}", path.display()))
            })?;
            let mut set = StopwordSet::new();
            for line in text.lines() {
                for word in whitespace_tokenize(line, lowercase) {
                    set.insert(vocab.intern(&word));
                }
            }
            if set.is_empty() {
                return Err(CliError::data(format!(
                    "stopword file {} is empty",
                    path.display()
                )));
            }
            Ok(set)
        }
    }
}

fn parse_failure(id: &str, e: ParseError) -> CliError {
    match e {
        ParseError::EmptyTarget => CliError::data(format!(
            "example {id:?}: target is empty; derive with --pad to cover empty targets"
        )),
        ParseError::Unparseable { position, token } => CliError::data(format!(
            "example {id:?}: target position {position} (token id {token}) has no covering span; \
             the neighbor expansion is corrupt"
        )),
    }
}

fn oracle_failure(id: &str, policy: &str, e: OracleError) -> CliError {
    match e {
        OracleError::Parse(p) => parse_failure(id, p),
        OracleError::Extract(x) => CliError::verify(format!(
            "example {id:?}: {policy} oracle produced an invalid derivation: {}",
            x.detail
        )),
    }
}

struct DeriveContext<'a> {
    records: &'a [ExampleRecord],
    prepared: &'a [Prepared],
    index: BTreeMap<&'a str, usize>,
    stopwords: StopwordSet,
    pmi: Option<PmiTable>,
    policies: Vec<&'static str>,
}

fn derive_one(
    ctx: &DeriveContext<'_>,
    args: &DeriveArgs,
    i: usize,
) -> Result<BTreeMap<String, DerivationRecord>, CliError> {
    let record = &ctx.records[i];
    let prep = &ctx.prepared[i];
    let target = TokenSequence::new(prep.target_raw.clone());
    let target = if args.pad {
        target.pad().expect("fresh sequence is unpadded")
    } else {
        target
    };

    let Some(neighbor_list) = &record.neighbors else {
        return Err(CliError::data(format!(
            "example {:?} has no neighbor list; run retrieve first",
            record.id
        )));
    };
    let mut retrieved: Vec<(TokenSequence, Option<String>)> = Vec::new();
    for (nbr_id, _distance) in neighbor_list {
        if *nbr_id == record.id {
            continue; // a prototype list may contain the example itself
        }
        let &idx = ctx.index.get(nbr_id.as_str()).ok_or_else(|| {
            CliError::data(format!(
                "example {:?} references unknown neighbor {nbr_id:?}",
                record.id
            ))
        })?;
        let nbr = &ctx.prepared[idx];
        let mut material = nbr.target_raw.clone();
        if args.mask {
            material = mask_source_overlap(&material, &nbr.runs, &ctx.stopwords);
        }
        if args.mask_pmi {
            let pmi = ctx.pmi.as_ref().expect("PMI table built when --mask-pmi");
            material = mask_pmi(
                &material,
                &nbr.source_tokens,
                pmi,
                args.pmi_tau,
                args.pmi_min_count,
            );
        }
        let seq = TokenSequence::new(material);
        let seq = if args.pad {
            seq.pad().expect("fresh sequence is unpadded")
        } else {
            seq
        };
        retrieved.push((seq, Some(nbr_id.clone())));
    }

    let expanded = expand_neighbors(&target, &retrieved, &prep.source_spans);
    let mut out = BTreeMap::new();
    for &policy in &ctx.policies {
        let (derivation, parse_ms) = match policy {
            "full" => {
                let start = Instant::now();
                let parse =
                    parse_min_cost(&target, &expanded).map_err(|e| parse_failure(&record.id, e))?;
                let elapsed_ms = start.elapsed().as_secs_f64() * 1e3;
                let derivation = extract_actions(&parse.tree, &target, &expanded).map_err(|e| {
                    CliError::verify(format!(
                        "example {:?}: extraction failed: {}",
                        record.id, e.detail
                    ))
                })?;
                (derivation, args.timings.then_some(elapsed_ms))
            }
            "l2rs" => (
                oracle_l2rs(&target, &expanded)
                    .map_err(|e| oracle_failure(&record.id, "l2rs", e))?,
                None,
            ),
            "l2rt" => (
                oracle_l2rt(&target, &expanded)
                    .map_err(|e| oracle_failure(&record.id, "l2rt", e))?,
                None,
            ),
            other => unreachable!("policy {other} rejected at argument parse time"),
        };
        if !verify_derivation(&derivation, &target, &expanded) {
            return Err(CliError::verify(format!(
                "example {:?}: {policy} derivation does not replay to the target",
                record.id
            )));
        }
        out.insert(
            policy.to_string(),
            DerivationRecord::from_core(&derivation, &target, &expanded, parse_ms),
        );
    }

    if ctx.policies.len() == 3 {
        check_policy_ordering(&record.id, &out, target.len())?;
    }
    Ok(out)
}

fn check_policy_ordering(
    id: &str,
    out: &BTreeMap<String, DerivationRecord>,
    target_len: usize,
) -> Result<(), CliError> {
    let full = out["full"].cost;
    let l2rs = out["l2rs"].cost;
    let l2rt = out["l2rt"].cost;
    if !(full <= l2rs && l2rs <= l2rt) {
        return Err(CliError::verify(format!(
            "example {id:?}: cost ordering violated (full={full}, l2rs={l2rs}, l2rt={l2rt})"
        )));
    }
    if l2rt as usize != target_len {
        return Err(CliError::verify(format!(
            "example {id:?}: l2rt cost {l2rt} differs from target length {target_len}"
        )));
    }
    Ok(())
}

pub fn run(args: &DeriveArgs) -> Result<(), CliError> {
    let mut records = read_corpus(&args.corpus_in)?;
    let lowercase = !args.keep_case;
    let mut vocab = build_vocab(&records, lowercase);

    let stopwords = if args.mask {
        load_stopwords(&mut vocab, args.stopwords.as_deref(), lowercase)?
    } else {
        StopwordSet::new()
    };

    let prepared: Vec<Prepared> = records
        .iter()
        .map(|r| prepare(r, &mut vocab, lowercase, args.pad))
        .collect();

    let pmi = if args.mask_pmi {
        let pairs: Vec<(&[TokenId], &[TokenId])> = prepared
            .iter()
            .map(|p| (p.source_tokens.as_slice(), p.target_raw.as_slice()))
            .collect();
        Some(PmiTable::build(pairs))
    } else {
        None
    };

    let policies: Vec<&'static str> = match args.policy.as_str() {
        "all" => vec!["full", "l2rs", "l2rt"],
        "full" => vec!["full"],
        "l2rs" => vec!["l2rs"],
        "l2rt" => vec!["l2rt"],
        other => return Err(CliError::data(format!("unknown policy {other:?}"))),
    };

    let ctx = DeriveContext {
        records: &records,
        prepared: &prepared,
        index: id_index(&records),
        stopwords,
        pmi,
        policies,
    };

    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(args.jobs.unwrap_or(0))
        .build()
        .map_err(|e| CliError::data(format!("cannot build worker pool: {e}")))?;
    let results: Result<Vec<BTreeMap<String, DerivationRecord>>, CliError> = pool.install(|| {
        (0..records.len())
            .into_par_iter()
            .map(|i| derive_one(&ctx, args, i))
            .collect()
    });
    let results = results?;
    let policy_names = ctx.policies.join(", ");
    drop(ctx);

    let derived = results.len();
    for (record, result) in records.iter_mut().zip(results) {
        record
            .derivations
            .get_or_insert_with(BTreeMap::new)
            .extend(result);
    }
    write_corpus(&args.corpus_out, &records)?;
    eprintln!("derived {policy_names} for {derived} examples");
    Ok(())
}
