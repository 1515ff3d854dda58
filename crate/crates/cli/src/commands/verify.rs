//! Cross-checks the chart parser against exhaustive search on seeded random
//! micro-instances. One JSONL line per instance on stdout; exit 0 only when
//! every instance agrees.

use std::io::Write;
use std::time::Instant;

use clap::Args;
use serde::Serialize;
use splice_core::{
    expand_neighbors, gen_micro_instance, min_actions_bruteforce_with, parse_min_cost,
    SearchConfig, SearchOutcome, TokenSequence,
};

use crate::errors::CliError;

#[derive(Debug, Args)]
pub struct VerifyArgs {
    /// Number of random instances to check.
    #[arg(long, default_value_t = 100)]
    pub instances: u64,
    /// Base seed; instance i uses seed + i.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Maximum target length per instance (1 to 8; exhaustive search does
    /// not scale past that).
    #[arg(long, default_value_t = 7)]
    pub max_len: usize,
    /// Disable the sound search prunings; much slower, pure enumeration.
    #[arg(long)]
    pub unpruned: bool,
}

#[derive(Serialize)]
struct InstanceLine<'a> {
    instance: u64,
    seed: u64,
    target: &'a [u32],
    neighbors: Vec<&'a [u32]>,
    parse_cost: u32,
    bruteforce_cost: Option<u32>,
    agree: bool,
}

pub fn run(args: &VerifyArgs) -> Result<(), CliError> {
    if args.max_len == 0 {
        return Err(CliError::data("--max-len must be at least 1"));
    }
    if args.max_len > 8 {
        return Err(CliError::data(
            "--max-len above 8 exceeds the exhaustive search budget",
        ));
    }
    if args.instances == 0 {
        return Err(CliError::data("--instances must be at least 1"));
    }

    let config = SearchConfig {
        pruned: !args.unpruned,
        ..SearchConfig::default()
    };
    let start = Instant::now();
    let stdout = std::io::stdout();
    let mut out = stdout.lock();
    let mut disagreements = 0u64;

    for i in 0..args.instances {
        let instance = gen_micro_instance(args.seed.wrapping_add(i), args.max_len);
        let retrieved: Vec<(TokenSequence, Option<String>)> = instance
            .retrieved
            .iter()
            .map(|seq| (seq.clone(), None))
            .collect();
        let expanded = expand_neighbors(&instance.target, &retrieved, &[]);
        let parse = parse_min_cost(&instance.target, &expanded).map_err(|e| {
            CliError::data(format!(
                "instance {i} (seed {}): parse failed: {e}",
                instance.seed
            ))
        })?;
        let outcome = min_actions_bruteforce_with(&instance.target, &expanded, parse.cost, &config)
            .map_err(|e| CliError::data(format!("instance {i} (seed {}): {e}", instance.seed)))?;
        let bruteforce_cost = match outcome {
            SearchOutcome::Exact(c) => Some(c),
            SearchOutcome::NotReachableWithinBound => None,
        };
        let agree = bruteforce_cost == Some(parse.cost);
        if !agree {
            disagreements += 1;
        }
        let line = InstanceLine {
            instance: i,
            seed: instance.seed,
            target: instance.target.tokens(),
            neighbors: instance.retrieved.iter().map(|s| s.tokens()).collect(),
            parse_cost: parse.cost,
            bruteforce_cost,
            agree,
        };
        let json = serde_json::to_string(&line).map_err(|e| CliError::data(e.to_string()))?;
        writeln!(out, "{json}")?;
    }

    let agreed = args.instances - disagreements;
    eprintln!(
        "checked {} instances in {:.1}s: {agreed} agree, {disagreements} disagree",
        args.instances,
        start.elapsed().as_secs_f64()
    );
    if disagreements > 0 {
        return Err(CliError::verify(format!(
            "{disagreements} of {} instances disagree with exhaustive search",
            args.instances
        )));
    }
    Ok(())
}
