//! Per-policy action-count statistics and the parse-time scaling report.

use std::collections::BTreeMap;
use std::io::Write;
use std::path::PathBuf;

use clap::Args;

use crate::errors::CliError;
use crate::schema::read_corpus;

#[derive(Debug, Args)]
pub struct StatsArgs {
    /// Corpus with derivations attached.
    pub corpus_in: PathBuf,
}

fn mean(values: &[u32]) -> f64 {
    values.iter().map(|&v| v as f64).sum::<f64>() / values.len() as f64
}

fn median_u32(sorted: &[u32]) -> f64 {
    let n = sorted.len();
    if n % 2 == 1 {
        sorted[n / 2] as f64
    } else {
        (sorted[n / 2 - 1] as f64 + sorted[n / 2] as f64) / 2.0
    }
}

fn median_f64(values: &mut [f64]) -> f64 {
    values.sort_by(f64::total_cmp);
    let n = values.len();
    if n % 2 == 1 {
        values[n / 2]
    } else {
        (values[n / 2 - 1] + values[n / 2]) / 2.0
    }
}

pub fn run(args: &StatsArgs) -> Result<(), CliError> {
    let records = read_corpus(&args.corpus_in)?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();

    let mut costs: BTreeMap<&str, Vec<u32>> = BTreeMap::new();
    let mut with_derivations = 0usize;
    let mut parse_samples: Vec<(usize, f64)> = Vec::new();
    let mut ordering_checked = 0usize;
    for record in &records {
        let Some(derivations) = &record.derivations else {
            continue;
        };
        if derivations.is_empty() {
            continue;
        }
        with_derivations += 1;
        for (policy, derivation) in derivations {
            costs.entry(policy).or_default().push(derivation.cost);
            if let Some(ms) = derivation.parse_ms {
                parse_samples.push((derivation.target.len(), ms));
            }
        }
        if let (Some(full), Some(l2rs), Some(l2rt)) = (
            derivations.get("full"),
            derivations.get("l2rs"),
            derivations.get("l2rt"),
        ) {
            ordering_checked += 1;
            if !(full.cost <= l2rs.cost && l2rs.cost <= l2rt.cost) {
                return Err(CliError::verify(format!(
                    "example {:?}: cost ordering violated (full={}, l2rs={}, l2rt={})",
                    record.id, full.cost, l2rs.cost, l2rt.cost
                )));
            }
        }
    }
    if costs.is_empty() {
        return Err(CliError::data(
            "corpus has no derivations; run derive first",
        ));
    }

    writeln!(out, 
        "corpus: {} examples, {} with derivations",
        records.len(),
        with_derivations
    )?;
    for (policy, values) in &mut costs {
        values.sort_unstable();
        writeln!(out, 
            "policy {policy}: count={} mean={:.4} median={:.1} min={} max={}",
            values.len(),
            mean(values),
            median_u32(values),
            values.first().unwrap(),
            values.last().unwrap()
        )?;
        writeln!(out, "  actions histogram:")?;
        let mut histogram: BTreeMap<u32, usize> = BTreeMap::new();
        for &v in values.iter() {
            *histogram.entry(v).or_default() += 1;
        }
        for (actions, count) in histogram {
            writeln!(out, "    {actions}: {count}")?;
        }
    }

    if ordering_checked > 0 {
        writeln!(out, "cost ordering full <= l2rs <= l2rt: OK on {ordering_checked} examples")?;
    }
    if let (Some(full), Some(l2rt)) = (costs.get("full"), costs.get("l2rt")) {
        let mean_full = mean(full);
        let mean_l2rt = mean(l2rt);
        if mean_full > mean_l2rt {
            return Err(CliError::verify(format!(
                "mean(full)={mean_full:.4} exceeds mean(l2rt)={mean_l2rt:.4}"
            )));
        }
        writeln!(out, "mean ordering: mean(full)={mean_full:.4} <= mean(l2rt)={mean_l2rt:.4}")?;
    }

    report_parse_times(&mut out, parse_samples)?;
    Ok(())
}

/// Parse wall-time summary: overall median, per-target-length medians, and
/// the observed factor when the target length doubles.
fn report_parse_times(out: &mut impl Write, samples: Vec<(usize, f64)>) -> Result<(), CliError> {
    if samples.is_empty() {
        writeln!(out, "parse time: no samples (run derive --timings to record them)")?;
        return Ok(());
    }
    let mut all: Vec<f64> = samples.iter().map(|&(_, ms)| ms).collect();
    writeln!(out, 
        "parse time: {} samples, median {:.3} ms",
        all.len(),
        median_f64(&mut all)
    )?;
    let mut by_len: BTreeMap<usize, Vec<f64>> = BTreeMap::new();
    for (len, ms) in samples {
        by_len.entry(len).or_default().push(ms);
    }
    let medians: BTreeMap<usize, f64> = by_len
        .into_iter()
        .map(|(len, mut values)| (len, median_f64(&mut values)))
        .collect();
    writeln!(out, "  by target length:")?;
    for (&len, &ms) in &medians {
        writeln!(out, "    T={len}: median {ms:.3} ms")?;
    }
    let mut factors: Vec<f64> = Vec::new();
    for (&len, &ms) in &medians {
        if let Some(&doubled) = medians.get(&(len * 2)) {
            let factor = doubled / ms;
            writeln!(out, "  doubling T={len} -> {}: {factor:.2}x", len * 2)?;
            factors.push(factor);
        }
    }
    match factors.is_empty() {
        true => writeln!(out, "  doubling factor: no (T, 2T) length pairs in the corpus")?,
        false => writeln!(out, "  median doubling factor: {:.2}x", median_f64(&mut factors))?,
    }
    Ok(())
}
