//! Prints one stored derivation step by step and re-verifies it: the final
//! canvas must equal the stored target, the checksum must match, the action
//! count must equal the cost, and provenance labels must not interleave.

use std::io::Write;
use std::path::PathBuf;

use clap::Args;
use splice_core::{check_non_interleaving, ginsert, replay, token_checksum, TokenSequence};

use crate::errors::CliError;
use crate::schema::{build_vocab, read_corpus, render_tokens};

#[derive(Debug, Args)]
pub struct ReplayArgs {
    /// Corpus with derivations attached.
    pub corpus_in: PathBuf,
    /// Example id to replay.
    #[arg(long)]
    pub example: String,
    /// Which stored policy to replay (full, l2rs, l2rt).
    #[arg(long)]
    pub policy: String,
    /// Keep original casing when rebuilding the vocabulary for rendering.
    /// Must match the flag the derive run used.
    #[arg(long)]
    pub keep_case: bool,
}

pub fn run(args: &ReplayArgs) -> Result<(), CliError> {
    let records = read_corpus(&args.corpus_in)?;
    let Some(record) = records.iter().find(|r| r.id == args.example) else {
        return Err(CliError::data(format!(
            "unknown example {:?}",
            args.example
        )));
    };
    let Some(derivations) = record.derivations.as_ref().filter(|d| !d.is_empty()) else {
        return Err(CliError::data(format!(
            "example {:?} has no derivations; run derive first",
            args.example
        )));
    };
    let Some(derivation) = derivations.get(&args.policy) else {
        let available: Vec<&str> = derivations.keys().map(String::as_str).collect();
        return Err(CliError::data(format!(
            "example {:?} has no {:?} derivation (available: {})",
            args.example,
            args.policy,
            available.join(", ")
        )));
    };

    let vocab = build_vocab(&records, !args.keep_case);
    let (actions, seqs) = derivation.to_core()?;
    let stdout = std::io::stdout();
    let mut out = stdout.lock();

    writeln!(out, 
        "example {}, policy {}: {} actions, {}-token target",
        record.id,
        args.policy,
        actions.len(),
        derivation.target.len()
    )?;
    writeln!(out, 
        "target: \"{}\"",
        render_tokens(&vocab, &derivation.target)
    )?;
    writeln!(out, "manifest ({} sequences):", derivation.manifest.len())?;
    for (n, entry) in derivation.manifest.iter().enumerate() {
        let label = entry
            .label
            .as_ref()
            .map(|l| format!(" ({l})"))
            .unwrap_or_default();
        writeln!(out, 
            "  n={n} {}{label}: \"{}\"",
            entry.origin,
            render_tokens(&vocab, &entry.tokens)
        )?;
    }

    let mut canvas = TokenSequence::new(Vec::new());
    for (step, action) in actions.iter().enumerate() {
        let ordinal = step + 1;
        let next = ginsert(&canvas, action, &seqs).map_err(|e| {
            CliError::verify(format!("action {ordinal} cannot be applied: {e}"))
        })?;
        let span =
            &seqs[action.n as usize].tokens()[action.k as usize - 1..action.l as usize];
        let mut detail = format!("span \"{}\"", render_tokens(&vocab, span));
        if action.is_replacement() {
            let replaced = &canvas.tokens()[action.i as usize..action.j as usize - 1];
            detail.push_str(&format!(
                " replacing \"{}\"",
                render_tokens(&vocab, replaced)
            ));
        }
        if action.alternatives.len() > 1 {
            detail.push_str(&format!(
                ", {} interchangeable spans",
                action.alternatives.len()
            ));
        }
        writeln!(out, 
            "step {ordinal}: splice(i={}, j={}, n={}, k={}, l={}) {detail}",
            action.i, action.j, action.n, action.k, action.l
        )?;
        writeln!(out, "  before: \"{}\"", render_tokens(&vocab, canvas.tokens()))?;
        writeln!(out, "  after:  \"{}\"", render_tokens(&vocab, next.tokens()))?;
        canvas = next;
    }

    let (final_canvas, trace) = replay(&actions, &seqs)
        .map_err(|e| CliError::verify(format!("replay failed: {e}")))?;
    let labels: Vec<String> = trace.labels.iter().map(u32::to_string).collect();
    writeln!(out, "provenance labels: {}", labels.join(" "))?;
    let nested = check_non_interleaving(&trace);
    writeln!(out, "non-interleaving: {}", if nested { "yes" } else { "NO" })?;

    if final_canvas.tokens() != derivation.target.as_slice() {
        return Err(CliError::verify(format!(
            "final canvas does not match the stored target\n  canvas: \"{}\"\n  target: \"{}\"",
            render_tokens(&vocab, final_canvas.tokens()),
            render_tokens(&vocab, &derivation.target)
        )));
    }
    if !derivation.checksum_consistent()
        || token_checksum(final_canvas.tokens()) != derivation.checksum
    {
        return Err(CliError::verify(
            "stored checksum does not match the derived sequence (file edited?)",
        ));
    }
    if actions.len() as u32 != derivation.cost {
        return Err(CliError::verify(format!(
            "action count {} differs from the stored cost {}",
            actions.len(),
            derivation.cost
        )));
    }
    if !nested {
        return Err(CliError::verify("provenance labels interleave"));
    }
    writeln!(out, 
        "replay OK: canvas matches the target ({} tokens, {} actions)",
        final_canvas.len(),
        actions.len()
    )?;
    Ok(())
}
