//! Nearest-neighbor retrieval over a corpus, with optional k-means
//! prototype augmentation.

use std::collections::BTreeMap;
use std::path::PathBuf;

use clap::Args;
use rayon::prelude::*;
use splice_core::{
    cosine_distance, kmeans_prototypes, table_distance, top_k_by, RetrievalError, TableSource,
};

use crate::errors::CliError;
use crate::schema::{dedupe_records, read_corpus, write_corpus, ExampleRecord, SourceField};

#[derive(Debug, Args)]
pub struct RetrieveArgs {
    /// Input corpus (JSONL, one example per line).
    pub corpus_in: PathBuf,
    /// Output corpus with neighbor lists attached.
    pub corpus_out: PathBuf,
    /// Distance to rank candidates by.
    #[arg(long, value_parser = ["table", "cosine"], default_value = "table")]
    pub metric: String,
    /// Neighbors to keep per example.
    #[arg(long, default_value_t = 10)]
    pub k: usize,
    /// Embedding file (JSONL of {"id","vector"} or .bin); required for
    /// --metric cosine and for --prototypes.
    #[arg(long)]
    pub embeddings: Option<PathBuf>,
    /// Append this many k-means prototype ids to every neighbor list.
    #[arg(long)]
    pub prototypes: Option<usize>,
    /// Lloyd iterations for prototype clustering.
    #[arg(long, default_value_t = 20)]
    pub kmeans_iters: usize,
    /// Seed for prototype centroid initialization.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Drop exact duplicate (source, target) records before retrieval.
    #[arg(long)]
    pub dedupe: bool,
    /// Keep original casing when tokenizing table values.
    #[arg(long)]
    pub keep_case: bool,
}

fn record_table(record: &ExampleRecord, lowercase: bool) -> TableSource {
    let lc = |s: &str| {
        if lowercase {
            s.to_lowercase()
        } else {
            s.to_string()
        }
    };
    match &record.source {
        SourceField::Pairs(pairs) => {
            let pairs: Vec<(String, String)> =
                pairs.iter().map(|(f, v)| (lc(f), lc(v))).collect();
            TableSource::from_pairs(&pairs)
        }
        // A raw source has no field structure: empty field set, tokens as
        // the value unigrams.
        SourceField::Raw(tokens) => TableSource {
            fields: Default::default(),
            values: tokens.iter().map(|t| lc(t)).collect(),
        },
    }
}

/// Embedding per record, in record order. Every record must have one.
fn corpus_vectors(
    records: &[ExampleRecord],
    map: &BTreeMap<String, Vec<f64>>,
) -> Result<Vec<Vec<f64>>, CliError> {
    records
        .iter()
        .map(|r| {
            map.get(&r.id).cloned().ok_or_else(|| {
                CliError::data(format!("no embedding for example {:?}", r.id))
            })
        })
        .collect()
}

pub fn run(args: &RetrieveArgs) -> Result<(), CliError> {
    let mut records = read_corpus(&args.corpus_in)?;
    if args.dedupe {
        let (kept, dropped) = dedupe_records(records);
        records = kept;
        if dropped > 0 {
            eprintln!("dedupe: dropped {dropped} duplicate (source, target) records");
        }
    }
    if args.k == 0 {
        return Err(CliError::data("--k must be at least 1"));
    }

    let embeddings = match &args.embeddings {
        Some(path) => Some(crate::embeddings::load_embeddings(path)?),
        None => None,
    };

    enum Metric {
        Table(Vec<TableSource>),
        Cosine(Vec<Vec<f64>>),
    }
    let metric = match args.metric.as_str() {
        "table" => Metric::Table(
            records
                .iter()
                .map(|r| record_table(r, !args.keep_case))
                .collect(),
        ),
        "cosine" => {
            let map = embeddings
                .as_ref()
                .ok_or_else(|| CliError::data("--metric cosine requires --embeddings"))?;
            Metric::Cosine(corpus_vectors(&records, map)?)
        }
        other => return Err(CliError::data(format!("unknown metric {other:?}"))),
    };

    let distance = |query: usize, other: usize| -> Result<f64, RetrievalError> {
        match &metric {
            Metric::Table(tables) => Ok(table_distance(&tables[query], &tables[other])),
            Metric::Cosine(vectors) => cosine_distance(&vectors[query], &vectors[other]),
        }
    };

    // Prototypes are cluster representatives over the whole corpus, shared
    // by every example; appended entries keep the active metric's distance.
    let prototype_ids: Vec<usize> = match args.prototypes {
        None => Vec::new(),
        Some(0) => return Err(CliError::data("--prototypes must be at least 1")),
        Some(k) => {
            let map = embeddings
                .as_ref()
                .ok_or_else(|| CliError::data("--prototypes requires --embeddings"))?;
            let vectors = corpus_vectors(&records, map)?;
            kmeans_prototypes(&vectors, k, args.kmeans_iters, args.seed)
                .map_err(|e| CliError::data(format!("prototype clustering failed: {e}")))?
        }
    };

    let neighbor_lists: Vec<Result<Vec<(String, f64)>, CliError>> = (0..records.len())
        .into_par_iter()
        .map(|query| {
            let hits = top_k_by(records.len(), query, args.k, |other| distance(query, other))
                .map_err(|e| CliError::data(format!("example {:?}: {e}", records[query].id)))?;
            let mut list: Vec<(String, f64)> = hits
                .into_iter()
                .map(|(idx, d)| (records[idx].id.clone(), d))
                .collect();
            for &proto in &prototype_ids {
                let d = distance(query, proto)
                    .map_err(|e| CliError::data(format!("example {:?}: {e}", records[query].id)))?;
                list.push((records[proto].id.clone(), d));
            }
            Ok(list)
        })
        .collect();

    for (record, list) in records.iter_mut().zip(neighbor_lists) {
        record.neighbors = Some(list?);
    }
    write_corpus(&args.corpus_out, &records)?;
    eprintln!(
        "retrieved {} neighbors{} for {} examples",
        args.k,
        if prototype_ids.is_empty() {
            String::new()
        } else {
            format!(" + {} prototypes", prototype_ids.len())
        },
        records.len()
    );
    Ok(())
}
