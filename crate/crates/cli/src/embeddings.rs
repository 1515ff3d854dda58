//! Embedding ingestion: JSONL of {"id", "vector"} lines, or a flat binary
//! table for bulk corpora. The format is picked by file extension: `.bin`
//! reads binary, anything else reads JSONL.
//!
//! Binary layout, little-endian throughout:
//!   magic "EMB0" | u32 count | u32 dim |
//!   count x ( u16 id_len | id bytes (UTF-8) | dim x f64 )

use std::collections::BTreeMap;
use std::fs;
use std::path::Path;

use serde::Deserialize;

use crate::errors::CliError;

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct EmbeddingLine {
    id: String,
    vector: Vec<f64>,
}

pub fn load_embeddings(path: &Path) -> Result<BTreeMap<String, Vec<f64>>, CliError> {
    let is_binary = path.extension().is_some_and(|e| e == "bin");
    if is_binary {
        load_binary(path)
    } else {
        load_jsonl(path)
    }
}

fn load_jsonl(path: &Path) -> Result<BTreeMap<String, Vec<f64>>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let mut map = BTreeMap::new();
    let mut dim: Option<usize> = None;
    for (idx, line) in text.lines().enumerate() {
        let lineno = idx + 1;
        if line.trim().is_empty() {
            continue;
        }
        let entry: EmbeddingLine = serde_json::from_str(line).map_err(|e| {
            CliError::data(format!(
                "{}:{lineno}: invalid embedding: {e}",
                path.display()
            ))
        })?;
        check_dim(path, lineno, &mut dim, entry.vector.len())?;
        if map.insert(entry.id.clone(), entry.vector).is_some() {
            return Err(CliError::data(format!(
                "{}:{lineno}: duplicate embedding id {:?}",
                path.display(),
                entry.id
            )));
        }
    }
    if map.is_empty() {
        return Err(CliError::data(format!(
            "{}: no embeddings found",
            path.display()
        )));
    }
    Ok(map)
}

fn check_dim(
    path: &Path,
    lineno: usize,
    dim: &mut Option<usize>,
    got: usize,
) -> Result<(), CliError> {
    match dim {
        None => {
            *dim = Some(got);
            Ok(())
        }
        Some(expected) if *expected == got => Ok(()),
        Some(expected) => Err(CliError::data(format!(
            "{}:{lineno}: embedding dimension {got} differs from {expected}",
            path.display()
        ))),
    }
}

fn load_binary(path: &Path) -> Result<BTreeMap<String, Vec<f64>>, CliError> {
    let bytes = fs::read(path)
        .map_err(|e| CliError::data(format!("cannot read {}: {e}", path.display())))?;
    let bad = |msg: &str| CliError::data(format!("{}: {msg}", path.display()));
    if bytes.len() < 12 || &bytes[..4] != b"EMB0" {
        return Err(bad("not an EMB0 embedding file"));
    }
    let count = u32::from_le_bytes(bytes[4..8].try_into().unwrap()) as usize;
    let dim = u32::from_le_bytes(bytes[8..12].try_into().unwrap()) as usize;
    let mut pos = 12;
    let mut map = BTreeMap::new();
    for _ in 0..count {
        if pos + 2 > bytes.len() {
            return Err(bad("truncated id length"));
        }
        let id_len = u16::from_le_bytes(bytes[pos..pos + 2].try_into().unwrap()) as usize;
        pos += 2;
        if pos + id_len + dim * 8 > bytes.len() {
            return Err(bad("truncated entry"));
        }
        let id = std::str::from_utf8(&bytes[pos..pos + id_len])
            .map_err(|_| bad("id is not UTF-8"))?
            .to_string();
        pos += id_len;
        let mut vector = Vec::with_capacity(dim);
        for _ in 0..dim {
            vector.push(f64::from_le_bytes(bytes[pos..pos + 8].try_into().unwrap()));
            pos += 8;
        }
        if map.insert(id.clone(), vector).is_some() {
            return Err(bad(&format!("duplicate embedding id {id:?}")));
        }
    }
    if pos != bytes.len() {
        return Err(bad("trailing bytes after last entry"));
    }
    if map.is_empty() {
        return Err(bad("no embeddings found"));
    }
    Ok(map)
}

/// Writes the binary format; used by tests and available for conversions.
pub fn write_binary(path: &Path, entries: &[(String, Vec<f64>)]) -> Result<(), CliError> {
    let dim = entries.first().map_or(0, |(_, v)| v.len());
    let mut bytes = Vec::new();
    bytes.extend_from_slice(b"EMB0");
    bytes.extend_from_slice(&(entries.len() as u32).to_le_bytes());
    bytes.extend_from_slice(&(dim as u32).to_le_bytes());
    for (id, vector) in entries {
        bytes.extend_from_slice(&(id.len() as u16).to_le_bytes());
        bytes.extend_from_slice(id.as_bytes());
        for &x in vector {
            bytes.extend_from_slice(&x.to_le_bytes());
        }
    }
    fs::write(path, bytes)
        .map_err(|e| CliError::data(format!("cannot write {}: {e}", path.display())))
}
