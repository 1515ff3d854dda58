//! Optional key=value config file mirroring the command-line flags.
//!
//! Flat `key = value` lines apply to any subcommand that has a `--key` flag;
//! a `[subcommand]` section scopes the lines under it to that subcommand.
//! A key already given on the command line is never injected, so typed flags
//! win. Boolean true turns a switch on; a switch cannot be turned off from
//! the command line once the config sets it.

use std::ffi::OsString;
use std::fs;
use std::path::Path;

use clap::{ArgAction, Command};

use crate::errors::CliError;

#[derive(Debug, Clone, PartialEq)]
pub struct ConfigEntry {
    /// Subcommand the entry is scoped to; None applies everywhere.
    pub section: Option<String>,
    pub key: String,
    pub value: String,
}

pub fn parse_config(path: &Path) -> Result<Vec<ConfigEntry>, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::data(format!("cannot read config {}: {e}", path.display())))?;
    let mut entries = Vec::new();
    let mut section: Option<String> = None;
    for (idx, raw) in text.lines().enumerate() {
        let lineno = idx + 1;
        let line = raw.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        if let Some(name) = line.strip_prefix('[').and_then(|s| s.strip_suffix(']')) {
            section = Some(name.trim().to_string());
            continue;
        }
        let Some((key, value)) = line.split_once('=') else {
            return Err(CliError::data(format!(
                "{}:{lineno}: expected key = value, got {line:?}",
                path.display()
            )));
        };
        let key = key.trim().to_string();
        let mut value = value.trim();
        if value.len() >= 2 && value.starts_with('"') && value.ends_with('"') {
            value = &value[1..value.len() - 1];
        }
        if key.is_empty() {
            return Err(CliError::data(format!(
                "{}:{lineno}: empty key",
                path.display()
            )));
        }
        entries.push(ConfigEntry {
            section: section.clone(),
            key,
            value: value.to_string(),
        });
    }
    Ok(entries)
}

/// Splices config-derived flags into argv right after the subcommand,
/// skipping any key the command line already carries, so typed flags win.
/// Only keys the subcommand actually declares are used.
pub fn inject_config(
    command: &Command,
    argv: Vec<OsString>,
    entries: &[ConfigEntry],
) -> Result<Vec<OsString>, CliError> {
    // Locate the subcommand token: first non-flag argument after argv[0].
    // Only --config takes a value before the subcommand; its value must not
    // be mistaken for the subcommand name.
    let mut sub_pos = None;
    let mut skip_value = false;
    for (pos, arg) in argv.iter().enumerate().skip(1) {
        if skip_value {
            skip_value = false;
            continue;
        }
        let text = arg.to_string_lossy();
        if text == "--config" {
            skip_value = true;
            continue;
        }
        if !text.starts_with('-') {
            sub_pos = Some(pos);
            break;
        }
    }
    let Some(sub_pos) = sub_pos else {
        return Ok(argv); // no subcommand; clap will print usage
    };
    let sub_name = argv[sub_pos].to_string_lossy().to_string();
    let Some(sub) = command.find_subcommand(&sub_name) else {
        return Ok(argv);
    };
    let typed: Vec<String> = argv[sub_pos + 1..]
        .iter()
        .map(|a| a.to_string_lossy().into_owned())
        .collect();
    let typed_has = |key: &str| {
        let exact = format!("--{key}");
        let assigned = format!("--{key}=");
        typed.iter().any(|a| a == &exact || a.starts_with(&assigned))
    };

    let mut flags: Vec<OsString> = Vec::new();
    for entry in entries {
        if entry.key == "config" || typed_has(&entry.key) {
            continue;
        }
        if let Some(section) = &entry.section {
            if section != &sub_name {
                continue;
            }
        }
        let Some(arg) = sub
            .get_arguments()
            .find(|a| a.get_long() == Some(entry.key.as_str()))
        else {
            if entry.section.is_some() {
                return Err(CliError::data(format!(
                    "config key {:?} is not a flag of `{sub_name}`",
                    entry.key
                )));
            }
            continue; // flat key for some other subcommand
        };
        match arg.get_action() {
            ArgAction::SetTrue => match entry.value.as_str() {
                "true" | "1" | "yes" | "on" => flags.push(format!("--{}", entry.key).into()),
                "false" | "0" | "no" | "off" => {}
                other => {
                    return Err(CliError::data(format!(
                        "config key {:?} expects a boolean, got {other:?}",
                        entry.key
                    )));
                }
            },
            _ => {
                flags.push(format!("--{}", entry.key).into());
                flags.push(entry.value.clone().into());
            }
        }
    }

    let mut out = argv;
    // Insert directly after the subcommand name.
    out.splice(sub_pos + 1..sub_pos + 1, flags);
    Ok(out)
}

/// Pulls `--config FILE` (or `--config=FILE`) out of raw argv before clap
/// runs, since the config must be read to build the final argv.
pub fn find_config_path(argv: &[OsString]) -> Option<std::path::PathBuf> {
    let mut iter = argv.iter();
    while let Some(arg) = iter.next() {
        let text = arg.to_string_lossy();
        if text == "--config" {
            return iter.next().map(|v| std::path::PathBuf::from(v.clone()));
        }
        if let Some(path) = text.strip_prefix("--config=") {
            return Some(std::path::PathBuf::from(path));
        }
    }
    None
}
