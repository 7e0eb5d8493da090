//! On-disk cache of recurrence tables. Files are named by a SHA-256 of the
//! request key and also store the key, so a hash collision or a hand-edited
//! file is caught as a mismatch and recomputed.

use std::path::{Path, PathBuf};

use freud_zeros::orthopoly::{
    compute_recurrence_with, RecurrenceMethod, RecurrenceOptions, RecurrenceTable, TABLE_SCHEMA_VERSION,
};
use freud_zeros::weight::FreudWeight;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

pub const CACHE_ENV: &str = "FREUD_ZEROS_CACHE_DIR";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TableKey {
    pub schema_version: u32,
    pub lambda: f64,
    pub c: f64,
    pub n_max: usize,
    pub method: Option<RecurrenceMethod>,
    pub support_factor: f64,
    pub tolerance: f64,
    pub max_refinements: usize,
}

impl TableKey {
    pub fn new(weight: &FreudWeight, n_max: usize, opts: &RecurrenceOptions) -> Self {
        Self {
            schema_version: TABLE_SCHEMA_VERSION,
            lambda: weight.lambda(),
            c: weight.c(),
            n_max,
            method: opts.method,
            support_factor: opts.support_factor,
            tolerance: opts.tolerance,
            max_refinements: opts.max_refinements,
        }
    }

    fn digest(&self) -> String {
        let canonical = serde_json::to_string(self).expect("key serializes");
        Sha256::digest(canonical.as_bytes())
            .iter()
            .map(|b| format!("{b:02x}"))
            .collect()
    }
}

#[derive(Serialize, Deserialize)]
struct Entry {
    key: TableKey,
    table: RecurrenceTable,
}

pub fn default_dir() -> Option<PathBuf> {
    if let Some(dir) = std::env::var_os(CACHE_ENV).filter(|d| !d.is_empty()) {
        return Some(PathBuf::from(dir));
    }
    if let Some(dir) = std::env::var_os("XDG_CACHE_HOME").filter(|d| !d.is_empty()) {
        return Some(PathBuf::from(dir).join("freud-zeros"));
    }
    std::env::var_os("HOME").map(|h| PathBuf::from(h).join(".cache").join("freud-zeros"))
}

fn path_for(dir: &Path, key: &TableKey) -> PathBuf {
    dir.join(format!("recurrence-{}.json", key.digest()))
}

fn load(path: &Path, key: &TableKey) -> Option<RecurrenceTable> {
    let text = std::fs::read_to_string(path).ok()?;
    let entry: Entry = serde_json::from_str(&text).ok()?;
    (entry.key == *key).then_some(entry.table)
}

fn store(path: &Path, key: &TableKey, table: &RecurrenceTable) -> std::io::Result<()> {
    if let Some(parent) = path.parent() {
        std::fs::create_dir_all(parent)?;
    }
    let entry = Entry {
        key: key.clone(),
        table: table.clone(),
    };
    let text = serde_json::to_string(&entry).map_err(std::io::Error::other)?;
    let tmp = path.with_extension(format!("tmp{}", std::process::id()));
    std::fs::write(&tmp, text)?;
    std::fs::rename(&tmp, path)
}

/// Cached table if a matching one exists, otherwise computed (and stored
/// when `dir` is given). Cache I/O problems only produce a warning.
pub fn recurrence(
    weight: &FreudWeight,
    n_max: usize,
    opts: &RecurrenceOptions,
    dir: Option<&Path>,
) -> freud_zeros::Result<RecurrenceTable> {
    let key = TableKey::new(weight, n_max, opts);
    let path = dir.map(|d| path_for(d, &key));
    if let Some(table) = path.as_deref().and_then(|p| load(p, &key)) {
        return Ok(table);
    }
    let table = compute_recurrence_with(weight, n_max, opts)?;
    if let Some(p) = &path {
        if let Err(e) = store(p, &key, &table) {
            eprintln!("warning: could not write cache file {}: {e}", p.display());
        }
    }
    Ok(table)
}
