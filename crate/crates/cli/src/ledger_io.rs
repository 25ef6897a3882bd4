//! Line-delimited experiment ledger.
//!
//! One record per line, fields in a fixed order:
//!
//! ```text
//! objective=<..> M=<int> S=<int> examples=<int> metric=<..> value=<decimal> dataset=<..> tag=<..>
//! ```
//!
//! Reals carry 9 significant digits. The `(objective, M, S, metric,
//! dataset)` key is unique; duplicates are rejected on both append and read.
//! Each append is a single write of a full line, so concurrent readers
//! never observe a partial record.

use std::collections::BTreeSet;
use std::fs;
use std::io::{BufRead, BufReader, Write};
use std::path::{Path, PathBuf};

use rankscale_core::ledger::{LedgerRecord, Objective};
use rankscale_core::metrics::MetricName;

use crate::error::Error;
use crate::{format_sig9, Result};

type Key = (Objective, u64, u64, MetricName, String);

fn owned_key(r: &LedgerRecord) -> Key {
    (r.objective, r.model_params, r.step, r.metric, r.dataset.clone())
}

/// Render one record as its ledger line (without the newline).
pub fn format_record(r: &LedgerRecord) -> Result<String> {
    r.validate()?;
    for (field, value) in [("dataset", &r.dataset), ("tag", &r.run_tag)] {
        if value.is_empty() || value.chars().any(char::is_whitespace) {
            return Err(Error::Validation(format!(
                "ledger {field} {value:?} must be non-empty and whitespace-free"
            )));
        }
    }
    Ok(format!(
        "objective={} M={} S={} examples={} metric={} value={} dataset={} tag={}",
        r.objective,
        r.model_params,
        r.step,
        r.examples,
        r.metric,
        format_sig9(r.value),
        r.dataset,
        r.run_tag
    ))
}

fn parse_field<'a>(path: &Path, lineno: usize, part: Option<&'a str>, name: &str) -> Result<&'a str> {
    let part = part.ok_or_else(|| Error::parse(path, lineno, format!("missing field {name}")))?;
    let (key, value) = part
        .split_once('=')
        .ok_or_else(|| Error::parse(path, lineno, format!("expected {name}=<..>, got {part:?}")))?;
    if key != name {
        return Err(Error::parse(
            path,
            lineno,
            format!("expected field {name}, got {key} (fields are order-sensitive)"),
        ));
    }
    Ok(value)
}

/// Parse one ledger line.
pub fn parse_record(path: &Path, lineno: usize, line: &str) -> Result<LedgerRecord> {
    let mut parts = line.split_whitespace();
    let objective = parse_field(path, lineno, parts.next(), "objective")?
        .parse::<Objective>()
        .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
    let m = parse_field(path, lineno, parts.next(), "M")?
        .parse::<u64>()
        .map_err(|_| Error::parse(path, lineno, "M is not an integer"))?;
    let s = parse_field(path, lineno, parts.next(), "S")?
        .parse::<u64>()
        .map_err(|_| Error::parse(path, lineno, "S is not an integer"))?;
    let examples = parse_field(path, lineno, parts.next(), "examples")?
        .parse::<u64>()
        .map_err(|_| Error::parse(path, lineno, "examples is not an integer"))?;
    let metric = parse_field(path, lineno, parts.next(), "metric")?
        .parse::<MetricName>()
        .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
    let value = parse_field(path, lineno, parts.next(), "value")?
        .parse::<f64>()
        .map_err(|_| Error::parse(path, lineno, "value is not a number"))?;
    let dataset = parse_field(path, lineno, parts.next(), "dataset")?.to_string();
    let tag = parse_field(path, lineno, parts.next(), "tag")?.to_string();
    if let Some(extra) = parts.next() {
        return Err(Error::parse(path, lineno, format!("unexpected trailing field {extra:?}")));
    }
    let record = LedgerRecord {
        objective,
        model_params: m,
        step: s,
        examples,
        metric,
        value,
        dataset,
        run_tag: tag,
    };
    record
        .validate()
        .map_err(|e| Error::parse(path, lineno, e.to_string()))?;
    Ok(record)
}

/// Read and validate a whole ledger. Corrupt lines and duplicate keys are
/// errors carrying the offending line number.
pub fn read_ledger(path: &Path) -> Result<Vec<LedgerRecord>> {
    let reader = BufReader::new(
        fs::File::open(path).map_err(|e| Error::io(format!("opening {}", path.display()), e))?,
    );
    let mut seen: BTreeSet<Key> = BTreeSet::new();
    let mut records = Vec::new();
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|e| Error::io(format!("reading {}", path.display()), e))?;
        if line.trim().is_empty() {
            continue;
        }
        let record = parse_record(path, lineno, &line)?;
        if !seen.insert(owned_key(&record)) {
            return Err(Error::parse(
                path,
                lineno,
                format!(
                    "duplicate ledger key (objective={}, M={}, S={}, metric={}, dataset={})",
                    record.objective, record.model_params, record.step, record.metric, record.dataset
                ),
            ));
        }
        records.push(record);
    }
    Ok(records)
}

/// Append-mode ledger writer that enforces key uniqueness against both the
/// existing file contents and everything appended through it.
pub struct LedgerWriter {
    path: PathBuf,
    file: fs::File,
    seen: BTreeSet<Key>,
}

impl LedgerWriter {
    /// Open (or create) a ledger for appending; existing records are
    /// validated and their keys loaded.
    pub fn open(path: &Path) -> Result<Self> {
        let seen = if path.exists() {
            read_ledger(path)?.iter().map(owned_key).collect()
        } else {
            BTreeSet::new()
        };
        if let Some(dir) = path.parent() {
            fs::create_dir_all(dir)
                .map_err(|e| Error::io(format!("creating {}", dir.display()), e))?;
        }
        let file = fs::OpenOptions::new()
            .create(true)
            .append(true)
            .open(path)
            .map_err(|e| Error::io(format!("opening {}", path.display()), e))?;
        Ok(LedgerWriter {
            path: path.to_path_buf(),
            file,
            seen,
        })
    }

    /// Keys already present.
    pub fn keys(&self) -> impl Iterator<Item = &Key> {
        self.seen.iter()
    }

    /// Append one record atomically (single line write + flush).
    pub fn append(&mut self, record: &LedgerRecord) -> Result<()> {
        let key = owned_key(record);
        if self.seen.contains(&key) {
            return Err(Error::Validation(format!(
                "duplicate ledger key (objective={}, M={}, S={}, metric={}, dataset={}) in {}",
                record.objective,
                record.model_params,
                record.step,
                record.metric,
                record.dataset,
                self.path.display()
            )));
        }
        let mut line = format_record(record)?;
        line.push('\n');
        self.file
            .write_all(line.as_bytes())
            .map_err(|e| Error::io(format!("appending to {}", self.path.display()), e))?;
        self.file
            .flush()
            .map_err(|e| Error::io(format!("flushing {}", self.path.display()), e))?;
        self.seen.insert(key);
        Ok(())
    }
}

/// One-shot append that re-validates the whole file each call.
pub fn append_ledger(record: &LedgerRecord, path: &Path) -> Result<()> {
    LedgerWriter::open(path)?.append(record)
}
