//! CSV files for checkpoint records and urn traces.
//!
//! Floats are written with 17 significant digits so that they read back
//! bit-for-bit.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::rates::CheckpointRecord;

use super::model::UrnRecord;
use super::HarnessError;

pub fn format_float(x: f64) -> String {
    format!("{x:.16e}")
}

pub fn checkpoint_header(d: usize) -> Vec<String> {
    let mut cols: Vec<String> = ["replica", "k", "t", "pos"].iter().map(|s| s.to_string()).collect();
    cols.extend((1..=d).map(|i| format!("Z_{i}")));
    cols.extend((1..=d).map(|i| format!("L_{i}")));
    cols.extend(["eta", "sup_dist", "xi_12", "Xi_12"].iter().map(|s| s.to_string()));
    cols
}

fn io_err(path: &Path, e: impl std::fmt::Display) -> HarnessError {
    HarnessError::Io(format!("{}: {e}", path.display()))
}

pub fn write_checkpoint_csv(path: &Path, records: &[CheckpointRecord]) -> Result<(), HarnessError> {
    let d = records.first().map_or(0, CheckpointRecord::d);
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "{}", checkpoint_header(d).join(","))?;
        for r in records {
            write!(out, "{},{},{},{}", r.replica, r.k, r.t, r.pos)?;
            for z in r.weights.iter().chain(&r.leaf_totals) {
                write!(out, ",{z}")?;
            }
            let big_xi = r.big_xi_12.map(format_float).unwrap_or_default();
            writeln!(
                out,
                ",{},{},{},{}",
                format_float(r.eta),
                format_float(r.sup_dist),
                format_float(r.xi_12),
                big_xi
            )?;
        }
        out.flush()
    };
    write().map_err(|e| io_err(path, e))
}

fn parse<T: std::str::FromStr>(path: &Path, line: usize, column: &str, field: &str) -> Result<T, HarnessError> {
    field.parse().map_err(|_| HarnessError::Schema(format!("{}:{line}: bad {column} value `{field}`", path.display())))
}

/// Reads a checkpoint CSV written by [`write_checkpoint_csv`].
pub fn read_checkpoint_csv(path: &Path) -> Result<Vec<CheckpointRecord>, HarnessError> {
    let mut reader = csv::ReaderBuilder::new().has_headers(true).from_path(path).map_err(|e| io_err(path, e))?;
    let header: Vec<String> = reader.headers().map_err(|e| io_err(path, e))?.iter().map(str::to_string).collect();
    let d = header.iter().filter(|c| c.starts_with("Z_")).count();
    if d == 0 || header != checkpoint_header(d) {
        return Err(HarnessError::Schema(format!("{}: unexpected header {}", path.display(), header.join(","))));
    }
    let mut records = Vec::new();
    for (i, row) in reader.records().enumerate() {
        let row = row.map_err(|e| HarnessError::Schema(format!("{}: {e}", path.display())))?;
        let line = i + 2;
        if row.len() != header.len() {
            return Err(HarnessError::Schema(format!("{}:{line}: expected {} fields", path.display(), header.len())));
        }
        let f = |c: usize| &row[c];
        let ints = |from: usize| -> Result<Vec<u64>, HarnessError> {
            (from..from + d).map(|c| parse(path, line, &header[c], f(c))).collect()
        };
        let base = 4 + 2 * d;
        let big_xi = match f(base + 3) {
            "" => None,
            s => Some(parse(path, line, "Xi_12", s)?),
        };
        records.push(CheckpointRecord {
            replica: parse(path, line, "replica", f(0))?,
            k: parse(path, line, "k", f(1))?,
            t: parse(path, line, "t", f(2))?,
            pos: parse(path, line, "pos", f(3))?,
            weights: ints(4)?,
            leaf_totals: ints(4 + d)?,
            eta: parse(path, line, "eta", f(base))?,
            sup_dist: parse(path, line, "sup_dist", f(base + 1))?,
            xi_12: parse(path, line, "xi_12", f(base + 2))?,
            big_xi_12: big_xi,
        });
    }
    Ok(records)
}

pub const URN_HEADER: &str = "replica,n,X,Y,stat";

pub fn write_urn_csv(path: &Path, records: &[UrnRecord]) -> Result<(), HarnessError> {
    let file = File::create(path).map_err(|e| io_err(path, e))?;
    let mut out = BufWriter::new(file);
    let mut write = || -> std::io::Result<()> {
        writeln!(out, "{URN_HEADER}")?;
        for r in records {
            let stat = r.stat.map(format_float).unwrap_or_default();
            writeln!(out, "{},{},{},{},{stat}", r.replica, r.n, format_float(r.x), format_float(r.y))?;
        }
        out.flush()
    };
    write().map_err(|e| io_err(path, e))
}
