//! Deterministic CSV emission.
//!
//! All report files begin with `#`-prefixed metadata lines (scenario hash,
//! seed, crate version); floats are serialized with 17 significant digits so
//! re-runs under the same seed are byte-identical. Matrix exports use the
//! bare `# rows cols` header.

use std::fmt::Write as _;
use std::path::Path;

use nalgebra::DMatrix;
use sha2::{Digest, Sha256};

use crate::Result;

/// 17-significant-digit float form used in every CSV cell.
pub fn fmt_f64(v: f64) -> String {
    format!("{v:.16e}")
}

/// Hex SHA-256 of the scenario document, stamped into report headers.
pub fn scenario_hash(scenario_text: &str) -> String {
    let digest = Sha256::digest(scenario_text.as_bytes());
    let mut out = String::with_capacity(16);
    for b in &digest[..8] {
        let _ = write!(out, "{b:02x}");
    }
    out
}

/// Common `#` metadata block.
#[derive(Debug, Clone)]
pub struct ReportMeta {
    pub scenario_hash: String,
    pub seed: u64,
    pub replicas: usize,
}

impl ReportMeta {
    fn header(&self) -> String {
        format!(
            "# scenario: {}\n# seed: {}\n# replicas: {}\n# version: {}\n",
            self.scenario_hash,
            self.seed,
            self.replicas,
            env!("CARGO_PKG_VERSION")
        )
    }
}

/// A CSV table: named columns, rows of preformatted cells.
#[derive(Debug, Clone)]
pub struct Table {
    pub columns: Vec<String>,
    pub rows: Vec<Vec<String>>,
}

impl Table {
    pub fn new(columns: &[&str]) -> Table {
        Table { columns: columns.iter().map(|c| c.to_string()).collect(), rows: Vec::new() }
    }

    pub fn push(&mut self, row: Vec<String>) {
        debug_assert_eq!(row.len(), self.columns.len());
        self.rows.push(row);
    }

    pub fn render(&self, meta: &ReportMeta) -> String {
        let mut out = meta.header();
        out.push_str(&self.columns.join(","));
        out.push('\n');
        for row in &self.rows {
            out.push_str(&row.join(","));
            out.push('\n');
        }
        out
    }

    pub fn write(&self, meta: &ReportMeta, path: &Path) -> Result<()> {
        std::fs::write(path, self.render(meta))?;
        Ok(())
    }
}

/// Row-major matrix export with the `# rows cols` header.
pub fn write_matrix(matrix: &DMatrix<f64>, path: &Path) -> Result<()> {
    let mut out = format!("# {} {}\n", matrix.nrows(), matrix.ncols());
    for r in 0..matrix.nrows() {
        let cells: Vec<String> = (0..matrix.ncols()).map(|c| fmt_f64(matrix[(r, c)])).collect();
        out.push_str(&cells.join(","));
        out.push('\n');
    }
    std::fs::write(path, out)?;
    Ok(())
}

/// Parse a valuation.csv produced by [`Table`] back into raw values.
/// Returns (sc_id, phi_raw, phi_norm) triples in row order.
pub fn read_valuation_csv(text: &str) -> Option<Vec<(usize, f64, f64)>> {
    let mut rows = Vec::new();
    let mut saw_header = false;
    for line in text.lines() {
        if line.starts_with('#') || line.trim().is_empty() {
            continue;
        }
        if !saw_header {
            saw_header = true;
            continue;
        }
        let mut cells = line.split(',');
        let id: usize = cells.next()?.parse().ok()?;
        let raw: f64 = cells.next()?.parse().ok()?;
        let norm: f64 = cells.next()?.parse().ok()?;
        rows.push((id, raw, norm));
    }
    Some(rows)
}
