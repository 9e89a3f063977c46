use std::io::Write;
use std::path::Path;

use crate::error::{domain, Result};

/// Iterations × dimension draws stored row-major, with per-iteration
/// acceptance flags.
#[derive(Debug, Clone, PartialEq)]
pub struct ChainTrace {
    names: Vec<String>,
    draws: Vec<f64>,
    accepted: Vec<bool>,
    pub burn_in: usize,
}

impl ChainTrace {
    pub fn new(names: Vec<String>) -> Self {
        Self { names, draws: Vec::new(), accepted: Vec::new(), burn_in: 0 }
    }

    pub fn with_capacity(names: Vec<String>, iterations: usize) -> Self {
        let dim = names.len();
        Self {
            names,
            draws: Vec::with_capacity(iterations * dim),
            accepted: Vec::with_capacity(iterations),
            burn_in: 0,
        }
    }

    pub fn push(&mut self, row: &[f64], accepted: bool) {
        debug_assert_eq!(row.len(), self.dim());
        self.draws.extend_from_slice(row);
        self.accepted.push(accepted);
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn dim(&self) -> usize {
        self.names.len()
    }

    pub fn len(&self) -> usize {
        self.accepted.len()
    }

    pub fn is_empty(&self) -> bool {
        self.accepted.is_empty()
    }

    pub fn row(&self, t: usize) -> &[f64] {
        let d = self.dim();
        &self.draws[t * d..(t + 1) * d]
    }

    pub fn rows(&self) -> impl Iterator<Item = &[f64]> {
        self.draws.chunks_exact(self.dim().max(1))
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        self.rows().map(|r| r[j]).collect()
    }

    pub fn column_by_name(&self, name: &str) -> Option<Vec<f64>> {
        self.names.iter().position(|n| n == name).map(|j| self.column(j))
    }

    pub fn accepted(&self) -> &[bool] {
        &self.accepted
    }

    /// Fraction of accepted iterations.
    pub fn acceptance_rate(&self) -> f64 {
        if self.accepted.is_empty() {
            return 0.0;
        }
        self.accepted.iter().filter(|&&a| a).count() as f64 / self.accepted.len() as f64
    }

    /// Writes `(iteration, component, value)` rows for every `thin`-th
    /// iteration; iterations are numbered from 1.
    pub fn write_csv(&self, path: impl AsRef<Path>, thin: usize) -> Result<usize> {
        if thin == 0 {
            return domain("thinning interval must be at least 1");
        }
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "iteration,component,value")?;
        let mut rows = 0;
        for t in (0..self.len()).filter(|t| (t + 1) % thin == 0) {
            for (name, v) in self.names.iter().zip(self.row(t)) {
                writeln!(w, "{},{},{}", t + 1, name, v)?;
                rows += 1;
            }
        }
        w.flush()?;
        Ok(rows)
    }

    /// Writes one row per kept iteration with header `iteration,<names>`;
    /// returns the number of data rows. NaN padding is written as `NaN`.
    pub fn write_wide_csv(&self, path: impl AsRef<Path>, thin: usize) -> Result<usize> {
        if thin == 0 {
            return domain("thinning interval must be at least 1");
        }
        let mut w = std::io::BufWriter::new(std::fs::File::create(path)?);
        writeln!(w, "iteration,{}", self.names.join(","))?;
        let mut rows = 0;
        for t in (0..self.len()).filter(|t| (t + 1) % thin == 0) {
            write!(w, "{}", t + 1)?;
            for v in self.row(t) {
                write!(w, ",{v}")?;
            }
            writeln!(w)?;
            rows += 1;
        }
        w.flush()?;
        Ok(rows)
    }
}
