use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// One file written by a run, with its data-row count for CSVs.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct OutputFile {
    pub path: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub rows: Option<usize>,
}

/// Collects the files an experiment writes into its staging directory.
#[derive(Debug)]
pub struct Outputs {
    dir: PathBuf,
    files: Vec<OutputFile>,
}

impl Outputs {
    pub fn new(dir: impl Into<PathBuf>) -> Self {
        Self { dir: dir.into(), files: Vec::new() }
    }

    pub fn dir(&self) -> &Path {
        &self.dir
    }

    pub fn files(&self) -> &[OutputFile] {
        &self.files
    }

    pub fn into_files(self) -> Vec<OutputFile> {
        self.files
    }

    pub fn path(&self, name: &str) -> PathBuf {
        self.dir.join(name)
    }

    /// Records a file written by other means.
    pub fn record(&mut self, name: &str, rows: Option<usize>) {
        self.files.push(OutputFile { path: name.to_string(), rows });
    }

    /// Writes a CSV with the given header; values are formatted with
    /// round-trip `Display`.
    pub fn csv<I, R>(&mut self, name: &str, header: &[&str], rows: I) -> Result<usize>
    where
        I: IntoIterator<Item = R>,
        R: IntoIterator<Item = String>,
    {
        let mut w = csv::Writer::from_path(self.path(name))?;
        w.write_record(header)?;
        let mut count = 0;
        for row in rows {
            w.write_record(row)?;
            count += 1;
        }
        w.flush().map_err(CliError::io(format!("writing {name}")))?;
        self.record(name, Some(count));
        Ok(count)
    }

    pub fn svg(&mut self, name: &str, svg: String) -> Result<()> {
        std::fs::write(self.path(name), svg).map_err(CliError::io(format!("writing {name}")))?;
        self.record(name, None);
        Ok(())
    }
}

/// Shorthand for building CSV rows.
#[macro_export]
macro_rules! row {
    ($($v:expr),* $(,)?) => {
        vec![$($v.to_string()),*]
    };
}
