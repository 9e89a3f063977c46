//! Runs an experiment into a staging directory and moves the results into
//! place only after every file has been written.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::config::{load_config_map, resolve, ExperimentName, Overrides};
use crate::error::{CliError, Result};
use crate::experiments::{self, Experiment};
use crate::output::{OutputFile, Outputs};

pub const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub experiment: ExperimentName,
    pub version: String,
    pub config: Value,
    pub duration_seconds: f64,
    pub files: Vec<OutputFile>,
}

impl RunManifest {
    pub fn read(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(CliError::io(format!("reading {}", path.display())))?;
        Ok(serde_json::from_str(&text)?)
    }

    /// Checks that every listed file exists in `dir` and that CSVs hold the
    /// stated number of data rows.
    pub fn verify(&self, dir: &Path) -> Result<()> {
        for f in &self.files {
            let p = dir.join(&f.path);
            if !p.is_file() {
                return Err(CliError::Runtime(format!("listed file {} is missing", p.display())));
            }
            if let Some(rows) = f.rows {
                let count = csv::Reader::from_path(&p)?.records().count();
                if count != rows {
                    return Err(CliError::Runtime(format!("{} has {count} rows, manifest says {rows}", f.path)));
                }
            }
        }
        Ok(())
    }
}

fn staging_dir(out: &Path, name: ExperimentName) -> PathBuf {
    let leaf = out.file_name().map(|s| s.to_string_lossy().into_owned()).unwrap_or_else(|| "out".into());
    let parent = out.parent().filter(|p| !p.as_os_str().is_empty()).unwrap_or(Path::new("."));
    parent.join(format!(".{leaf}.{name}.staging-{}", std::process::id()))
}

fn commit(staging: &Path, out: &Path, files: &[OutputFile]) -> Result<()> {
    if !out.exists() {
        return std::fs::rename(staging, out).map_err(CliError::io(format!("moving results into {}", out.display())));
    }
    for name in files.iter().map(|f| f.path.as_str()).chain([MANIFEST]) {
        std::fs::rename(staging.join(name), out.join(name)).map_err(CliError::io(format!("moving {name}")))?;
    }
    std::fs::remove_dir_all(staging).map_err(CliError::io("removing staging directory"))
}

fn execute<E: Experiment>(
    name: ExperimentName,
    map: serde_json::Map<String, Value>,
    overrides: &Overrides,
    out: &Path,
    threads: Option<usize>,
) -> Result<RunManifest> {
    let cfg: E = resolve(map, overrides)?;
    cfg.validate().map_err(CliError::Config)?;
    let echo = serde_json::to_value(&cfg)?;
    if out.exists() && !out.is_dir() {
        return Err(CliError::Io {
            context: format!("output path {}", out.display()),
            source: std::io::Error::new(std::io::ErrorKind::AlreadyExists, "exists and is not a directory"),
        });
    }
    if let Some(parent) = out.parent().filter(|p| !p.as_os_str().is_empty()) {
        std::fs::create_dir_all(parent).map_err(CliError::io(format!("creating {}", parent.display())))?;
    }
    let staging = staging_dir(out, name);
    if staging.exists() {
        let _ = std::fs::remove_dir_all(&staging);
    }
    std::fs::create_dir(&staging).map_err(CliError::io(format!("creating {}", staging.display())))?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(threads.unwrap_or(0))
        .build()
        .map_err(|e| CliError::Runtime(e.to_string()))?;
    let start = Instant::now();
    let mut outputs = Outputs::new(&staging);
    let result = pool.install(|| cfg.run(&mut outputs)).and_then(|()| {
        let manifest = RunManifest {
            experiment: name,
            version: env!("CARGO_PKG_VERSION").to_string(),
            config: echo,
            duration_seconds: start.elapsed().as_secs_f64(),
            files: outputs.files().to_vec(),
        };
        let text = serde_json::to_string_pretty(&manifest)? + "\n";
        std::fs::write(staging.join(MANIFEST), text).map_err(CliError::io("writing manifest"))?;
        commit(&staging, out, &manifest.files)?;
        Ok(manifest)
    });
    if result.is_err() {
        let _ = std::fs::remove_dir_all(&staging);
    }
    result
}

/// Resolves the configuration for `name`, runs it on `threads` workers (the
/// rayon default when `None`) and writes outputs plus `manifest.json` into
/// `out`. Results do not depend on the thread count.
pub fn run_experiment(
    name: ExperimentName,
    config: Option<&Path>,
    overrides: &Overrides,
    out: &Path,
    threads: Option<usize>,
) -> Result<RunManifest> {
    let map = load_config_map(config, name)?;
    match name {
        ExperimentName::BfConsistency => execute::<experiments::BfConsistency>(name, map, overrides, out, threads),
        ExperimentName::BfMcConvergence => execute::<experiments::BfMcConvergence>(name, map, overrides, out, threads),
        ExperimentName::BridgeVsExact => execute::<experiments::BridgeVsExact>(name, map, overrides, out, threads),
        ExperimentName::RwmhVsExact => execute::<experiments::RwmhVsExact>(name, map, overrides, out, threads),
        ExperimentName::GibbsGrowth => execute::<experiments::GibbsGrowth>(name, map, overrides, out, threads),
        ExperimentName::Ma2Abc => execute::<experiments::Ma2Abc>(name, map, overrides, out, threads),
        ExperimentName::AbcMcMedianMad => execute::<experiments::AbcMcMedianMad>(name, map, overrides, out, threads),
    }
}
