//! The named experiments. Each is a flat, serde-deserializable config with a
//! `run` method writing into an [`Outputs`] directory. Replicate `r` draws
//! from streams derived from `RandomStream::new(seed, r)`, so results do not
//! depend on how replicates are scheduled.

mod abc_mc;
mod bf_consistency;
mod bf_mc;
mod bridge;
mod gibbs;
mod ma2_abc;
mod rwmh;

use rayon::prelude::*;
use serde::de::DeserializeOwned;
use serde::Serialize;

use bayesbench_core::stats;

use crate::error::Result;
use crate::output::Outputs;
use crate::plot::Series;

pub use abc_mc::AbcMcMedianMad;
pub use bf_consistency::BfConsistency;
pub use bf_mc::BfMcConvergence;
pub use bridge::BridgeVsExact;
pub use gibbs::GibbsGrowth;
pub use ma2_abc::Ma2Abc;
pub use rwmh::RwmhVsExact;

const DENSITY_POINTS: usize = 256;

pub trait Experiment: Serialize + DeserializeOwned + Sync {
    /// Checks value ranges; the message names the offending key.
    fn validate(&self) -> std::result::Result<(), String>;
    fn run(&self, out: &mut Outputs) -> Result<()>;
}

/// Runs `f` for every replicate index on the current thread pool and
/// returns the results in index order.
pub(crate) fn for_replicates<T: Send>(n: usize, f: impl Fn(usize) -> Result<T> + Sync + Send) -> Result<Vec<T>> {
    (0..n).into_par_iter().map(f).collect()
}

/// Kernel density rows `(group, x, density)` and the matching plot series.
pub(crate) fn density_rows(group: &str, xs: &[f64]) -> (Vec<Vec<String>>, Series) {
    let finite: Vec<f64> = xs.iter().copied().filter(|v| v.is_finite()).collect();
    let pts = if finite.len() > 1 && stats::sd(&finite) > 0.0 { stats::kde(&finite, DENSITY_POINTS) } else { Vec::new() };
    let rows = pts.iter().map(|(x, d)| crate::row![group, x, d]).collect();
    (rows, Series::new(group, pts))
}

pub(crate) fn check(ok: bool, msg: impl FnOnce() -> String) -> std::result::Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(msg())
    }
}

pub(crate) fn check_positive(key: &str, v: f64) -> std::result::Result<(), String> {
    check(v > 0.0 && v.is_finite(), || format!("`{key}` must be positive and finite, got {v}"))
}

pub(crate) fn check_at_least(key: &str, v: usize, min: usize) -> std::result::Result<(), String> {
    check(v >= min, || format!("`{key}` must be at least {min}, got {v}"))
}
