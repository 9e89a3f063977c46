use std::path::Path;

use crate::error::{domain, Error, Result};

use super::posterior::PosteriorMixture;

const GRID_POINTS: usize = 4096;
const MASS_TOL: f64 = 1e-6;
// effective support: quantiles at this distance from 0 and 1
const SUPPORT_TAIL: f64 = 1e-12;

/// Highest posterior density region `{μ : π(μ|x) ≥ κ}` of credibility α.
#[derive(Debug, Clone, PartialEq)]
pub struct HpdRegion {
    pub level_kappa: f64,
    pub intervals: Vec<(f64, f64)>,
    pub credibility: f64,
}

impl HpdRegion {
    pub fn contains(&self, mu: f64) -> bool {
        self.intervals.iter().any(|&(lo, hi)| lo <= mu && mu <= hi)
    }

    pub fn mass(&self, mix: &PosteriorMixture) -> Result<f64> {
        self.intervals
            .iter()
            .map(|&(lo, hi)| Ok(mix.cdf(hi)? - mix.cdf(lo)?))
            .sum()
    }
}

struct LevelSet {
    intervals: Vec<(f64, f64)>,
    mass: f64,
}

fn refine_crossing(mix: &PosteriorMixture, log_kappa: f64, mut inside: f64, mut outside: f64) -> f64 {
    for _ in 0..80 {
        let mid = 0.5 * (inside + outside);
        if mid == inside || mid == outside {
            break;
        }
        if mix.log_density(mid) >= log_kappa {
            inside = mid;
        } else {
            outside = mid;
        }
    }
    inside
}

fn level_set(mix: &PosteriorMixture, grid: &[f64], log_dens: &[f64], log_kappa: f64) -> Result<LevelSet> {
    let mut intervals = Vec::new();
    let mut start: Option<f64> = None;
    for k in 0..grid.len() {
        let above = log_dens[k] >= log_kappa;
        match (above, start) {
            (true, None) => {
                start = Some(if k == 0 { grid[0] } else { refine_crossing(mix, log_kappa, grid[k], grid[k - 1]) });
            }
            (false, Some(lo)) => {
                intervals.push((lo, refine_crossing(mix, log_kappa, grid[k - 1], grid[k])));
                start = None;
            }
            _ => {}
        }
    }
    if let Some(lo) = start {
        intervals.push((lo, *grid.last().unwrap()));
    }
    let mut mass = 0.0;
    for &(lo, hi) in &intervals {
        mass += mix.cdf(hi)? - mix.cdf(lo)?;
    }
    Ok(LevelSet { intervals, mass })
}

/// HPD region of credibility `alpha` by bisection on the density level κ.
///
/// Level sets are located on a 4096-point grid over the effective support
/// and their endpoints refined by bisection on `density − κ`.
pub fn hpd_region(mix: &PosteriorMixture, alpha: f64) -> Result<HpdRegion> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return domain(format!("credibility must lie in (0, 1), got {alpha}"));
    }
    let lo = mix.quantile(SUPPORT_TAIL)?;
    let hi = mix.quantile(1.0 - SUPPORT_TAIL)?;
    let grid: Vec<f64> = (0..GRID_POINTS)
        .map(|k| lo + (hi - lo) * k as f64 / (GRID_POINTS - 1) as f64)
        .collect();
    let log_dens: Vec<f64> = grid.iter().map(|&g| mix.log_density(g)).collect();
    let mut top = log_dens.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let mut bottom = log_dens.iter().copied().fold(f64::INFINITY, f64::min);

    let mut best: Option<(f64, LevelSet)> = None;
    for _ in 0..200 {
        let mid = 0.5 * (top + bottom);
        let set = level_set(mix, &grid, &log_dens, mid)?;
        let gap = set.mass - alpha;
        let done = gap.abs() < MASS_TOL;
        if gap > 0.0 {
            bottom = mid;
        } else {
            top = mid;
        }
        if best.as_ref().is_none_or(|(_, b)| gap.abs() < (b.mass - alpha).abs()) {
            best = Some((mid, set));
        }
        if done || top - bottom < 1e-14 {
            break;
        }
    }
    let (best_kappa, best) = best.ok_or_else(|| Error::InvariantViolation("HPD bisection never ran".into()))?;
    if best.intervals.is_empty() {
        return Err(Error::InvariantViolation("HPD level set is empty".into()));
    }
    Ok(HpdRegion {
        level_kappa: best_kappa.exp(),
        intervals: best.intervals,
        credibility: alpha,
    })
}

/// Writes one row `lo,hi,kappa,alpha` per interval.
pub fn write_hpd_csv(region: &HpdRegion, path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["lo", "hi", "kappa", "alpha"])?;
    for &(lo, hi) in &region.intervals {
        w.write_record([lo, hi, region.level_kappa, region.credibility].map(|v| format!("{v}")))?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_hpd_csv(path: impl AsRef<Path>) -> Result<HpdRegion> {
    let mut rdr = csv::Reader::from_path(path)?;
    let mut intervals = Vec::new();
    let (mut kappa, mut alpha) = (f64::NAN, f64::NAN);
    for rec in rdr.records() {
        let rec = rec?;
        let vals: Vec<f64> = rec
            .iter()
            .map(|s| s.trim().parse::<f64>().map_err(|_| Error::Data(format!("not a number: {s}"))))
            .collect::<Result<_>>()?;
        if vals.len() != 4 {
            return Err(Error::Data("HPD rows need lo,hi,kappa,alpha".into()));
        }
        intervals.push((vals[0], vals[1]));
        kappa = vals[2];
        alpha = vals[3];
    }
    Ok(HpdRegion { level_kappa: kappa, intervals, credibility: alpha })
}
