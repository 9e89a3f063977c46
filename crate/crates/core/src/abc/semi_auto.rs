use std::sync::Arc;

use nalgebra::{DMatrix, DVector};

use super::model::GenerativeModel;
use super::reject::{simulate_records, AbcReferenceTable, Simulations};
use super::summary::SummaryStatistic;
use crate::error::{domain, Error, Result};
use crate::numerics::RandomStream;

// |R_jj| below this fraction of the column norm marks a dependent column.
const RANK_TOL: f64 = 1e-10;

/// Linear regression of θ on candidate statistics, used as a summary: its
/// output estimates `E[θ | x]`.
#[derive(Clone)]
pub struct SemiAutoSummary {
    candidate: Arc<dyn SummaryStatistic>,
    // (q + 1) × p, intercept in row 0
    weights: DMatrix<f64>,
    pilot_size: usize,
}

impl std::fmt::Debug for SemiAutoSummary {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("SemiAutoSummary")
            .field("candidate", &self.candidate.name())
            .field("weights", &self.weights)
            .field("pilot_size", &self.pilot_size)
            .finish()
    }
}

impl SemiAutoSummary {
    /// Least-squares fit with intercept from `stats` (rows of length `q`)
    /// to `theta` (rows of length `p`), by Householder QR.
    pub fn fit_pairs(candidate: Arc<dyn SummaryStatistic>, theta: &[f64], stats: &[f64], p: usize) -> Result<Self> {
        let q = candidate.dim();
        if p == 0 || q == 0 || theta.len() % p != 0 || stats.len() % q != 0 {
            return domain("parameter and statistic rows have inconsistent dimensions");
        }
        let n = theta.len() / p;
        if stats.len() / q != n {
            return domain("parameter and statistic tables have different lengths");
        }
        if n < q + 1 {
            return domain(format!("{n} pairs cannot determine {} coefficients", q + 1));
        }
        let x = DMatrix::from_fn(n, q + 1, |i, j| if j == 0 { 1.0 } else { stats[i * q + j - 1] });
        let y = DMatrix::from_fn(n, p, |i, j| theta[i * p + j]);
        let norms: Vec<f64> = x.column_iter().map(|c| c.norm()).collect();
        let qr = x.qr();
        let r = qr.r();
        let dependent: Vec<usize> = (0..=q).filter(|&j| !(r[(j, j)].abs() > RANK_TOL * norms[j])).collect();
        if !dependent.is_empty() {
            // report candidate columns; column 0 of the design is the intercept
            let columns = dependent.iter().map(|&j| j.saturating_sub(1)).collect();
            return Err(Error::Collinearity { columns });
        }
        let qty = qr.q().transpose() * y;
        let weights = r
            .solve_upper_triangular(&qty)
            .ok_or_else(|| Error::InvariantViolation("triangular solve failed after rank check".into()))?;
        Ok(Self { candidate, weights, pilot_size: n })
    }

    pub fn candidate(&self) -> &Arc<dyn SummaryStatistic> {
        &self.candidate
    }

    /// The `(q + 1) × p` weight matrix, intercept first.
    pub fn weights(&self) -> &DMatrix<f64> {
        &self.weights
    }

    pub fn pilot_size(&self) -> usize {
        self.pilot_size
    }

    /// Fitted `E[θ | x]` from a candidate-statistic vector.
    pub fn apply(&self, stats: &[f64]) -> Vec<f64> {
        let s = DVector::from_iterator(stats.len() + 1, std::iter::once(1.0).chain(stats.iter().copied()));
        (self.weights.transpose() * s).iter().copied().collect()
    }
}

impl SummaryStatistic for SemiAutoSummary {
    fn name(&self) -> String {
        format!("semi-auto({})", self.candidate.name())
    }
    fn dim(&self) -> usize {
        self.weights.ncols()
    }
    fn eval(&self, x: &[f64]) -> Result<Vec<f64>> {
        Ok(self.apply(&self.candidate.eval(x)?))
    }
}

fn pilot_stream(rng: &RandomStream) -> RandomStream {
    rng.substream(u64::MAX)
}

fn stage_two_stream(rng: &RandomStream) -> RandomStream {
    rng.substream(u64::MAX - 1)
}

/// Stage one: simulate a pilot table and regress θ on the candidate
/// statistics.
pub fn semi_auto_summary_fit(
    model: &dyn GenerativeModel,
    candidate: Arc<dyn SummaryStatistic>,
    pilot_size: usize,
    rng: &RandomStream,
) -> Result<SemiAutoSummary> {
    fit_with_pilot(model, candidate, pilot_size, rng).map(|(s, _)| s)
}

fn fit_with_pilot(
    model: &dyn GenerativeModel,
    candidate: Arc<dyn SummaryStatistic>,
    pilot_size: usize,
    rng: &RandomStream,
) -> Result<(SemiAutoSummary, Simulations)> {
    if pilot_size < 10 * candidate.dim() {
        return domain(format!(
            "pilot size {pilot_size} is below ten times the candidate dimension {}",
            candidate.dim()
        ));
    }
    let pilot = simulate_records(&[(model, 1.0)], candidate.as_ref(), pilot_size, &pilot_stream(rng))?;
    let fit = SemiAutoSummary::fit_pairs(candidate, &pilot.theta, &pilot.summaries, pilot.param_dim)?;
    Ok((fit, pilot))
}

/// Two-stage semi-automatic ABC: fit the regression summary on a pilot run,
/// then run rejection ABC with it. Stage two uses fresh simulations unless
/// `reuse_pilot` is set, in which case pilot records fill the table first;
/// reuse lets the fit and the acceptance step see the same draws, which can
/// bias the result.
#[allow(clippy::too_many_arguments)]
pub fn semi_auto_abc(
    model: &dyn GenerativeModel,
    observed: &[f64],
    candidate: Arc<dyn SummaryStatistic>,
    pilot_size: usize,
    n: usize,
    quantile_level: f64,
    reuse_pilot: bool,
    rng: &RandomStream,
) -> Result<(SemiAutoSummary, AbcReferenceTable)> {
    if n < 100 {
        return domain(format!("rejection ABC needs at least 100 simulations, got {n}"));
    }
    let (fit, pilot) = fit_with_pilot(model, candidate, pilot_size, rng)?;
    let observed_summary = fit.eval(observed)?;
    let p = pilot.param_dim;
    let q = pilot.summary_dim;
    let reused = if reuse_pilot { n.min(pilot_size) } else { 0 };
    let mut sims = Simulations {
        model: vec![0; reused],
        theta: pilot.theta[..reused * p].to_vec(),
        summaries: pilot.summaries[..reused * q].chunks(q).flat_map(|s| fit.apply(s)).collect(),
        param_dim: p,
        summary_dim: p,
    };
    if n > reused {
        let fresh = simulate_records(&[(model, 1.0)], &fit, n - reused, &stage_two_stream(rng))?;
        sims.model.extend(fresh.model);
        sims.theta.extend(fresh.theta);
        sims.summaries.extend(fresh.summaries);
    }
    let table = AbcReferenceTable::from_simulations(sims, observed_summary, fit.name(), vec![model.name()], quantile_level, rng)?;
    Ok((fit, table))
}
