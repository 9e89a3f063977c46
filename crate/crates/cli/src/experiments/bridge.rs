use serde::{Deserialize, Serialize};

use bayesbench_core::evidence::{bridge_estimate, bridge_inputs, BridgeOptions};
use bayesbench_core::laplace_normal::{
    exact_log_bayes_factor, laplace_posterior, normal_posterior, sample_laplace_posterior, LocationModel, PriorSpec,
};
use bayesbench_core::numerics::RandomStream;

use super::{check, check_at_least, check_positive, density_rows, for_replicates, Experiment};
use crate::error::Result;
use crate::output::Outputs;
use crate::plot::{convergence_chart, line_chart, Series};
use crate::row;

const GRID: usize = 400;

/// Optimal-bridge estimate of log B₀₁ from exact posterior draws, its
/// fixed-point iterates, and exact-posterior draws against the density.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BridgeVsExact {
    pub seed: u64,
    pub replicates: usize,
    pub n: usize,
    pub draws: usize,
    pub posterior_draws: usize,
    pub generator: LocationModel,
    pub prior_sigma2: f64,
    pub mu: f64,
    pub max_iterations: usize,
    pub rel_tol: f64,
    pub initial: f64,
    pub batches: usize,
}

impl Default for BridgeVsExact {
    fn default() -> Self {
        let o = BridgeOptions::default();
        Self {
            seed: 0,
            replicates: 1,
            n: 150,
            draws: 10_000,
            posterior_draws: 10_000,
            generator: LocationModel::Laplace,
            prior_sigma2: 1.0,
            mu: 0.0,
            max_iterations: o.max_iterations,
            rel_tol: o.rel_tol,
            initial: o.initial,
            batches: o.batches,
        }
    }
}

struct Replicate {
    sample: Vec<f64>,
    exact: f64,
    log_bf: f64,
    std_error: f64,
    iterates: Vec<f64>,
}

impl Experiment for BridgeVsExact {
    fn validate(&self) -> std::result::Result<(), String> {
        check_at_least("replicates", self.replicates, 1)?;
        check_at_least("n", self.n, 1)?;
        check_at_least("draws", self.draws, 100)?;
        check_at_least("posterior_draws", self.posterior_draws, 1)?;
        check_at_least("max_iterations", self.max_iterations, 1)?;
        check_at_least("batches", self.batches, 2)?;
        check_positive("prior_sigma2", self.prior_sigma2)?;
        check_positive("rel_tol", self.rel_tol)?;
        check_positive("initial", self.initial)?;
        check(self.mu.is_finite(), || "`mu` must be finite".into())
    }

    fn run(&self, out: &mut Outputs) -> Result<()> {
        let prior = PriorSpec::new(self.prior_sigma2)?;
        let opts = BridgeOptions {
            max_iterations: self.max_iterations,
            rel_tol: self.rel_tol,
            initial: self.initial,
            batches: self.batches,
        };
        let reps = for_replicates(self.replicates, |r| {
            let base = RandomStream::new(self.seed, r as u64);
            let sample = self.generator.simulate_sample(self.n, self.mu, &mut base.substream(0))?;
            let mix = laplace_posterior(&sample, &prior)?;
            let inputs = bridge_inputs(
                &mix,
                normal_posterior(&sample, &prior),
                &sample,
                &prior,
                self.draws,
                self.draws,
                &mut base.substream(1),
            )?;
            let (est, state) = bridge_estimate(&inputs, &opts)?;
            Ok(Replicate {
                exact: exact_log_bayes_factor(&sample, &prior)?,
                sample: sample.values().to_vec(),
                log_bf: est.log_bf,
                std_error: est.std_error,
                iterates: state.log_history().to_vec(),
            })
        })?;

        let mut iter_rows = Vec::new();
        let mut est_rows = Vec::new();
        for (r, rep) in reps.iter().enumerate() {
            iter_rows.extend(rep.iterates.iter().enumerate().map(|(t, v)| row![r, t + 1, v, rep.exact]));
            est_rows.push(row![r, "bridge", rep.log_bf, rep.std_error, self.draws, rep.exact]);
            est_rows.push(row![r, "exact", rep.exact, 0.0, 0, rep.exact]);
        }
        out.csv("iterates.csv", &["replicate", "iteration", "log_bf", "exact"], iter_rows)?;
        out.csv("estimates.csv", &["replicate", "method", "log_bf", "std_error", "draws", "exact"], est_rows)?;

        let first = &reps[0];
        let conv: Vec<(f64, f64)> = first.iterates.iter().enumerate().map(|(t, &v)| ((t + 1) as f64, v)).collect();
        let truth: Vec<(f64, f64)> = conv.iter().map(|&(t, _)| (t, first.exact)).collect();
        out.csv(
            "bridge_convergence.csv",
            &["iteration", "estimate", "truth"],
            conv.iter().map(|(t, v)| row![t, v, first.exact]),
        )?;
        out.svg("bridge_convergence.svg", convergence_chart("bridge sampling iterates", &conv, Some(&truth)))?;
        out.csv("sample.csv", &["x"], first.sample.iter().map(|x| row![x]))?;

        // exact posterior draws for the first replicate against the density
        let sample = bayesbench_core::laplace_normal::SortedSample::new(first.sample.clone())?;
        let mix = laplace_posterior(&sample, &prior)?;
        let draws = sample_laplace_posterior(&mix, &mut RandomStream::new(self.seed, 0).substream(2), self.posterior_draws)?;
        out.csv("posterior_draws.csv", &["x"], draws.iter().map(|x| row![x]))?;
        let (lo, hi) = (mix.quantile(0.0005)?, mix.quantile(0.9995)?);
        let exact_pts: Vec<(f64, f64)> = (0..GRID)
            .map(|k| lo + (hi - lo) * k as f64 / (GRID - 1) as f64)
            .map(|x| (x, mix.density(x)))
            .collect();
        let (mut rows, kde_series) = density_rows("draws", &draws);
        rows.extend(exact_pts.iter().map(|(x, d)| row!["exact", x, d]));
        out.csv("posterior_density.csv", &["group", "x", "density"], rows)?;
        out.svg(
            "posterior_density.svg",
            line_chart("exact double-exponential posterior", "mu", "density", &[kde_series, Series::new("exact", exact_pts)]),
        )
    }
}
