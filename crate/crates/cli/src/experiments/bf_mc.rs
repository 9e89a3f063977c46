use serde::{Deserialize, Serialize};

use bayesbench_core::evidence::prior_mc_bayes_factor_path;
use bayesbench_core::laplace_normal::{exact_log_bayes_factor, LocationModel, PriorSpec};
use bayesbench_core::numerics::RandomStream;

use super::{check, check_at_least, check_positive, for_replicates, Experiment};
use crate::error::Result;
use crate::output::Outputs;
use crate::plot::convergence_chart;
use crate::row;

/// Prior-sampling Monte Carlo estimates of log B₀₁ on one fixed sample,
/// repeated across independent streams, with the running estimate of the
/// first replicate.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BfMcConvergence {
    pub seed: u64,
    pub replicates: usize,
    pub n: usize,
    pub draws: usize,
    pub path_every: usize,
    pub generator: LocationModel,
    pub prior_sigma2: f64,
    pub mu: f64,
}

impl Default for BfMcConvergence {
    fn default() -> Self {
        Self {
            seed: 0,
            replicates: 100,
            n: 19,
            draws: 100_000,
            path_every: 500,
            generator: LocationModel::Normal,
            prior_sigma2: 1.0,
            mu: 0.0,
        }
    }
}

impl Experiment for BfMcConvergence {
    fn validate(&self) -> std::result::Result<(), String> {
        check_at_least("replicates", self.replicates, 1)?;
        check_at_least("n", self.n, 1)?;
        check_at_least("draws", self.draws, 100)?;
        check_at_least("path_every", self.path_every, 1)?;
        check_positive("prior_sigma2", self.prior_sigma2)?;
        check(self.mu.is_finite(), || "`mu` must be finite".into())
    }

    fn run(&self, out: &mut Outputs) -> Result<()> {
        let prior = PriorSpec::new(self.prior_sigma2)?;
        let mut data_rng = RandomStream::new(self.seed, 0).substream(u64::MAX);
        let sample = self.generator.simulate_sample(self.n, self.mu, &mut data_rng)?;
        let exact = exact_log_bayes_factor(&sample, &prior)?;
        let results = for_replicates(self.replicates, |r| {
            let mut rng = RandomStream::new(self.seed, r as u64);
            Ok(prior_mc_bayes_factor_path(&sample, &prior, self.draws, self.path_every, &mut rng)?)
        })?;
        out.csv("sample.csv", &["x"], sample.values().iter().map(|x| row![x]))?;
        out.csv(
            "estimates.csv",
            &["replicate", "method", "log_bf", "std_error", "draws", "exact"],
            results.iter().enumerate().map(|(r, (e, _))| row![r, e.method, e.log_bf, e.std_error, e.draws_used, exact]),
        )?;
        let path = &results[0].1;
        out.csv("convergence.csv", &["iteration", "estimate", "truth"], path.iter().map(|(t, v)| row![t, v, exact]))?;
        let est: Vec<(f64, f64)> = path.iter().map(|&(t, v)| (t as f64, v)).collect();
        let truth: Vec<(f64, f64)> = est.iter().map(|&(t, _)| (t, exact)).collect();
        out.svg("convergence.svg", convergence_chart("prior Monte Carlo log Bayes factor", &est, Some(&truth)))
    }
}
