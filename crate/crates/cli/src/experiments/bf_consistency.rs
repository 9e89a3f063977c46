use serde::{Deserialize, Serialize};

use bayesbench_core::laplace_normal::{exact_log_bayes_factor, LocationModel, PriorSpec};
use bayesbench_core::numerics::RandomStream;

use super::{check, check_at_least, check_positive, density_rows, for_replicates, Experiment};
use crate::error::Result;
use crate::output::Outputs;
use crate::plot::line_chart;
use crate::row;

/// Exact log B₀₁ (double-exponential over normal) on repeated samples from
/// each model at several sample sizes.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct BfConsistency {
    pub seed: u64,
    pub replicates: usize,
    pub sample_sizes: Vec<usize>,
    pub prior_sigma2: f64,
    pub mu: f64,
}

impl Default for BfConsistency {
    fn default() -> Self {
        Self { seed: 0, replicates: 100, sample_sizes: vec![50, 200], prior_sigma2: 1.0, mu: 0.0 }
    }
}

const MODELS: [LocationModel; 2] = [LocationModel::Normal, LocationModel::Laplace];

impl Experiment for BfConsistency {
    fn validate(&self) -> std::result::Result<(), String> {
        check_at_least("replicates", self.replicates, 1)?;
        check(!self.sample_sizes.is_empty(), || "`sample_sizes` must not be empty".into())?;
        check(self.sample_sizes.iter().all(|&n| n >= 1), || "`sample_sizes` entries must be at least 1".into())?;
        check_positive("prior_sigma2", self.prior_sigma2)?;
        check(self.mu.is_finite(), || "`mu` must be finite".into())
    }

    fn run(&self, out: &mut Outputs) -> Result<()> {
        let prior = PriorSpec::new(self.prior_sigma2)?;
        let per_rep = for_replicates(self.replicates, |r| {
            let base = RandomStream::new(self.seed, r as u64);
            let mut v = Vec::with_capacity(2 * self.sample_sizes.len());
            for (i, &n) in self.sample_sizes.iter().enumerate() {
                for (m, model) in MODELS.iter().enumerate() {
                    let mut rng = base.substream((2 * i + m) as u64);
                    let s = model.simulate_sample(n, self.mu, &mut rng)?;
                    v.push(exact_log_bayes_factor(&s, &prior)?);
                }
            }
            Ok(v)
        })?;
        let mut rows = Vec::new();
        let mut dens_rows = Vec::new();
        let mut series = Vec::new();
        for (m, model) in MODELS.iter().enumerate() {
            for (i, &n) in self.sample_sizes.iter().enumerate() {
                let vals: Vec<f64> = per_rep.iter().map(|v| v[2 * i + m]).collect();
                rows.extend(vals.iter().enumerate().map(|(r, b)| row![model, n, r, b]));
                let (d, s) = density_rows(&format!("{model} n={n}"), &vals);
                dens_rows.extend(d);
                series.push(s);
            }
        }
        out.csv("log_bf.csv", &["model", "n", "replicate", "log_bf"], rows)?;
        out.csv("log_bf_density.csv", &["group", "x", "density"], dens_rows)?;
        out.svg("log_bf_density.svg", line_chart("exact log Bayes factor by generating model", "log B01", "density", &series))
    }
}
