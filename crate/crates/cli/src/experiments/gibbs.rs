use std::path::PathBuf;

use serde::{Deserialize, Serialize};

use bayesbench_core::mcmc::{gibbs_growth_run, intervals_overlap, summarize_chain, ComponentSummary, GrowthDataset, GrowthHyper};
use bayesbench_core::numerics::RandomStream;

use super::{check, check_at_least, check_positive, for_replicates, Experiment};
use crate::error::{CliError, Result};
use crate::output::Outputs;
use crate::plot::{line_chart, stacked_traces, Series};
use crate::row;

const TRACED: [&str; 7] = ["beta1", "beta2", "mu1", "mu2", "sigma2_1", "sigma2_2", "tau2"];

/// Gibbs sampler for the two-sex growth model, by default on the bundled
/// dental measurements.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct GibbsGrowth {
    pub seed: u64,
    pub replicates: usize,
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub a: f64,
    pub sigma2_beta: f64,
    pub sigma2_mu: f64,
    /// Optional CSV in `subject,sex,age,measurement` layout.
    pub data: Option<PathBuf>,
}

impl Default for GibbsGrowth {
    fn default() -> Self {
        let h = GrowthHyper::default();
        Self {
            seed: 0,
            replicates: 1,
            iterations: 120_000,
            burn_in: 20_000,
            thin: 10,
            a: h.a,
            sigma2_beta: h.sigma2_beta,
            sigma2_mu: h.sigma2_mu,
            data: None,
        }
    }
}

fn find<'a>(s: &'a [ComponentSummary], name: &str) -> Result<&'a ComponentSummary> {
    s.iter().find(|c| c.name == name).ok_or_else(|| CliError::Runtime(format!("component {name} missing from the chain")))
}

impl Experiment for GibbsGrowth {
    fn validate(&self) -> std::result::Result<(), String> {
        check_at_least("replicates", self.replicates, 1)?;
        check_at_least("thin", self.thin, 1)?;
        check(self.iterations > self.burn_in + 1, || "`iterations` must exceed `burn_in` by at least 2".into())?;
        check_positive("a", self.a)?;
        check_positive("sigma2_beta", self.sigma2_beta)?;
        check_positive("sigma2_mu", self.sigma2_mu)
    }

    fn run(&self, out: &mut Outputs) -> Result<()> {
        let data = match &self.data {
            Some(p) => GrowthDataset::from_csv(p)?,
            None => GrowthDataset::dental(),
        };
        let hyper = GrowthHyper { a: self.a, sigma2_beta: self.sigma2_beta, sigma2_mu: self.sigma2_mu };
        let mut reps = for_replicates(self.replicates, |r| {
            let mut rng = RandomStream::new(self.seed, r as u64);
            let trace = gibbs_growth_run(&data, &hyper, self.iterations, &mut rng)?;
            let summary = summarize_chain(&trace, self.burn_in)?;
            Ok((trace, summary))
        })?;

        let mut rows = Vec::new();
        let mut overlap_rows = Vec::new();
        for (r, (_, summary)) in reps.iter().enumerate() {
            rows.extend(summary.iter().map(|c| row![r, c.name, c.mean, c.sd, c.q025, c.q975]));
            for (a, b) in [("beta1", "beta2"), ("mu1", "mu2")] {
                let overlap = intervals_overlap(find(summary, a)?, find(summary, b)?);
                overlap_rows.push(row![r, format!("{a}-{b}"), overlap]);
            }
        }
        out.csv("summary.csv", &["replicate", "component", "mean", "sd", "q025", "q975"], rows)?;
        out.csv("intervals.csv", &["replicate", "pair", "overlap"], overlap_rows)?;

        let (trace, summary) = reps.swap_remove(0);
        let n = trace.write_csv(out.path("trace.csv"), self.thin)?;
        out.record("trace.csv", Some(n));
        let mut dens = Vec::new();
        let mut series = Vec::new();
        for name in ["beta1", "beta2", "mu1", "mu2"] {
            let c = find(&summary, name)?;
            dens.extend(c.density.iter().map(|(x, d)| row![name, x, d]));
            series.push(Series::new(name, c.density.clone()));
        }
        out.csv("density.csv", &["group", "x", "density"], dens)?;
        out.svg("density_beta.svg", line_chart("posterior densities of the slopes", "beta", "density", &series[..2]))?;
        out.svg("density_mu.svg", line_chart("posterior densities of the intercept means", "mu", "density", &series[2..]))?;
        let panels: Vec<(String, Vec<(f64, f64)>)> = TRACED
            .iter()
            .filter_map(|name| trace.column_by_name(name).map(|col| (name.to_string(), col)))
            .map(|(name, col)| {
                let pts = (0..col.len()).filter(|t| (t + 1) % self.thin == 0).map(|t| ((t + 1) as f64, col[t])).collect();
                (name, pts)
            })
            .collect();
        out.svg("trace.svg", stacked_traces("Gibbs sampler traces", &panels))
    }
}
