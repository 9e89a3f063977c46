use serde::{Deserialize, Serialize};

use bayesbench_core::laplace_normal::{
    laplace_posterior, log_unnormalized_posterior_laplace, sample_laplace_posterior, LocationModel, PriorSpec,
};
use bayesbench_core::mcmc::rwmh_run;
use bayesbench_core::numerics::RandomStream;
use bayesbench_core::stats;

use super::{check, check_at_least, check_positive, density_rows, for_replicates, Experiment};
use crate::error::Result;
use crate::output::Outputs;
use crate::plot::{line_chart, stacked_traces};
use crate::row;

/// Random-walk Metropolis–Hastings on the double-exponential posterior,
/// compared with iid draws from the exact posterior mixture.
#[derive(Debug, Clone, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RwmhVsExact {
    pub seed: u64,
    pub replicates: usize,
    pub n: usize,
    pub iterations: usize,
    pub scale: f64,
    pub burn_in: usize,
    pub thin: usize,
    pub exact_draws: usize,
    pub generator: LocationModel,
    pub prior_sigma2: f64,
    pub mu: f64,
}

impl Default for RwmhVsExact {
    fn default() -> Self {
        Self {
            seed: 0,
            replicates: 1,
            n: 150,
            iterations: 100_000,
            scale: 1.0,
            burn_in: 1000,
            thin: 100,
            exact_draws: 10_000,
            generator: LocationModel::Laplace,
            prior_sigma2: 1.0,
            mu: 0.0,
        }
    }
}

struct Replicate {
    trace: bayesbench_core::mcmc::ChainTrace,
    kept: Vec<f64>,
    exact: Vec<f64>,
    ks: f64,
}

impl RwmhVsExact {
    /// Chain values at iterations `t` (1-based) with `t % thin == 0` and
    /// `t > burn_in`, the rows the trace CSV keeps after burn-in.
    fn kept(&self, column: &[f64]) -> Vec<f64> {
        (0..column.len()).filter(|t| (t + 1) % self.thin == 0 && t + 1 > self.burn_in).map(|t| column[t]).collect()
    }
}

impl Experiment for RwmhVsExact {
    fn validate(&self) -> std::result::Result<(), String> {
        check_at_least("replicates", self.replicates, 1)?;
        check_at_least("n", self.n, 1)?;
        check_at_least("thin", self.thin, 1)?;
        check_at_least("exact_draws", self.exact_draws, 2)?;
        check(self.iterations >= self.burn_in + 2 * self.thin, || {
            "`iterations` must exceed `burn_in` by at least two thinning intervals".into()
        })?;
        check_positive("scale", self.scale)?;
        check_positive("prior_sigma2", self.prior_sigma2)?;
        check(self.mu.is_finite(), || "`mu` must be finite".into())
    }

    fn run(&self, out: &mut Outputs) -> Result<()> {
        let prior = PriorSpec::new(self.prior_sigma2)?;
        let mut reps = for_replicates(self.replicates, |r| {
            let base = RandomStream::new(self.seed, r as u64);
            let sample = self.generator.simulate_sample(self.n, self.mu, &mut base.substream(0))?;
            let trace = rwmh_run(
                |m| log_unnormalized_posterior_laplace(&sample, &prior, m[0]),
                &[sample.mean()],
                self.scale,
                self.iterations,
                &mut base.substream(1),
            )?;
            let mix = laplace_posterior(&sample, &prior)?;
            let exact = sample_laplace_posterior(&mix, &mut base.substream(2), self.exact_draws)?;
            let kept = self.kept(&trace.column(0));
            let ks = stats::ks_two_sample(&kept, &exact);
            Ok(Replicate { trace, kept, exact, ks })
        })?;
        out.csv(
            "summary.csv",
            &["replicate", "acceptance_rate", "ks", "ks_critical", "kept"],
            reps.iter().enumerate().map(|(r, rep)| {
                let crit = stats::ks_two_sample_critical_1pct(rep.kept.len(), rep.exact.len());
                row![r, rep.trace.acceptance_rate(), rep.ks, crit, rep.kept.len()]
            }),
        )?;
        let first = reps.swap_remove(0);
        let rows = first.trace.write_csv(out.path("trace.csv"), self.thin)?;
        out.record("trace.csv", Some(rows));
        out.csv("exact_draws.csv", &["x"], first.exact.iter().map(|x| row![x]))?;
        let column = first.trace.column(0);
        let pts: Vec<(f64, f64)> = (0..column.len())
            .filter(|t| (t + 1) % self.thin == 0)
            .map(|t| ((t + 1) as f64, column[t]))
            .collect();
        let name = first.trace.names()[0].clone();
        out.svg("trace.svg", stacked_traces("random-walk Metropolis-Hastings trace", &[(name, pts)]))?;
        let (mut dens, chain) = density_rows("chain", &first.kept);
        let (exact_rows, exact) = density_rows("exact", &first.exact);
        dens.extend(exact_rows);
        out.csv("density.csv", &["group", "x", "density"], dens)?;
        out.svg("density.svg", line_chart("RWMH draws against exact posterior draws", "mu", "density", &[chain, exact]))
    }
}
