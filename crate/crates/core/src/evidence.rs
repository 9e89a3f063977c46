//! Stochastic Bayes factor estimators: shared-prior Monte Carlo, iterative
//! (Meng–Wong) bridge sampling, and plain posterior expectations.

use std::fmt;
use std::path::Path;

use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::laplace_normal::{
    log_likelihood_laplace, log_likelihood_normal, log_unnormalized_posterior_laplace,
    log_unnormalized_posterior_normal, PosteriorMixture, PriorSpec, SortedSample,
};
use crate::numerics::{log_add_exp, log_sum_exp, RandomStream};
use crate::stats;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum EstimatorKind {
    PriorMc,
    Bridge,
    Exact,
}

impl fmt::Display for EstimatorKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            EstimatorKind::PriorMc => "prior-mc",
            EstimatorKind::Bridge => "bridge",
            EstimatorKind::Exact => "exact",
        })
    }
}

/// A log Bayes factor estimate with its Monte Carlo standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BfEstimate {
    pub log_bf: f64,
    pub std_error: f64,
    pub draws_used: usize,
    pub method: EstimatorKind,
}

#[derive(Debug, Serialize, Deserialize, PartialEq)]
pub struct EstimateRow {
    pub method: EstimatorKind,
    pub log_bf: f64,
    pub std_error: f64,
    pub draws: usize,
    pub seed: u64,
}

/// Writes `(method, log_bf, std_error, draws, seed)` rows.
pub fn write_estimates_csv(path: impl AsRef<Path>, rows: &[(BfEstimate, u64)]) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    for (e, seed) in rows {
        w.serialize(EstimateRow {
            method: e.method,
            log_bf: e.log_bf,
            std_error: e.std_error,
            draws: e.draws_used,
            seed: *seed,
        })?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_estimates_csv(path: impl AsRef<Path>) -> Result<Vec<EstimateRow>> {
    let mut rdr = csv::Reader::from_path(path)?;
    Ok(rdr.deserialize().collect::<std::result::Result<_, _>>()?)
}

/// Draws `μ₁..μ_T` from the prior and returns the log-likelihoods of both
/// models at each draw.
fn prior_draw_log_likelihoods(
    log_lik0: impl Fn(f64) -> f64,
    log_lik1: impl Fn(f64) -> f64,
    prior: &PriorSpec,
    draws: usize,
    rng: &mut RandomStream,
) -> Result<(Vec<f64>, Vec<f64>)> {
    if draws < 100 {
        return domain(format!("prior Monte Carlo needs at least 100 draws, got {draws}"));
    }
    let normal = Normal::new(0.0, prior.sigma()).map_err(|e| Error::Domain(e.to_string()))?;
    let mut l0 = Vec::with_capacity(draws);
    let mut l1 = Vec::with_capacity(draws);
    for _ in 0..draws {
        let mu = normal.sample(rng);
        l0.push(log_lik0(mu));
        l1.push(log_lik1(mu));
    }
    Ok((l0, l1))
}

fn ratio_estimate(l0: &[f64], l1: &[f64]) -> Result<BfEstimate> {
    let degenerate = |v: &[f64]| v.iter().all(|&x| x == f64::NEG_INFINITY);
    if degenerate(l0) || degenerate(l1) {
        return Err(Error::EstimatorDegenerate(
            "every likelihood term underflowed to zero".into(),
        ));
    }
    let lse0 = log_sum_exp(l0)?;
    let lse1 = log_sum_exp(l1)?;
    let t = l0.len() as f64;
    // delta method on log(ā/b̄) with a, b rescaled by their maxima
    let m0 = l0.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let m1 = l1.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let a: Vec<f64> = l0.iter().map(|&v| (v - m0).exp()).collect();
    let b: Vec<f64> = l1.iter().map(|&v| (v - m1).exp()).collect();
    let (ma, mb) = (stats::mean(&a), stats::mean(&b));
    let (mut vaa, mut vbb, mut vab) = (0.0, 0.0, 0.0);
    for (x, y) in a.iter().zip(&b) {
        vaa += (x - ma).powi(2);
        vbb += (y - mb).powi(2);
        vab += (x - ma) * (y - mb);
    }
    vaa /= t;
    vbb /= t;
    vab /= t;
    let var = (vaa / (ma * ma) + vbb / (mb * mb) - 2.0 * vab / (ma * mb)) / t;
    Ok(BfEstimate {
        log_bf: lse0 - lse1,
        std_error: var.max(0.0).sqrt(),
        draws_used: l0.len(),
        method: EstimatorKind::PriorMc,
    })
}

/// Shared-prior Monte Carlo estimate of `log ∫π f₀ / ∫π f₁` for arbitrary
/// log-likelihoods of a scalar location parameter.
pub fn prior_mc_log_ratio(
    log_lik0: impl Fn(f64) -> f64,
    log_lik1: impl Fn(f64) -> f64,
    prior: &PriorSpec,
    draws: usize,
    rng: &mut RandomStream,
) -> Result<BfEstimate> {
    let (l0, l1) = prior_draw_log_likelihoods(log_lik0, log_lik1, prior, draws, rng)?;
    ratio_estimate(&l0, &l1)
}

/// `B̂₀₁ = Σₜ ∏ f₀(xᵢ|μₜ) / Σₜ ∏ f₁(xᵢ|μₜ)` with `μₜ ~ N(0, σ²)`, on the
/// log scale.
pub fn prior_mc_bayes_factor(
    sample: &SortedSample,
    prior: &PriorSpec,
    draws: usize,
    rng: &mut RandomStream,
) -> Result<BfEstimate> {
    prior_mc_log_ratio(
        |mu| log_likelihood_laplace(sample, mu),
        |mu| log_likelihood_normal(sample, mu),
        prior,
        draws,
        rng,
    )
}

/// As [`prior_mc_bayes_factor`], also returning the running estimate
/// `(t, log B̂ after t draws)` every `every` draws.
pub fn prior_mc_bayes_factor_path(
    sample: &SortedSample,
    prior: &PriorSpec,
    draws: usize,
    every: usize,
    rng: &mut RandomStream,
) -> Result<(BfEstimate, Vec<(usize, f64)>)> {
    let (l0, l1) = prior_draw_log_likelihoods(
        |mu| log_likelihood_laplace(sample, mu),
        |mu| log_likelihood_normal(sample, mu),
        prior,
        draws,
        rng,
    )?;
    let every = every.max(1);
    let mut path = Vec::with_capacity(draws / every + 1);
    let (mut acc0, mut acc1) = (f64::NEG_INFINITY, f64::NEG_INFINITY);
    for t in 0..draws {
        acc0 = log_add_exp(acc0, l0[t]);
        acc1 = log_add_exp(acc1, l1[t]);
        if (t + 1) % every == 0 || t + 1 == draws {
            path.push((t + 1, acc0 - acc1));
        }
    }
    Ok((ratio_estimate(&l0, &l1)?, path))
}

/// Tuning for the bridge fixed-point iteration.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BridgeOptions {
    pub max_iterations: usize,
    pub rel_tol: f64,
    pub initial: f64,
    pub batches: usize,
}

impl Default for BridgeOptions {
    fn default() -> Self {
        Self { max_iterations: 100, rel_tol: 1e-8, initial: 1.0, batches: 20 }
    }
}

/// Iterates of the bridge fixed point `r⁽ᵗ⁾`, kept on the log scale.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeState {
    log_history: Vec<f64>,
    pub n0: usize,
    pub n1: usize,
}

impl BridgeState {
    /// Successive iterates `r⁽¹⁾, r⁽²⁾, …` (the starting value excluded).
    pub fn history(&self) -> Vec<f64> {
        self.log_history.iter().map(|v| v.exp()).collect()
    }

    pub fn log_history(&self) -> &[f64] {
        &self.log_history
    }

    pub fn log_iterate(&self) -> f64 {
        *self.log_history.last().expect("at least one iteration")
    }

    pub fn iterate(&self) -> f64 {
        self.log_iterate().exp()
    }
}

/// Log unnormalized posterior values `log q₀`, `log q₁` at draws from each
/// posterior.
#[derive(Debug, Clone, PartialEq)]
pub struct BridgeInputs {
    pub log_q0_at0: Vec<f64>,
    pub log_q1_at0: Vec<f64>,
    pub log_q0_at1: Vec<f64>,
    pub log_q1_at1: Vec<f64>,
}

impl BridgeInputs {
    pub fn from_draws(
        draws0: &[f64],
        draws1: &[f64],
        log_q0: impl Fn(f64) -> f64,
        log_q1: impl Fn(f64) -> f64,
    ) -> Self {
        Self {
            log_q0_at0: draws0.iter().map(|&t| log_q0(t)).collect(),
            log_q1_at0: draws0.iter().map(|&t| log_q1(t)).collect(),
            log_q0_at1: draws1.iter().map(|&t| log_q0(t)).collect(),
            log_q1_at1: draws1.iter().map(|&t| log_q1(t)).collect(),
        }
    }

    fn log_ratio_at0(&self) -> Vec<f64> {
        self.log_q0_at0.iter().zip(&self.log_q1_at0).map(|(a, b)| a - b).collect()
    }

    fn log_ratio_at1(&self) -> Vec<f64> {
        self.log_q0_at1.iter().zip(&self.log_q1_at1).map(|(a, b)| a - b).collect()
    }

    /// Adds `log c` to every `log q₀` value.
    pub fn scale_q0(&mut self, log_c: f64) {
        self.log_q0_at0.iter_mut().for_each(|v| *v += log_c);
        self.log_q0_at1.iter_mut().for_each(|v| *v += log_c);
    }
}

/// Meng–Wong fixed point for `r = c₀/c₁` from `log ℓ` at draws of each
/// posterior, `ℓ = q₀/q₁`:
///
/// `r ← [n₁⁻¹ Σ ℓ(θ₁ⱼ)/(s₀ℓ(θ₁ⱼ) + s₁r)] / [n₀⁻¹ Σ 1/(s₀ℓ(θ₀ⱼ) + s₁r)]`.
pub fn bridge_fixed_point(log_l0: &[f64], log_l1: &[f64], opts: &BridgeOptions) -> Result<BridgeState> {
    let (n0, n1) = (log_l0.len(), log_l1.len());
    if n0 == 0 || n1 == 0 {
        return domain("bridge sampling needs draws from both posteriors");
    }
    if !(opts.initial > 0.0) {
        return domain("bridge starting value must be positive");
    }
    let total = (n0 + n1) as f64;
    let ln_s0 = (n0 as f64 / total).ln();
    let ln_s1 = (n1 as f64 / total).ln();
    let mut log_r = opts.initial.ln();
    let mut log_history = Vec::new();
    let mut num_terms = vec![0.0; n1];
    let mut den_terms = vec![0.0; n0];
    for _ in 0..opts.max_iterations {
        for (t, &l) in num_terms.iter_mut().zip(log_l1) {
            *t = l - log_add_exp(ln_s0 + l, ln_s1 + log_r);
        }
        for (t, &l) in den_terms.iter_mut().zip(log_l0) {
            *t = -log_add_exp(ln_s0 + l, ln_s1 + log_r);
        }
        let next = (log_sum_exp(&num_terms)? - (n1 as f64).ln()) - (log_sum_exp(&den_terms)? - (n0 as f64).ln());
        if !next.is_finite() {
            return Err(Error::EstimatorDegenerate(format!("bridge iterate became {next}")));
        }
        let step = (next - log_r).exp_m1().abs();
        log_history.push(next);
        log_r = next;
        if step < opts.rel_tol {
            return Ok(BridgeState { log_history, n0, n1 });
        }
    }
    Err(Error::Convergence {
        history: log_history.iter().map(|v| v.exp()).collect(),
    })
}

/// Bridge identity evaluated with `α ≡ 1`:
/// `[n₁⁻¹ Σ q₀(θ₁ⱼ)] / [n₀⁻¹ Σ q₁(θ₀ⱼ)]`. A diagnostic: any positive α gives
/// a consistent estimator.
pub fn bridge_unit_alpha(inputs: &BridgeInputs) -> Result<BfEstimate> {
    let (n0, n1) = (inputs.log_q1_at0.len(), inputs.log_q0_at1.len());
    let log_bf = (log_sum_exp(&inputs.log_q0_at1)? - (n1 as f64).ln())
        - (log_sum_exp(&inputs.log_q1_at0)? - (n0 as f64).ln());
    // delta method for a ratio of independent means
    let rel_var = |v: &[f64]| {
        let m = v.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = v.iter().map(|x| (x - m).exp()).collect();
        let mu = stats::mean(&w);
        stats::variance(&w) / (mu * mu * w.len() as f64)
    };
    Ok(BfEstimate {
        log_bf,
        std_error: (rel_var(&inputs.log_q0_at1) + rel_var(&inputs.log_q1_at0)).sqrt(),
        draws_used: n0 + n1,
        method: EstimatorKind::Bridge,
    })
}

/// Optimal-α bridge estimate from precomputed inputs, with a batch-means
/// standard error over `opts.batches` contiguous batches.
pub fn bridge_estimate(inputs: &BridgeInputs, opts: &BridgeOptions) -> Result<(BfEstimate, BridgeState)> {
    let l0 = inputs.log_ratio_at0();
    let l1 = inputs.log_ratio_at1();
    let state = bridge_fixed_point(&l0, &l1, opts)?;
    let b = opts.batches.max(2);
    let (size0, size1) = (l0.len() / b, l1.len() / b);
    let std_error = if size0 >= 1 && size1 >= 1 {
        let batch_opts = BridgeOptions { initial: state.iterate(), ..*opts };
        let mut ests = Vec::with_capacity(b);
        for k in 0..b {
            let s = bridge_fixed_point(
                &l0[k * size0..(k + 1) * size0],
                &l1[k * size1..(k + 1) * size1],
                &batch_opts,
            )?;
            ests.push(s.log_iterate());
        }
        (stats::variance(&ests) / b as f64).sqrt()
    } else {
        f64::NAN
    };
    Ok((
        BfEstimate {
            log_bf: state.log_iterate(),
            std_error,
            draws_used: l0.len() + l1.len(),
            method: EstimatorKind::Bridge,
        },
        state,
    ))
}

/// Draws `n0` values from the exact double-exponential posterior and `n1`
/// from the exact normal posterior `(mean, variance)`, and runs the
/// optimal-α bridge iteration for `log B₀₁`.
#[allow(clippy::too_many_arguments)]
pub fn bridge_bayes_factor(
    mix0: &PosteriorMixture,
    posterior1: (f64, f64),
    sample: &SortedSample,
    prior: &PriorSpec,
    n0: usize,
    n1: usize,
    rng: &mut RandomStream,
    opts: &BridgeOptions,
) -> Result<(BfEstimate, BridgeState)> {
    let inputs = bridge_inputs(mix0, posterior1, sample, prior, n0, n1, rng)?;
    bridge_estimate(&inputs, opts)
}

/// Posterior draws and unnormalized posterior evaluations for the benchmark.
pub fn bridge_inputs(
    mix0: &PosteriorMixture,
    posterior1: (f64, f64),
    sample: &SortedSample,
    prior: &PriorSpec,
    n0: usize,
    n1: usize,
    rng: &mut RandomStream,
) -> Result<BridgeInputs> {
    if n0 < 100 || n1 < 100 {
        return domain(format!("bridge sampling needs at least 100 draws per posterior, got ({n0}, {n1})"));
    }
    let (m1, v1) = posterior1;
    let normal = Normal::new(m1, v1.sqrt()).map_err(|e| Error::Domain(e.to_string()))?;
    let draws0 = (0..n0).map(|_| mix0.sample(rng)).collect::<Result<Vec<_>>>()?;
    let draws1: Vec<f64> = (0..n1).map(|_| normal.sample(rng)).collect();
    Ok(BridgeInputs::from_draws(
        &draws0,
        &draws1,
        |mu| log_unnormalized_posterior_laplace(sample, prior, mu),
        |mu| log_unnormalized_posterior_normal(sample, prior, mu),
    ))
}

/// Monte Carlo average of `h(μ)` over posterior draws, with its standard
/// error.
pub fn posterior_expectation(
    mix: &PosteriorMixture,
    h: impl Fn(f64) -> f64,
    draws: usize,
    rng: &mut RandomStream,
) -> Result<(f64, f64)> {
    if draws < 100 {
        return domain(format!("posterior expectation needs at least 100 draws, got {draws}"));
    }
    let vals = (0..draws).map(|_| mix.sample(rng).map(&h)).collect::<Result<Vec<_>>>()?;
    Ok((stats::mean(&vals), (stats::variance(&vals) / draws as f64).sqrt()))
}
