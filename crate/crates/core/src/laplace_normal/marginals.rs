use std::f64::consts::{LN_2, SQRT_2};

use crate::error::Result;
use crate::numerics::{laplace_log_density, log_phi_interval, log_sum_exp, normal_log_density, LN_SQRT_2PI};

use super::posterior::PosteriorMixture;
use super::sample::{PriorSpec, SortedSample};

/// `Σ log f₁(xᵢ|μ)` under N(μ, 1).
pub fn log_likelihood_normal(sample: &SortedSample, mu: f64) -> f64 {
    sample.values().iter().map(|&x| normal_log_density(x, mu, 1.0)).sum()
}

/// `Σ log f₀(xᵢ|μ)` under the unit-variance double-exponential.
pub fn log_likelihood_laplace(sample: &SortedSample, mu: f64) -> f64 {
    sample.values().iter().map(|&x| laplace_log_density(x, mu)).sum()
}

pub fn log_unnormalized_posterior_normal(sample: &SortedSample, prior: &PriorSpec, mu: f64) -> f64 {
    prior.log_density(mu) + log_likelihood_normal(sample, mu)
}

pub fn log_unnormalized_posterior_laplace(sample: &SortedSample, prior: &PriorSpec, mu: f64) -> f64 {
    prior.log_density(mu) + log_likelihood_laplace(sample, mu)
}

/// Exact normal-model posterior `N(n x̄/(n+σ⁻²), 1/(n+σ⁻²))` as `(mean, variance)`.
pub fn normal_posterior(sample: &SortedSample, prior: &PriorSpec) -> (f64, f64) {
    let n = sample.len() as f64;
    let prec = n + 1.0 / prior.sigma2();
    (n * sample.mean() / prec, 1.0 / prec)
}

/// Closed-form `log m₁(x)` for the normal model.
pub fn log_marginal_normal(sample: &SortedSample, prior: &PriorSpec) -> f64 {
    let n = sample.len() as f64;
    let s = 1.0 / prior.sigma2();
    let xbar = sample.mean();
    -n * LN_SQRT_2PI - 0.5 * sample.sum_sq_dev() - n * s * xbar * xbar / (2.0 * (n + s))
        - 0.5 * prior.sigma2().ln()
        - 0.5 * (n + s).ln()
}

/// Log of the i-th summand of m₀ (without the 2^{-n/2} factor), or `None`
/// for a zero-width gap between tied observations.
pub(crate) fn laplace_gap_log_weight(sample: &SortedSample, prior: &PriorSpec, i: usize) -> Result<Option<f64>> {
    let n = sample.len();
    let lo = sample.order_stat(i);
    let hi = sample.order_stat(i + 1);
    if lo >= hi {
        return Ok(None);
    }
    let sigma2 = prior.sigma2();
    let sigma = prior.sigma();
    let k = n as f64 - 2.0 * i as f64;
    let delta = SQRT_2 * k * sigma2;
    let linear = SQRT_2 * (sample.lower_sum(i) - sample.upper_sum(i));
    let mass = log_phi_interval((lo - delta) / sigma, (hi - delta) / sigma)?;
    Ok(Some(linear + k * k * sigma2 + mass))
}

/// Closed-form `log m₀(x)` for the double-exponential model: a log-sum-exp
/// over the n+1 order-statistic gaps.
pub fn log_marginal_laplace(sample: &SortedSample, prior: &PriorSpec) -> Result<f64> {
    let n = sample.len();
    let mut terms = Vec::with_capacity(n + 1);
    for i in 0..=n {
        if let Some(w) = laplace_gap_log_weight(sample, prior, i)? {
            terms.push(w);
        }
    }
    Ok(-0.5 * n as f64 * LN_2 + log_sum_exp(&terms)?)
}

/// `log B₀₁ = log m₀ − log m₁`.
pub fn exact_log_bayes_factor(sample: &SortedSample, prior: &PriorSpec) -> Result<f64> {
    Ok(log_marginal_laplace(sample, prior)? - log_marginal_normal(sample, prior))
}

/// Gradient of `log B₀₁` with respect to each (sorted) observation.
///
/// `∂ log m₀/∂xₖ = −√2 (2 F₀(xₖ) − 1)` with F₀ the double-exponential
/// posterior CDF, and `∂ log m₁/∂xₖ = −(xₖ − E₁[μ])`.
pub fn log_bayes_factor_score(sample: &SortedSample, prior: &PriorSpec) -> Result<Vec<f64>> {
    let mix: PosteriorMixture = super::posterior::laplace_posterior(sample, prior)?;
    let (post_mean, _) = normal_posterior(sample, prior);
    sample
        .values()
        .iter()
        .map(|&x| Ok(-SQRT_2 * (2.0 * mix.cdf(x)? - 1.0) + x - post_mean))
        .collect()
}
