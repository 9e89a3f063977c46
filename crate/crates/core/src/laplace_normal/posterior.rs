use std::f64::consts::SQRT_2;

use rand::Rng;

use crate::error::{domain, Result};
use crate::numerics::{log_sum_exp, LogWeightVector, RandomStream, TruncatedNormalSpec, LN_SQRT_2PI};

use super::marginals::laplace_gap_log_weight;
use super::sample::{PriorSpec, SortedSample};

/// One truncated-normal piece of the double-exponential posterior, living
/// on the order-statistic gap `(x_gap, x_{gap+1})`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MixtureComponent {
    pub gap: usize,
    pub spec: TruncatedNormalSpec,
    pub log_weight: f64,
    pub log_mass: f64,
}

/// Exact posterior of μ under the double-exponential model: a mixture of
/// truncated normals `N(√2(n−2i)σ², σ², xᵢ, xᵢ₊₁)` with weights proportional
/// to the summands of m₀. Zero-width gaps from tied data are omitted.
#[derive(Debug, Clone)]
pub struct PosteriorMixture {
    edges: Vec<f64>,
    components: Vec<MixtureComponent>,
    // position in `components` for each gap, None for dropped ties
    by_gap: Vec<Option<usize>>,
    cumulative: Vec<f64>,
    weights: LogWeightVector,
}

/// Builds the exact double-exponential posterior mixture.
pub fn laplace_posterior(sample: &SortedSample, prior: &PriorSpec) -> Result<PosteriorMixture> {
    let n = sample.len();
    let sigma2 = prior.sigma2();
    let mut raw = Vec::with_capacity(n + 1);
    for i in 0..=n {
        if let Some(w) = laplace_gap_log_weight(sample, prior, i)? {
            let delta = SQRT_2 * (n as f64 - 2.0 * i as f64) * sigma2;
            let spec = TruncatedNormalSpec::new(delta, sigma2, sample.order_stat(i), sample.order_stat(i + 1))?;
            raw.push((i, spec, w));
        }
    }
    let total = log_sum_exp(&raw.iter().map(|r| r.2).collect::<Vec<_>>())?;
    let mut by_gap = vec![None; n + 1];
    let mut components = Vec::with_capacity(raw.len());
    for (i, spec, w) in raw {
        by_gap[i] = Some(components.len());
        components.push(MixtureComponent {
            gap: i,
            spec,
            log_weight: w - total,
            log_mass: spec.log_mass()?,
        });
    }
    let mut cumulative = Vec::with_capacity(components.len());
    let mut acc = 0.0;
    for c in &components {
        acc += c.log_weight.exp();
        cumulative.push(acc);
    }
    let weights = LogWeightVector::new(components.iter().map(|c| c.log_weight).collect());
    let mut edges = Vec::with_capacity(n);
    edges.extend_from_slice(sample.values());
    Ok(PosteriorMixture { edges, components, by_gap, cumulative, weights })
}

/// `count` iid draws from the mixture.
pub fn sample_laplace_posterior(mix: &PosteriorMixture, rng: &mut RandomStream, count: usize) -> Result<Vec<f64>> {
    if count == 0 {
        return domain("sample count must be at least 1");
    }
    (0..count).map(|_| mix.sample(rng)).collect()
}

impl PosteriorMixture {
    pub fn components(&self) -> &[MixtureComponent] {
        &self.components
    }

    /// Normalized log-weights, one per retained component.
    pub fn log_weights(&self) -> &LogWeightVector {
        &self.weights
    }

    /// Weight of gap `i` (zero for a dropped tie).
    pub fn gap_weight(&self, i: usize) -> f64 {
        self.by_gap
            .get(i)
            .copied()
            .flatten()
            .map_or(0.0, |k| self.components[k].log_weight.exp())
    }

    fn component_at(&self, mu: f64) -> &MixtureComponent {
        // number of observations strictly below μ picks a non-empty gap
        let gap = self.edges.partition_point(|&v| v < mu);
        let k = self.by_gap[gap].expect("gap containing a point is never a tie");
        &self.components[k]
    }

    pub fn log_density(&self, mu: f64) -> f64 {
        if !mu.is_finite() {
            return f64::NEG_INFINITY;
        }
        let c = self.component_at(mu);
        let sd = c.spec.sd();
        let z = (mu - c.spec.delta) / sd;
        c.log_weight - 0.5 * z * z - LN_SQRT_2PI - sd.ln() - c.log_mass
    }

    pub fn density(&self, mu: f64) -> f64 {
        self.log_density(mu).exp()
    }

    pub fn cdf(&self, mu: f64) -> Result<f64> {
        if mu == f64::NEG_INFINITY {
            return Ok(0.0);
        }
        if mu == f64::INFINITY {
            return Ok(1.0);
        }
        let c = self.component_at(mu);
        let k = self.by_gap[c.gap].unwrap();
        let below = if k == 0 { 0.0 } else { self.cumulative[k - 1] };
        Ok((below + c.log_weight.exp() * c.spec.cdf(mu)?).min(1.0))
    }

    /// Quantile by bracketing and bisection on the CDF.
    pub fn quantile(&self, q: f64) -> Result<f64> {
        if !(0.0 < q && q < 1.0) {
            return domain(format!("quantile level must lie in (0, 1), got {q}"));
        }
        let (mut lo, mut hi) = match (self.edges.first(), self.edges.last()) {
            (Some(&a), Some(&b)) => (a - 1.0, b + 1.0),
            _ => (-1.0, 1.0),
        };
        let mut width = hi - lo;
        while self.cdf(lo)? > q {
            lo -= width;
            width *= 2.0;
        }
        width = hi - lo;
        while self.cdf(hi)? < q {
            hi += width;
            width *= 2.0;
        }
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            if self.cdf(mid)? < q {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        Ok(0.5 * (lo + hi))
    }

    /// One draw: a component by weight, then its truncated normal.
    pub fn sample(&self, rng: &mut RandomStream) -> Result<f64> {
        let u: f64 = rng.random::<f64>() * self.cumulative.last().copied().unwrap_or(1.0);
        let k = self.cumulative.partition_point(|&c| c <= u).min(self.components.len() - 1);
        self.components[k].spec.sample(rng)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::laplace_normal::{log_marginal_laplace, log_unnormalized_posterior_laplace};
    use crate::laplace_normal::LocationModel;
    use crate::quadrature::integrate;
    use crate::stats;

    #[test]
    fn single_symmetric_observation() {
        let s = SortedSample::new(vec![0.0]).unwrap();
        let mix = laplace_posterior(&s, &PriorSpec::default()).unwrap();
        assert!((mix.gap_weight(0) - 0.5).abs() < 1e-14);
        assert!((mix.gap_weight(1) - 0.5).abs() < 1e-14);
        assert!((mix.cdf(0.0).unwrap() - 0.5).abs() < 1e-14);
    }

    #[test]
    fn weights_equal_segment_masses() {
        let s = SortedSample::new(vec![-0.7, 0.1, 1.4]).unwrap();
        let p = PriorSpec::new(1.5).unwrap();
        let mix = laplace_posterior(&s, &p).unwrap();
        let lm0 = log_marginal_laplace(&s, &p).unwrap();
        let dens = |mu: f64| (log_unnormalized_posterior_laplace(&s, &p, mu) - lm0).exp();
        let total: f64 = mix.components().iter().map(|c| c.log_weight.exp()).sum();
        assert!((total - 1.0).abs() < 1e-12);
        for i in 0..=3 {
            let lo = s.order_stat(i).max(-40.0);
            let hi = s.order_stat(i + 1).min(40.0);
            let mass = integrate(dens, lo, hi, 1e-14);
            assert!((mass - mix.gap_weight(i)).abs() < 1e-8, "gap {i}: {mass} vs {}", mix.gap_weight(i));
        }
    }

    #[test]
    fn density_matches_normalized_posterior_pointwise() {
        let x: Vec<f64> = (0..10).map(|k| (k as f64 * 1.3).sin() * 1.5 + 0.2).collect();
        let s = SortedSample::new(x).unwrap();
        let p = PriorSpec::new(1.0).unwrap();
        let mix = laplace_posterior(&s, &p).unwrap();
        let lm0 = log_marginal_laplace(&s, &p).unwrap();
        for k in 0..200 {
            let mu = -2.0 + 4.0 * k as f64 / 199.0;
            let direct = (log_unnormalized_posterior_laplace(&s, &p, mu) - lm0).exp();
            assert!((mix.density(mu) - direct).abs() < 1e-8, "mu={mu}");
        }
    }

    #[test]
    fn draws_stay_in_their_gap() {
        let s = SortedSample::new(vec![-1.0, 0.0, 0.5, 2.0]).unwrap();
        let mix = laplace_posterior(&s, &PriorSpec::default()).unwrap();
        let mut rng = RandomStream::new(3, 0);
        for _ in 0..2000 {
            let mu = mix.sample(&mut rng).unwrap();
            assert!(mu.is_finite());
            // density is positive wherever the sampler lands
            assert!(mix.log_density(mu) > f64::NEG_INFINITY);
        }
    }

    #[test]
    fn quantile_inverts_cdf() {
        let s = SortedSample::new(vec![-1.0, 0.0, 0.5, 2.0, 3.0]).unwrap();
        let mix = laplace_posterior(&s, &PriorSpec::default()).unwrap();
        for q in [1e-9, 0.1, 0.5, 0.93] {
            let x = mix.quantile(q).unwrap();
            assert!((mix.cdf(x).unwrap() - q).abs() < 1e-10);
        }
    }

    #[test]
    fn weights_ignore_input_order() {
        let a = laplace_posterior(&SortedSample::new(vec![3.0, -1.0, 0.2, 0.9]).unwrap(), &PriorSpec::default()).unwrap();
        let b = laplace_posterior(&SortedSample::new(vec![0.9, 0.2, 3.0, -1.0]).unwrap(), &PriorSpec::default()).unwrap();
        assert_eq!(a.log_weights(), b.log_weights());
    }

    #[test]
    fn probability_integral_transform_is_uniform() {
        let mut rng = RandomStream::new(31, 0);
        let s = LocationModel::Laplace.simulate_sample(40, 0.2, &mut rng).unwrap();
        let mix = laplace_posterior(&s, &PriorSpec::default()).unwrap();
        let u: Vec<f64> = sample_laplace_posterior(&mix, &mut rng, 10_000)
            .unwrap()
            .iter()
            .map(|&mu| mix.cdf(mu).unwrap())
            .collect();
        let d = stats::ks_statistic(&u, |v| v.clamp(0.0, 1.0));
        assert!(d < stats::ks_critical_value_1pct(u.len()), "KS {d}");
    }

    #[test]
    fn histogram_matches_the_posterior_curve() {
        let mut rng = RandomStream::new(32, 0);
        let s = LocationModel::Laplace.simulate_sample(150, 0.0, &mut rng).unwrap();
        let mix = laplace_posterior(&s, &PriorSpec::default()).unwrap();
        let draws = sample_laplace_posterior(&mix, &mut rng, 10_000).unwrap();
        let (lo, hi) = (mix.quantile(0.001).unwrap(), mix.quantile(0.999).unwrap());
        let edges: Vec<f64> = (0..=30).map(|k| lo + (hi - lo) * k as f64 / 30.0).collect();
        let (_, _, p) = stats::chi_square_gof(&draws, &edges, |x| mix.cdf(x).unwrap()).unwrap();
        assert!(p > 0.01, "p = {p}");
    }
}
