use rand::Rng;
use rand_distr::{Distribution, Exp1};

use crate::error::{domain, Error, Result};
use crate::numerics::special::{log_normal_cdf, log_phi_interval, normal_quantile, LN_SQRT_2PI};
use crate::numerics::RandomStream;

// Below this interval mass the inverse CDF loses too much precision and the
// tail rejection samplers take over.
const INVERSE_CDF_MIN_MASS: f64 = 1e-10;

/// `N(delta, tau2)` restricted to `(lo, hi)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TruncatedNormalSpec {
    pub delta: f64,
    pub tau2: f64,
    pub lo: f64,
    pub hi: f64,
}

impl TruncatedNormalSpec {
    pub fn new(delta: f64, tau2: f64, lo: f64, hi: f64) -> Result<Self> {
        if !delta.is_finite() {
            return domain(format!("truncated normal location must be finite, got {delta}"));
        }
        if !(tau2 > 0.0 && tau2.is_finite()) {
            return domain(format!("truncated normal variance must be positive, got {tau2}"));
        }
        if lo.is_nan() || hi.is_nan() || lo >= hi {
            return domain(format!("truncation bounds must satisfy lo < hi, got ({lo}, {hi})"));
        }
        Ok(Self { delta, tau2, lo, hi })
    }

    pub fn sd(&self) -> f64 {
        self.tau2.sqrt()
    }

    /// Standardized bounds `((lo − δ)/τ, (hi − δ)/τ)`.
    pub fn standardized(&self) -> (f64, f64) {
        let sd = self.sd();
        ((self.lo - self.delta) / sd, (self.hi - self.delta) / sd)
    }

    /// Log of the untruncated normal mass inside the bounds.
    pub fn log_mass(&self) -> Result<f64> {
        let (a, b) = self.standardized();
        if a >= b {
            return Err(Error::DegenerateInterval { lo: a, hi: b });
        }
        log_phi_interval(a, b)
    }

    /// Log density of the truncated law; `-inf` outside the bounds.
    pub fn log_density(&self, x: f64) -> Result<f64> {
        if x < self.lo || x > self.hi {
            return Ok(f64::NEG_INFINITY);
        }
        let sd = self.sd();
        let z = (x - self.delta) / sd;
        Ok(-0.5 * z * z - LN_SQRT_2PI - sd.ln() - self.log_mass()?)
    }

    /// CDF of the truncated law.
    pub fn cdf(&self, x: f64) -> Result<f64> {
        if x <= self.lo {
            return Ok(0.0);
        }
        if x >= self.hi {
            return Ok(1.0);
        }
        let (a, _) = self.standardized();
        let z = (x - self.delta) / self.sd();
        if z <= a {
            return Ok(0.0);
        }
        Ok((log_phi_interval(a, z)? - self.log_mass()?).exp().min(1.0))
    }

    pub fn sample(&self, rng: &mut RandomStream) -> Result<f64> {
        sample_truncated_normal(self, rng)
    }
}

/// One draw from `N(δ, τ²)` restricted to `(lo, hi)`.
///
/// Inverse CDF when the interval carries mass above 1e-10, otherwise a
/// one-sided tail rejection sampler. Fails only when the interval has no
/// representable mass even on the log scale.
pub fn sample_truncated_normal(spec: &TruncatedNormalSpec, rng: &mut RandomStream) -> Result<f64> {
    let (a, b) = spec.standardized();
    let log_mass = spec.log_mass()?;
    if !log_mass.is_finite() {
        return Err(Error::DegenerateInterval { lo: a, hi: b });
    }
    let z = if log_mass > INVERSE_CDF_MIN_MASS.ln() {
        inverse_cdf_draw(a, b, rng)
    } else {
        tail_draw(a, b, rng)
    };
    let x = spec.delta + spec.sd() * z;
    Ok(x.clamp(spec.lo, spec.hi))
}

fn inverse_cdf_draw(a: f64, b: f64, rng: &mut RandomStream) -> f64 {
    // work in whichever half keeps the CDF values away from 1
    let flip = a + b > 0.0;
    let (a, b) = if flip { (-b, -a) } else { (a, b) };
    let pa = log_normal_cdf(a).exp();
    let pb = log_normal_cdf(b).exp();
    let u: f64 = rng.random();
    let z = normal_quantile(pa + u * (pb - pa)).clamp(a, b);
    if flip {
        -z
    } else {
        z
    }
}

// Standard normal restricted to (a, b) where the interval has tiny mass.
fn tail_draw(a: f64, b: f64, rng: &mut RandomStream) -> f64 {
    if a < 0.0 && b > 0.0 {
        // a sliver around the mode: uniform proposal, bound φ(0)
        loop {
            let z = a + (b - a) * rng.random::<f64>();
            if rng.random::<f64>() < (-0.5 * z * z).exp() {
                return z;
            }
        }
    }
    let flip = b <= 0.0;
    let (a, b) = if flip { (-b, -a) } else { (a, b) };
    let z = positive_tail_draw(a, b, rng);
    if flip {
        -z
    } else {
        z
    }
}

// 0 <= a < b <= inf.
fn positive_tail_draw(a: f64, b: f64, rng: &mut RandomStream) -> f64 {
    if (b - a) * (b + a) < 2.0 {
        // short interval: uniform proposal, acceptance at least e^{-1}
        loop {
            let z = a + (b - a) * rng.random::<f64>();
            if rng.random::<f64>().ln() < -0.5 * (z - a) * (z + a) {
                return z;
            }
        }
    }
    // translated exponential proposal with the optimal rate
    let rate = 0.5 * (a + (a * a + 4.0).sqrt());
    loop {
        let e: f64 = Exp1.sample(rng);
        let z = a + e / rate;
        if z >= b {
            continue;
        }
        let d = z - rate;
        if rng.random::<f64>().ln() < -0.5 * d * d {
            return z;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::normal_cdf;
    use crate::stats::{ks_critical_value_1pct, ks_statistic};

    fn draws(spec: TruncatedNormalSpec, n: usize, seed: u64) -> Vec<f64> {
        let mut rng = RandomStream::new(seed, 0);
        (0..n).map(|_| spec.sample(&mut rng).unwrap()).collect()
    }

    fn mean(xs: &[f64]) -> f64 {
        xs.iter().sum::<f64>() / xs.len() as f64
    }

    #[test]
    fn untruncated_mean() {
        let xs = draws(TruncatedNormalSpec::new(0.0, 1.0, f64::NEG_INFINITY, f64::INFINITY).unwrap(), 100_000, 1);
        assert!(mean(&xs).abs() < 0.02);
    }

    #[test]
    fn half_normal_mean() {
        let xs = draws(TruncatedNormalSpec::new(0.0, 1.0, 0.0, f64::INFINITY).unwrap(), 100_000, 2);
        let target = (2.0 / std::f64::consts::PI).sqrt();
        assert!((mean(&xs) - target).abs() < 0.02);
    }

    #[test]
    fn support_respected_in_the_tail() {
        for (lo, hi) in [(5.0, 6.0), (-6.0, -5.0), (30.0, 30.5), (-1e3, -999.0), (8.0, f64::INFINITY)] {
            let spec = TruncatedNormalSpec::new(0.0, 1.0, lo, hi).unwrap();
            for x in draws(spec, 5_000, 3) {
                assert!(x >= lo && x <= hi, "{x} outside ({lo}, {hi})");
            }
        }
    }

    #[test]
    fn far_component_with_negligible_mass_is_sampleable() {
        // location ~280 sd away from its gap, as in high-order posterior components
        let spec = TruncatedNormalSpec::new(283.0, 1.0, f64::NEG_INFINITY, -3.0).unwrap();
        assert!(spec.log_mass().unwrap() < -4e4);
        let xs = draws(spec, 1000, 9);
        assert!(xs.iter().all(|&x| x <= -3.0 && x > -3.1));
    }

    #[test]
    fn degenerate_interval_rejected() {
        assert!(TruncatedNormalSpec::new(0.0, 1.0, 1.0, 1.0).is_err());
        let spec = TruncatedNormalSpec { delta: 0.0, tau2: 1.0, lo: 1e300, hi: f64::INFINITY };
        let mut rng = RandomStream::new(0, 0);
        assert!(matches!(sample_truncated_normal(&spec, &mut rng), Err(Error::DegenerateInterval { .. })));
    }

    #[test]
    fn ks_against_analytic_cdf() {
        for (k, (delta, tau2, lo, hi)) in [
            (0.3, 2.0, -1.0, 2.5),
            (0.0, 1.0, 4.0, 9.0),
            (1.0, 0.25, f64::NEG_INFINITY, -1.5),
        ]
        .into_iter()
        .enumerate()
        {
            let spec = TruncatedNormalSpec::new(delta, tau2, lo, hi).unwrap();
            let xs = draws(spec, 100_000, 10 + k as u64);
            let d = ks_statistic(&xs, |x| spec.cdf(x).unwrap());
            assert!(d < ks_critical_value_1pct(xs.len()), "case {k}: D = {d}");
        }
    }

    #[test]
    fn cdf_consistent_with_plain_normal() {
        let spec = TruncatedNormalSpec::new(0.0, 1.0, -1.0, 1.0).unwrap();
        let expected = (normal_cdf(0.5) - normal_cdf(-1.0)) / (normal_cdf(1.0) - normal_cdf(-1.0));
        assert!((spec.cdf(0.5).unwrap() - expected).abs() < 1e-14);
    }
}
