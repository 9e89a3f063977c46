use std::path::Path;

use rand::Rng;
use rand_distr::StandardNormal;

use super::roots::MaCoefficients;
use crate::error::{domain, Result};
use crate::numerics::RandomStream;
use crate::scalar::Scalar;

/// Pre-sample innovations `(ε₀, ε₋₁, …, ε₁₋ₚ)` and the residuals `ε̂₁..ε̂_T`
/// they induce.
#[derive(Debug, Clone, PartialEq)]
pub struct InnovationState<T: Scalar = f64> {
    pub past: Vec<T>,
    pub hat_eps: Vec<T>,
}

impl<T: Scalar> InnovationState<T> {
    pub fn zeros(p: usize) -> Self {
        Self { past: vec![T::zero(); p], hat_eps: Vec::new() }
    }

    pub fn with_past(past: Vec<T>) -> Self {
        Self { past, hat_eps: Vec::new() }
    }

    /// Innovation at time `s`: a residual for `s ≥ 1`, a past value otherwise.
    fn eps(&self, s: isize) -> T {
        if s >= 1 {
            self.hat_eps[(s - 1) as usize]
        } else {
            self.past[(-s) as usize]
        }
    }
}

fn log_normal_terms<T: Scalar>(values: impl Iterator<Item = T>, sigma2: T) -> T {
    let half = T::lit(0.5);
    let ln_2pi_var = (T::lit(2.0) * T::PI() * sigma2).ln();
    values.map(|e| -half * (ln_2pi_var + e * e / sigma2)).sum()
}

/// Fills `ε̂ₜ = xₜ − μ − Σⱼ ϑⱼ ε̂ₜ₋ⱼ` from the stored past and returns the
/// log density of the data given the past, `Σₜ log N(ε̂ₜ; 0, σ²)`.
pub fn conditional_log_likelihood<T: Scalar>(
    data: &[T],
    coeffs: &MaCoefficients<T>,
    innov: &mut InnovationState<T>,
) -> T {
    let p = coeffs.order();
    debug_assert!(innov.past.len() >= p, "past innovations shorter than the order");
    innov.hat_eps.clear();
    innov.hat_eps.reserve(data.len());
    for (t0, &x) in data.iter().enumerate() {
        let t = t0 as isize + 1;
        let mut e = x - coeffs.mu;
        for (j, &th) in coeffs.theta.iter().enumerate() {
            e = e - th * innov.eps(t - 1 - j as isize);
        }
        innov.hat_eps.push(e);
    }
    log_normal_terms(innov.hat_eps.iter().copied(), coeffs.sigma2)
}

/// `Σₖ log N(ε₋ₖ; 0, σ²)` over the stored past innovations.
pub fn past_log_density<T: Scalar>(innov: &InnovationState<T>, sigma2: T) -> T {
    log_normal_terms(innov.past.iter().copied(), sigma2)
}

/// Joint log density of past innovations and data.
pub fn joint_log_likelihood<T: Scalar>(
    data: &[T],
    coeffs: &MaCoefficients<T>,
    innov: &mut InnovationState<T>,
) -> T {
    conditional_log_likelihood(data, coeffs, innov) + past_log_density(innov, coeffs.sigma2)
}

/// One Metropolis-within-Gibbs pass over the past innovations: each
/// coordinate takes a Gaussian random-walk step of standard deviation
/// `scale · σ` targeting the joint density. Returns the number of accepted
/// sub-steps. `flat` drops the data term (prior-only target).
pub fn gibbs_past_innovations(
    data: &[f64],
    coeffs: &MaCoefficients<f64>,
    innov: &mut InnovationState<f64>,
    scale: f64,
    flat: bool,
    rng: &mut RandomStream,
) -> usize {
    let sd = scale * coeffs.sigma2.sqrt();
    let target = |st: &mut InnovationState<f64>| {
        let data_term = if flat { 0.0 } else { conditional_log_likelihood(data, coeffs, st) };
        data_term + past_log_density(st, coeffs.sigma2)
    };
    let mut current = target(innov);
    let mut accepted = 0;
    for k in 0..innov.past.len() {
        let old = innov.past[k];
        innov.past[k] = old + sd * rng.sample::<f64, _>(StandardNormal);
        let proposed = target(innov);
        let u: f64 = rng.random();
        if u.ln() < proposed - current {
            current = proposed;
            accepted += 1;
        } else {
            innov.past[k] = old;
        }
    }
    if !flat {
        // keep hat_eps consistent with the retained past
        conditional_log_likelihood(data, coeffs, innov);
    }
    accepted
}

/// Simulates `x₁..x_len` with fresh past innovations; returns the series and
/// the past used.
pub fn simulate_series<R: Rng + ?Sized>(coeffs: &MaCoefficients<f64>, len: usize, rng: &mut R) -> (Vec<f64>, Vec<f64>) {
    let p = coeffs.order();
    let sd = coeffs.sigma2.sqrt();
    // eps[k] holds ε_{k+1-p}: the first p entries are the past, oldest first
    let eps: Vec<f64> = (0..p + len).map(|_| sd * rng.sample::<f64, _>(StandardNormal)).collect();
    let x = (0..len)
        .map(|t| {
            let now = p + t;
            coeffs.mu + eps[now] + coeffs.theta.iter().enumerate().map(|(j, th)| th * eps[now - 1 - j]).sum::<f64>()
        })
        .collect();
    let past = (0..p).map(|k| eps[p - 1 - k]).collect();
    (x, past)
}

pub fn write_series_csv(series: &[f64], path: impl AsRef<Path>) -> Result<()> {
    let mut w = csv::Writer::from_path(path)?;
    w.write_record(["x"])?;
    for v in series {
        w.write_record([v.to_string()])?;
    }
    w.flush()?;
    Ok(())
}

pub fn read_series_csv(path: impl AsRef<Path>) -> Result<Vec<f64>> {
    let mut rdr = csv::Reader::from_path(path)?;
    if rdr.headers()?.iter().collect::<Vec<_>>() != ["x"] {
        return domain("series CSV must have the single column `x`");
    }
    let mut out = Vec::new();
    for rec in rdr.records() {
        let rec = rec?;
        let v: f64 = rec[0].trim().parse().map_err(|_| crate::Error::Data(format!("not a number: `{}`", &rec[0])))?;
        out.push(v);
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stats;
    use nalgebra::{DMatrix, DVector};

    fn iid_log_lik(x: &[f64], mu: f64, s2: f64) -> f64 {
        x.iter().map(|v| crate::numerics::normal_log_density(*v, mu, s2)).sum()
    }

    #[test]
    fn order_zero_is_iid_normal() {
        let x = [0.3, -1.0, 2.0, 0.1];
        let c = MaCoefficients { theta: vec![], mu: 0.5, sigma2: 2.0 };
        let ll = conditional_log_likelihood(&x, &c, &mut InnovationState::zeros(0));
        assert!((ll - iid_log_lik(&x, 0.5, 2.0)).abs() < 1e-12);
        let c = MaCoefficients { theta: vec![0.0, 0.0], mu: 0.5, sigma2: 2.0 };
        let ll = conditional_log_likelihood(&x, &c, &mut InnovationState::with_past(vec![3.0, -7.0]));
        assert!((ll - iid_log_lik(&x, 0.5, 2.0)).abs() < 1e-12);
        let x32 = [0.3f32, -1.0];
        let c32 = MaCoefficients { theta: vec![0.0f32], mu: 0.0, sigma2: 1.0 };
        let ll32 = conditional_log_likelihood(&x32, &c32, &mut InnovationState::with_past(vec![1.0f32]));
        assert!((f64::from(ll32) - iid_log_lik(&[0.3, -1.0], 0.0, 1.0)).abs() < 1e-5);
    }

    /// log N(x; m, σ²AAᵀ) for x = μ + ϑε₀e₁ + Aε, A unit lower bidiagonal.
    fn joint_gaussian_oracle(x: &[f64], theta: f64, eps0: f64, mu: f64, s2: f64) -> f64 {
        let n = x.len();
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else if i == j + 1 { theta } else { 0.0 });
        let cov = (&a * a.transpose()) * s2;
        let mut resid = DVector::from_fn(n, |i, _| x[i] - mu);
        resid[0] -= theta * eps0;
        let chol = cov.cholesky().unwrap();
        let sol = chol.solve(&resid);
        let log_det: f64 = 2.0 * chol.l().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        -0.5 * (n as f64 * (2.0 * std::f64::consts::PI).ln() + log_det + resid.dot(&sol))
    }

    #[test]
    fn matches_joint_gaussian_given_the_past() {
        let x: Vec<f64> = (0..10).map(|k| ((k as f64) * 0.9).sin()).collect();
        for (theta, eps0, mu, s2) in [(0.6, 0.4, 0.2, 1.0), (-0.8, -1.3, -0.5, 2.5)] {
            let c = MaCoefficients { theta: vec![theta], mu, sigma2: s2 };
            let ll = conditional_log_likelihood(&x, &c, &mut InnovationState::with_past(vec![eps0]));
            assert!((ll - joint_gaussian_oracle(&x, theta, eps0, mu, s2)).abs() < 1e-10);
        }
    }

    #[test]
    fn exactly_quadratic_in_the_mean() {
        let x: Vec<f64> = (0..50).map(|k| ((k as f64) * 1.7).cos() * 2.0).collect();
        let f = |mu: f64| {
            let c = MaCoefficients { theta: vec![0.5, -0.3, 0.2], mu, sigma2: 1.3 };
            conditional_log_likelihood(&x, &c, &mut InnovationState::with_past(vec![0.1, -0.4, 0.9]))
        };
        let (fm, f0, fp) = (f(-1.0), f(0.0), f(1.0));
        let a = 0.5 * (fp + fm) - f0;
        let b = 0.5 * (fp - fm);
        let predicted = f0 + 2.0 * b + 4.0 * a;
        assert!((f(2.0) - predicted).abs() < 1e-10);
    }

    #[test]
    fn residuals_satisfy_the_recursion() {
        let x = [1.0, 0.5, -0.2, 0.7];
        let c = MaCoefficients { theta: vec![0.4, 0.1], mu: 0.3, sigma2: 1.0 };
        let mut st = InnovationState::with_past(vec![0.2, -0.6]);
        conditional_log_likelihood(&x, &c, &mut st);
        let full = [-0.6, 0.2, st.hat_eps[0], st.hat_eps[1], st.hat_eps[2], st.hat_eps[3]];
        for t in 0..4 {
            let e = x[t] - 0.3 - 0.4 * full[t + 1] - 0.1 * full[t];
            assert_eq!(e, st.hat_eps[t]);
        }
    }

    #[test]
    fn simulated_series_has_zero_residuals_given_true_past() {
        let c = MaCoefficients { theta: vec![0.6, 0.2], mu: 0.0, sigma2: 1.0 };
        let mut rng = RandomStream::new(1, 0);
        let (x, past) = simulate_series(&c, 200, &mut rng);
        let mut st = InnovationState::with_past(past);
        conditional_log_likelihood(&x, &c, &mut st);
        // residuals recover the driving noise: unit variance, no autocorrelation
        let v = stats::variance(&st.hat_eps);
        assert!((v - 1.0).abs() < 0.25);
        let lag1 = stats::correlation(&st.hat_eps[1..], &st.hat_eps[..199]);
        assert!(lag1.abs() < 0.2);
    }

    #[test]
    fn decoupled_past_is_standard_normal() {
        let c = MaCoefficients { theta: vec![0.0], mu: 0.0, sigma2: 1.0 };
        let x = [0.5, -0.3, 1.1];
        let mut st = InnovationState::with_past(vec![0.0]);
        let mut rng = RandomStream::new(2, 0);
        let thin = 20;
        let mut draws = Vec::with_capacity(10_000);
        for k in 0..10_000 * thin {
            gibbs_past_innovations(&x, &c, &mut st, 2.4, false, &mut rng);
            if k % thin == 0 {
                draws.push(st.past[0]);
            }
        }
        let d = stats::ks_statistic(&draws, crate::numerics::normal_cdf);
        assert!(d < stats::ks_critical_value_1pct(draws.len()), "KS {d}");
    }

    #[test]
    fn stationary_start_stays_stationary() {
        let c = MaCoefficients { theta: vec![0.0, 0.0], mu: 0.0, sigma2: 2.0 };
        let x = [0.5, -0.3, 1.1, 0.0];
        let mut rng = RandomStream::new(3, 0);
        let chains = 2000;
        let mut end = Vec::with_capacity(chains);
        for _ in 0..chains {
            let past = vec![2f64.sqrt() * rng.sample::<f64, _>(StandardNormal), 2f64.sqrt() * rng.sample::<f64, _>(StandardNormal)];
            let mut st = InnovationState::with_past(past);
            for _ in 0..1000 {
                gibbs_past_innovations(&x, &c, &mut st, 1.0, false, &mut rng);
            }
            end.push(st.past[0]);
        }
        let n = chains as f64;
        assert!(stats::mean(&end).abs() < 4.0 * (2.0 / n).sqrt());
        // Var(ε²) = 2σ⁴ for a normal
        let sq: Vec<f64> = end.iter().map(|e| e * e).collect();
        assert!((stats::mean(&sq) - 2.0).abs() < 4.0 * (8.0 / n).sqrt());
    }

    /// Conditional of ε₀ given x₁..x₅ for an MA(1), from the joint Gaussian
    /// of (ε₀, x) by Schur complement.
    fn eps0_conditional_oracle(x: &[f64], theta: f64, s2: f64) -> (f64, f64) {
        let n = x.len();
        let a = DMatrix::from_fn(n, n, |i, j| if i == j { 1.0 } else if i == j + 1 { theta } else { 0.0 });
        let mut b = DVector::zeros(n);
        b[0] = theta;
        let cov_x = (&a * a.transpose() + &b * b.transpose()) * s2;
        let cov_ex = &b * s2;
        let sol = cov_x.clone().cholesky().unwrap().solve(&DVector::from_column_slice(x));
        let w = cov_x.cholesky().unwrap().solve(&cov_ex);
        (cov_ex.dot(&sol), s2 - cov_ex.dot(&w))
    }

    #[test]
    fn eps0_conditional_matches_grid_brute_force() {
        let x = [0.8, -0.4, 1.3, 0.2, -0.9];
        let (theta, s2) = (0.7, 1.0);
        let c = MaCoefficients { theta: vec![theta], mu: 0.0, sigma2: s2 };
        let (m, v) = eps0_conditional_oracle(&x, theta, s2);
        let grid: Vec<f64> = (0..4001).map(|k| -8.0 + 16.0 * k as f64 / 4000.0).collect();
        let lp: Vec<f64> = grid
            .iter()
            .map(|&e| joint_log_likelihood(&x, &c, &mut InnovationState::with_past(vec![e])))
            .collect();
        let top = lp.iter().copied().fold(f64::NEG_INFINITY, f64::max);
        let w: Vec<f64> = lp.iter().map(|l| (l - top).exp()).collect();
        let wz: f64 = w.iter().sum();
        let o: Vec<f64> = grid.iter().map(|&e| (-(e - m).powi(2) / (2.0 * v)).exp()).collect();
        let oz: f64 = o.iter().sum();
        let tv = 0.5 * w.iter().zip(&o).map(|(a, b)| (a / wz - b / oz).abs()).sum::<f64>();
        assert!(tv < 1e-3, "TV {tv}");

        let mut st = InnovationState::with_past(vec![0.0]);
        let mut rng = RandomStream::new(4, 0);
        let mut draws = Vec::new();
        for k in 0..200_000 {
            gibbs_past_innovations(&x, &c, &mut st, 1.5, false, &mut rng);
            if k % 20 == 0 {
                draws.push(st.past[0]);
            }
        }
        let d = stats::ks_statistic(&draws, |e| crate::numerics::normal_cdf((e - m) / v.sqrt()));
        assert!(d < stats::ks_critical_value_1pct(draws.len()), "KS {d}");
    }

    #[test]
    fn series_csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("x.csv");
        let x = vec![0.1, -2.5, 3.0e-7];
        write_series_csv(&x, &p).unwrap();
        assert_eq!(read_series_csv(&p).unwrap(), x);
    }
}
