use nalgebra::DMatrix;
use rand_distr::{Distribution, StandardNormal};

use super::reject::AbcReferenceTable;
use crate::error::{domain, Result};
use crate::numerics::RandomStream;

/// Quadratic loss `(θ̂ − θ)ᵀA(θ̂ − θ)` paired with the acceptance kernel's
/// second moment `∫ xᵀAx K(x) dx`.
#[derive(Debug, Clone, PartialEq)]
pub struct LossSpec {
    a: DMatrix<f64>,
    kernel_second_moment: f64,
}

impl LossSpec {
    pub fn new(a: DMatrix<f64>, kernel_second_moment: f64) -> Result<Self> {
        if !a.is_square() || a.nrows() == 0 {
            return domain("loss matrix must be square and non-empty");
        }
        let scale = a.amax().max(1.0);
        if (&a - a.transpose()).amax() > 1e-12 * scale {
            return domain("loss matrix must be symmetric");
        }
        let mut rng = RandomStream::new(0x4c05_5, 0);
        for _ in 0..64 {
            let x = DMatrix::from_fn(a.nrows(), 1, |_, _| StandardNormal.sample(&mut rng));
            let q = (x.transpose() * &a * &x)[(0, 0)];
            if q < -1e-12 * scale * x.norm_squared() {
                return domain("loss matrix must be positive semi-definite");
            }
        }
        if !(kernel_second_moment >= 0.0 && kernel_second_moment.is_finite()) {
            return domain(format!("kernel second moment must be finite and non-negative, got {kernel_second_moment}"));
        }
        Ok(Self { a, kernel_second_moment })
    }

    /// Uniform kernel on `[−1, 1]^d`, whose coordinates have second moment
    /// 1/3, giving `trace(A)/3`.
    pub fn uniform_kernel(a: DMatrix<f64>) -> Result<Self> {
        let m = a.trace() / 3.0;
        Self::new(a, m)
    }

    pub fn identity(dim: usize) -> Result<Self> {
        Self::uniform_kernel(DMatrix::identity(dim, dim))
    }

    pub fn a(&self) -> &DMatrix<f64> {
        &self.a
    }

    pub fn kernel_second_moment(&self) -> f64 {
        self.kernel_second_moment
    }
}

/// Bias–variance decomposition of the expected ABC loss at the table's
/// tolerance.
#[derive(Debug, Clone)]
pub struct LossDiagnostics {
    pub trace_term: f64,
    pub bandwidth_term: f64,
    pub recommended_h: f64,
    pub covariance: DMatrix<f64>,
    /// Parameter coordinates with zero empirical variance among accepted
    /// records; the covariance is singular when this is non-empty.
    pub zero_variance: Vec<usize>,
    kernel_second_moment: f64,
}

impl LossDiagnostics {
    /// `trace(AΣ̂) + h² ∫ xᵀAx K(x) dx`.
    pub fn expected_loss(&self, h: f64) -> f64 {
        self.trace_term + h * h * self.kernel_second_moment
    }
}

pub fn abc_loss_diagnostics(table: &AbcReferenceTable, loss: &LossSpec, n: usize, d: usize) -> Result<LossDiagnostics> {
    let acc = table.accepted_indices();
    if acc.len() < 2 {
        return domain(format!("loss diagnostics need at least 2 accepted records, got {}", acc.len()));
    }
    let p = table.param_dim();
    if loss.a.nrows() != p {
        return domain(format!("loss matrix is {0}x{0} but parameters have dimension {p}", loss.a.nrows()));
    }
    if n == 0 {
        return domain("N must be positive");
    }
    let k = acc.len() as f64;
    let mut mean = vec![0.0; p];
    for &i in &acc {
        for (m, v) in mean.iter_mut().zip(table.theta(i)) {
            *m += v / k;
        }
    }
    let mut cov = DMatrix::zeros(p, p);
    for &i in &acc {
        let t = table.theta(i);
        for r in 0..p {
            for c in 0..p {
                cov[(r, c)] += (t[r] - mean[r]) * (t[c] - mean[c]) / (k - 1.0);
            }
        }
    }
    let zero_variance = (0..p)
        .filter(|&j| acc.iter().all(|&i| table.theta(i)[j] == table.theta(acc[0])[j]))
        .collect();
    let eps = table.epsilon();
    Ok(LossDiagnostics {
        trace_term: (&loss.a * &cov).trace(),
        bandwidth_term: eps * eps * loss.kernel_second_moment,
        recommended_h: (n as f64).powf(-1.0 / (4.0 + d as f64)),
        covariance: cov,
        zero_variance,
        kernel_second_moment: loss.kernel_second_moment,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::abc::{abc_reject, GenerativeModel, MaRootModel, AcfSummary};
    use crate::error::Error;
    use crate::stats;
    use rand::Rng;

    fn ma_table() -> AbcReferenceTable {
        let obs: Vec<f64> = (0..60).map(|k| ((k * k) as f64 * 0.37).sin()).collect();
        abc_reject(&MaRootModel { p: 2, len: 60 }, &obs, &AcfSummary { lags: 2 }, 5000, 0.05, &RandomStream::new(1, 0)).unwrap()
    }

    #[test]
    fn identity_trace_is_sum_of_variances() {
        let t = ma_table();
        let diag = abc_loss_diagnostics(&t, &LossSpec::identity(2).unwrap(), 5000, 2).unwrap();
        let v: f64 = (0..2).map(|j| stats::variance(&t.accepted_theta(j))).sum();
        assert!((diag.trace_term - v).abs() < 1e-12);
        assert_eq!(diag.expected_loss(0.0), diag.trace_term);
        assert!((diag.recommended_h - 5000f64.powf(-1.0 / 6.0)).abs() < 1e-15);
        assert!((diag.bandwidth_term - t.epsilon().powi(2) * 2.0 / 3.0).abs() < 1e-12);
        assert!(diag.zero_variance.is_empty());
    }

    #[test]
    fn uniform_second_moment_by_monte_carlo() {
        let mut rng = RandomStream::new(2, 0);
        for d in [1usize, 3, 6] {
            let analytic = LossSpec::identity(d).unwrap().kernel_second_moment();
            assert!((analytic - d as f64 / 3.0).abs() < 1e-15);
            let m = 200_000;
            let mc: f64 = (0..m)
                .map(|_| (0..d).map(|_| rng.random_range(-1.0f64..1.0).powi(2)).sum::<f64>())
                .sum::<f64>()
                / m as f64;
            assert!((mc - analytic).abs() < 0.01 * d as f64, "d={d}: {mc}");
        }
    }

    #[test]
    fn rejects_bad_loss_matrices() {
        assert!(LossSpec::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.5, 0.0, 1.0]), 1.0).is_err());
        assert!(LossSpec::new(DMatrix::from_row_slice(2, 2, &[1.0, 0.0, 0.0, -1.0]), 1.0).is_err());
        assert!(LossSpec::new(DMatrix::identity(2, 2), -1.0).is_err());
        assert!(LossSpec::new(DMatrix::from_row_slice(2, 2, &[2.0, 1.0, 1.0, 2.0]), 0.5).is_ok());
    }

    #[test]
    fn constant_parameter_is_flagged() {
        struct Pinned;
        impl GenerativeModel for Pinned {
            fn name(&self) -> String {
                "pinned".into()
            }
            fn param_dim(&self) -> usize {
                2
            }
            fn sample_prior(&self, rng: &mut RandomStream) -> Vec<f64> {
                vec![rng.random(), 1.5]
            }
            fn simulate(&self, th: &[f64], rng: &mut RandomStream) -> Result<Vec<f64>> {
                Ok((0..5).map(|_| th[0] + rng.random::<f64>()).collect())
            }
        }
        let t = abc_reject(&Pinned, &[0.5; 5], &crate::abc::MeanSummary, 500, 0.1, &RandomStream::new(3, 0)).unwrap();
        let diag = abc_loss_diagnostics(&t, &LossSpec::identity(2).unwrap(), 500, 1).unwrap();
        assert_eq!(diag.zero_variance, vec![1]);
        let few = t.with_quantile(0.001).unwrap();
        assert!(matches!(abc_loss_diagnostics(&few, &LossSpec::identity(2).unwrap(), 500, 1), Err(Error::Domain(_))));
    }
}
