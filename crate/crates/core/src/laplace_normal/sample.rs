use std::path::Path;

use rand::Rng;
use rand_distr::{Exp1, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// A data vector kept in ascending order, with the sums the closed-form
/// evidences need cached alongside.
#[derive(Debug, Clone, PartialEq)]
pub struct SortedSample {
    x: Vec<f64>,
    mean: f64,
    ss: f64,
    // prefix[i] = x₁ + … + xᵢ, prefix[0] = 0
    prefix: Vec<f64>,
}

impl SortedSample {
    pub fn new(mut x: Vec<f64>) -> Result<Self> {
        if let Some(bad) = x.iter().find(|v| !v.is_finite()) {
            return domain(format!("sample values must be finite, got {bad}"));
        }
        x.sort_by(f64::total_cmp);
        let n = x.len();
        let mean = if n == 0 { 0.0 } else { x.iter().sum::<f64>() / n as f64 };
        let ss = x.iter().map(|v| (v - mean).powi(2)).sum();
        let mut prefix = Vec::with_capacity(n + 1);
        prefix.push(0.0);
        let mut acc = 0.0;
        for v in &x {
            acc += v;
            prefix.push(acc);
        }
        Ok(Self { x, mean, ss, prefix })
    }

    pub fn values(&self) -> &[f64] {
        &self.x
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.mean
    }

    /// Σ (xᵢ − x̄)².
    pub fn sum_sq_dev(&self) -> f64 {
        self.ss
    }

    /// Order statistic with sentinels: `x₀ = −∞`, `x_{n+1} = +∞`, 1-based
    /// otherwise.
    pub fn order_stat(&self, i: usize) -> f64 {
        if i == 0 {
            f64::NEG_INFINITY
        } else if i > self.x.len() {
            f64::INFINITY
        } else {
            self.x[i - 1]
        }
    }

    /// Sum of the `i` smallest values.
    pub fn lower_sum(&self, i: usize) -> f64 {
        self.prefix[i]
    }

    /// Sum of all but the `i` smallest values.
    pub fn upper_sum(&self, i: usize) -> f64 {
        self.prefix[self.x.len()] - self.prefix[i]
    }

    pub fn shifted(&self, c: f64) -> Result<Self> {
        Self::new(self.x.iter().map(|v| v + c).collect())
    }

    /// Reads a single-column CSV with header `x`.
    pub fn from_csv(path: impl AsRef<Path>) -> Result<Self> {
        let mut rdr = csv::Reader::from_path(path)?;
        let headers = rdr.headers()?.clone();
        if headers.len() != 1 || &headers[0] != "x" {
            return Err(Error::Data(format!("expected a single column `x`, found {:?}", headers)));
        }
        let mut x = Vec::new();
        for (line, rec) in rdr.records().enumerate() {
            let rec = rec?;
            let v: f64 = rec[0]
                .trim()
                .parse()
                .map_err(|_| Error::Data(format!("row {}: `{}` is not a number", line + 1, &rec[0])))?;
            x.push(v);
        }
        Self::new(x)
    }

    pub fn write_csv(&self, path: impl AsRef<Path>) -> Result<()> {
        let mut w = csv::Writer::from_path(path)?;
        w.write_record(["x"])?;
        for v in &self.x {
            w.write_record([format!("{v}")])?;
        }
        w.flush()?;
        Ok(())
    }
}

/// Normal prior `μ ~ N(0, σ²)` shared by both models.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PriorSpec {
    sigma2: f64,
}

impl PriorSpec {
    pub fn new(sigma2: f64) -> Result<Self> {
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return domain(format!("prior variance must be positive and finite, got {sigma2}"));
        }
        Ok(Self { sigma2 })
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn sigma(&self) -> f64 {
        self.sigma2.sqrt()
    }

    pub fn log_density(&self, mu: f64) -> f64 {
        crate::numerics::normal_log_density(mu, 0.0, self.sigma2)
    }
}

impl Default for PriorSpec {
    fn default() -> Self {
        Self { sigma2: 1.0 }
    }
}

/// The two competing unit-variance location models.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LocationModel {
    Normal,
    Laplace,
}

impl LocationModel {
    pub fn as_str(self) -> &'static str {
        match self {
            LocationModel::Normal => "normal",
            LocationModel::Laplace => "laplace",
        }
    }

    /// One draw with location `mu` and unit variance.
    pub fn draw<R: Rng + ?Sized>(self, mu: f64, rng: &mut R) -> f64 {
        match self {
            LocationModel::Normal => mu + rng.sample::<f64, _>(StandardNormal),
            LocationModel::Laplace => {
                let e: f64 = rng.sample(Exp1);
                let b = std::f64::consts::FRAC_1_SQRT_2;
                if rng.random::<bool>() { mu + b * e } else { mu - b * e }
            }
        }
    }

    pub fn simulate<R: Rng + ?Sized>(self, n: usize, mu: f64, rng: &mut R) -> Vec<f64> {
        (0..n).map(|_| self.draw(mu, rng)).collect()
    }

    pub fn simulate_sample<R: Rng + ?Sized>(self, n: usize, mu: f64, rng: &mut R) -> Result<SortedSample> {
        SortedSample::new(self.simulate(n, mu, rng))
    }
}

impl std::fmt::Display for LocationModel {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

impl std::str::FromStr for LocationModel {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "normal" => Ok(LocationModel::Normal),
            "laplace" => Ok(LocationModel::Laplace),
            other => Err(Error::Domain(format!("unknown location model `{other}`"))),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn sorts_and_caches() {
        let s = SortedSample::new(vec![3.0, -1.0, 2.0]).unwrap();
        assert_eq!(s.values(), &[-1.0, 2.0, 3.0]);
        assert!((s.mean() - 4.0 / 3.0).abs() < 1e-15);
        assert_eq!(s.order_stat(0), f64::NEG_INFINITY);
        assert_eq!(s.order_stat(4), f64::INFINITY);
        assert_eq!(s.lower_sum(2), 1.0);
        assert_eq!(s.upper_sum(1), 5.0);
    }

    #[test]
    fn rejects_non_finite() {
        assert!(SortedSample::new(vec![1.0, f64::NAN]).is_err());
        assert!(PriorSpec::new(0.0).is_err());
        assert!(PriorSpec::new(f64::INFINITY).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("s.csv");
        let s = SortedSample::new(vec![0.25, -3.5, 1e-7]).unwrap();
        s.write_csv(&p).unwrap();
        assert_eq!(SortedSample::from_csv(&p).unwrap(), s);
        std::fs::write(&p, "y\n1\n").unwrap();
        assert!(SortedSample::from_csv(&p).is_err());
    }

    #[test]
    fn simulated_moments() {
        let mut rng = crate::numerics::RandomStream::new(5, 0);
        for model in [LocationModel::Normal, LocationModel::Laplace] {
            let x = model.simulate(100_000, 1.5, &mut rng);
            let m = crate::stats::mean(&x);
            let v = crate::stats::variance(&x);
            assert!((m - 1.5).abs() < 0.015, "{model}: mean {m}");
            assert!((v - 1.0).abs() < 0.03, "{model}: var {v}");
            assert_eq!(model.as_str().parse::<LocationModel>().unwrap(), model);
        }
    }
}
