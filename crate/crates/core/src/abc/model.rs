use crate::error::{Error, Result};
use crate::laplace_normal::{LocationModel, PriorSpec};
use crate::ma::{roots_to_coeffs, sample_root_prior, simulate_series, MaCoefficients};
use crate::numerics::{normal_cdf, RandomStream};
use rand::Rng;
use rand_distr::StandardNormal;

/// A prior over parameters together with a data simulator.
pub trait GenerativeModel: Send + Sync {
    fn name(&self) -> String;
    fn param_dim(&self) -> usize;
    fn sample_prior(&self, rng: &mut RandomStream) -> Vec<f64>;
    fn simulate(&self, theta: &[f64], rng: &mut RandomStream) -> Result<Vec<f64>>;
    /// Marginal prior CDF of coordinate `j`, when available in closed form.
    fn prior_cdf(&self, _j: usize, _v: f64) -> Option<f64> {
        None
    }
}

/// `n` iid unit-variance observations with location `μ ~ N(0, σ²)`.
#[derive(Debug, Clone, Copy)]
pub struct LocationAbcModel {
    pub family: LocationModel,
    pub n: usize,
    pub prior: PriorSpec,
}

impl GenerativeModel for LocationAbcModel {
    fn name(&self) -> String {
        self.family.as_str().to_string()
    }
    fn param_dim(&self) -> usize {
        1
    }
    fn sample_prior(&self, rng: &mut RandomStream) -> Vec<f64> {
        vec![self.prior.sigma() * rng.sample::<f64, _>(StandardNormal)]
    }
    fn simulate(&self, theta: &[f64], rng: &mut RandomStream) -> Result<Vec<f64>> {
        Ok(self.family.simulate(self.n, theta[0], rng))
    }
    fn prior_cdf(&self, _j: usize, v: f64) -> Option<f64> {
        Some(normal_cdf(v / self.prior.sigma()))
    }
}

/// MA(p) series of length `len` with coefficients drawn through the root
/// prior; the parameter is the coefficient vector `ϑ`.
#[derive(Debug, Clone, Copy)]
pub struct MaRootModel {
    pub p: usize,
    pub len: usize,
}

impl GenerativeModel for MaRootModel {
    fn name(&self) -> String {
        format!("ma{}", self.p)
    }
    fn param_dim(&self) -> usize {
        self.p
    }
    fn sample_prior(&self, rng: &mut RandomStream) -> Vec<f64> {
        roots_to_coeffs(&sample_root_prior(self.p, rng))
    }
    fn simulate(&self, theta: &[f64], rng: &mut RandomStream) -> Result<Vec<f64>> {
        if theta.len() != self.p || theta.iter().any(|v| !v.is_finite()) {
            return Err(Error::Simulation { theta: theta.to_vec(), message: "invalid MA coefficients".into() });
        }
        Ok(simulate_series(&MaCoefficients::standard(theta.to_vec()), self.len, rng).0)
    }
}
