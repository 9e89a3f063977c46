//! Monte Carlo tools for Bayesian model comparison, built around the normal
//! vs. double-exponential location benchmark whose Bayes factor is known in
//! closed form.
//!
//! - [`numerics`]: log-space reductions, tail-stable normal probabilities,
//!   truncated normal sampling and reproducible random streams.
//! - [`laplace_normal`]: exact evidences, the exact double-exponential
//!   posterior (a mixture of truncated normals) and HPD regions.
//! - [`evidence`]: prior Monte Carlo and bridge sampling Bayes factor
//!   estimators.
//! - [`mcmc`]: random-walk Metropolis–Hastings and a Gibbs sampler for a
//!   growth mixed-effects model.
//! - [`ma`]: MA(p) root parameterization and a reversible-jump sampler over
//!   root configurations.
//! - [`abc`]: rejection ABC, ABC model choice and semi-automatic summaries.
//!
//! Kernels that do not depend on special functions are generic over
//! [`Scalar`] (`f32` or `f64`); the aliases below fix the usual `f64` choice.

pub mod abc;
pub mod error;
pub mod evidence;
pub mod laplace_normal;
pub mod ma;
pub mod mcmc;
pub mod numerics;
pub mod quadrature;
pub mod scalar;
pub mod stats;

pub use error::{Error, Result};
pub use scalar::Scalar;

pub type LogWeights = numerics::LogWeightVector<f64>;
pub type Roots = ma::RootsParam<f64>;
pub type Coefficients = ma::MaCoefficients<f64>;
pub type Innovations = ma::InnovationState<f64>;
