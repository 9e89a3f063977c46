//! Moving-average models parameterized by the inverse roots of their lag
//! polynomial, the innovation-completion likelihood, and a reversible-jump
//! sampler over real/complex root configurations.

mod likelihood;
mod rjmcmc;
mod roots;

pub use likelihood::{
    conditional_log_likelihood, gibbs_past_innovations, joint_log_likelihood, past_log_density,
    read_series_csv, simulate_series, write_series_csv, InnovationState,
};
pub use rjmcmc::{between_model_log_ratio, rjmcmc_run, rjmcmc_run_with, RjOptions, RjTrace};
pub use roots::{
    coeffs_to_roots, expand_roots, log_root_prior, roots_to_coeffs, sample_root_prior, MaCoefficients,
    RootsParam,
};
