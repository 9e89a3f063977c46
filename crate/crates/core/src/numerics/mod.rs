//! Special functions, log-space reductions, random streams and elementary
//! samplers shared by every other module.

mod densities;
mod logspace;
mod random;
mod special;
mod truncnorm;

pub use densities::{laplace_log_density, normal_log_density, standard_densities};
pub use logspace::{log_add_exp, log_diff_exp, log_sum_exp, LogWeightVector};
pub use random::RandomStream;
pub use special::{
    log_normal_cdf, log_phi_interval, normal_cdf, normal_quantile, LN_SQRT_2PI,
};
pub use truncnorm::{sample_truncated_normal, TruncatedNormalSpec};
