//! The normal vs. double-exponential location benchmark: closed-form
//! evidences, the exact Bayes factor, the exact double-exponential posterior
//! as a mixture of truncated normals, and HPD regions.

mod hpd;
mod marginals;
mod posterior;
mod sample;

pub use hpd::{hpd_region, read_hpd_csv, write_hpd_csv, HpdRegion};
pub use marginals::{
    exact_log_bayes_factor, log_bayes_factor_score, log_likelihood_laplace, log_likelihood_normal,
    log_marginal_laplace, log_marginal_normal, log_unnormalized_posterior_laplace,
    log_unnormalized_posterior_normal, normal_posterior,
};
pub use posterior::{laplace_posterior, sample_laplace_posterior, MixtureComponent, PosteriorMixture};
pub use sample::{LocationModel, PriorSpec, SortedSample};
