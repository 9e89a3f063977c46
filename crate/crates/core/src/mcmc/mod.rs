//! Random-walk Metropolis–Hastings over an arbitrary log-target and the
//! conjugate Gibbs sampler for the dental growth mixed-effects model.

mod growth;
mod rwmh;
mod summary;
mod trace;

pub use growth::{
    gibbs_growth_run, gibbs_sweep, GrowthDataset, GrowthHyper, GrowthModelState, InverseGammaParams,
    NormalParams,
};
pub use rwmh::{rwmh_run, rwmh_run_with};
pub use summary::{intervals_overlap, summarize_chain, ComponentSummary};
pub use trace::ChainTrace;
