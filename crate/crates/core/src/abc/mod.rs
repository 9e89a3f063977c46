//! Approximate Bayesian computation: rejection sampling against a simulated
//! reference table, ABC model choice, a registry of summary statistics and
//! semi-automatic (regression) summaries with bandwidth diagnostics.

mod loss;
mod model;
mod reject;
mod semi_auto;
mod summary;

pub use loss::{abc_loss_diagnostics, LossDiagnostics, LossSpec};
pub use model::{GenerativeModel, LocationAbcModel, MaRootModel};
pub use reject::{abc_model_choice, abc_reject, AbcReferenceTable, DistanceScaling, ModelChoice, TableMetadata};
pub use semi_auto::{semi_auto_abc, semi_auto_summary_fit, SemiAutoSummary};
pub use summary::{
    acf_summary, median, median_mad_summaries, AcfSummary, ConcatSummary, MadSummary, MeanSummary,
    MedianMadSummary, MedianSummary, SummaryStatistic,
};
