//! Usability-study statistics: System Usability Scale scoring and one-way
//! ANOVA with exact F-distribution tail probabilities.
//!
//! Everything here is pure computation over plain values. The `input` module
//! reads the participant CSV and group-summary JSON formats used by the
//! `zonecap eval` command.

pub mod anova;
pub mod error;
pub mod fdist;
pub mod input;
pub mod sus;

pub use anova::{anova_from_raw, anova_from_summary, AnovaResult, GroupSummary};
pub use error::EvalError;
pub use fdist::{f_survival, ln_beta, ln_gamma, regularized_incomplete_beta};
pub use sus::{sus_mean, sus_score, SusResponse};
