//! Conformal p-values and the two tests built on them.
//!
//! Two conventions coexist on purpose. A single conformal p-value ranks the
//! test score among `m` calibration scores *and itself* (denominator
//! `m + 1`, one guaranteed tie), which makes it exactly uniform under the
//! null. The shared-calibration multiple test instead uses denominator `n_p`
//! with no self term.

mod auc;
mod diagnostics;
mod multiple;
mod pvalue;
mod uniform;

pub use auc::{auc, auc_with_se, AucEstimate};
pub use diagnostics::{
    expected_pvalue_diagnostics, paired_pvalue_shift, Estimate, PValueDiagnostics,
};
pub use multiple::{multiple_test, multiple_test_sampled};
pub use pvalue::{conformal_pvalue, PValueBatch};
pub use uniform::{ks_outcome, uniform_pvalues, uniform_test, UniformTestConfig};

/// Decision record shared by every test in the crate.
#[derive(Debug, Clone, PartialEq)]
pub struct TestOutcome<T> {
    pub method: String,
    pub statistic: T,
    /// In `[0, 1]`.
    pub p_value: T,
    pub reject: bool,
    pub alpha: T,
    /// Set when the test fell back to a default decision.
    pub note: Option<String>,
}
