//! Welch t-tests, the Student-t distribution and Fleiss' kappa.

mod kappa;
mod special;
mod ttest;

use thiserror::Error;

pub use kappa::fleiss_kappa;
pub use special::{ln_gamma, regularized_incomplete_beta, student_t_cdf, student_t_sf};
pub use ttest::{category_vs_rest, welch_t, TTestResult, Tail};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum StatsError {
    #[error("each sample needs at least two values (got {0} and {1})")]
    InsufficientSample(usize, usize),
    #[error("both samples have zero variance")]
    ZeroVarianceBoth,
    #[error("sample contains a non-finite value")]
    NonFinite,
    #[error("items are rated by different numbers of raters")]
    UnequalRaterCounts,
    #[error("kappa needs at least two raters per item and one item")]
    TooFewRatings,
    #[error("chance agreement is 1; kappa is undefined")]
    Degenerate,
}
