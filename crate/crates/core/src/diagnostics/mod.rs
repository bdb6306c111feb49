//! Numerical checks of the hypotheses and limit statements behind the
//! simulation: integrability of kernels, point-process identities, and
//! two-sample comparison of transient and stationary fdd vectors.
//!
//! Every check reports evidence with its estimates attached. None of them
//! can prove an analytic property.

mod convergence;
mod dri;
mod pointprocess;

pub use convergence::{
    compare_samples, convergence_test, convergence_test_with, ComparisonReport, ConvergenceOptions,
    ConvergenceReport, Warning, stationary_base, transient_base,
};
pub use dri::{dri_mean_check, dri_path_check, DriCriterion, DriReport, TailFit, Verdict};
pub use pointprocess::{
    intensity_check, laplace_functional_compare, overshoot_check, shift_invariance_check,
    IntensityRow, LaplaceReport, OvershootReport, ShiftReport, Z_99,
};
