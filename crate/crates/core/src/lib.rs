//! Bivariate natural exponential families whose variance function has a
//! quadratic diagonal.
//!
//! The pipeline runs from the seven diagonal parameters to a verdict:
//! [`roots`] builds and solves the characteristic quartic, [`model`] forms
//! the candidate transform `(sum alpha_i e^{<v_i, theta>})^r` and decides
//! whether it can come from a probability measure, [`measure`] realizes the
//! measure and checks its variance and regression identities, and
//! [`series`] exposes the coefficient-level arguments.

pub mod measure;
pub mod model;
pub mod roots;
pub mod scalar;
pub mod series;

pub use measure::{
    cumulant_eval, diag_variance_check, fd_hessian, fd_hessian_model, mean_to_theta, realize_measure,
    regression_check, theta_grid, tilt_member, CumulantValue, DiagCheckReport, FiniteMeasure, MeasureError,
    RegressionReport,
};
pub use model::{
    admissibility_verdict, build_lambda_matrix, candidate_model, candidate_model_exact, normalize_model,
    star_condition, AdmissibilityVerdict, Atom, CandidateModel, LatticeMatrix, ModelError, Outcome, RejectReason,
    StarReport, VerdictOptions,
};
pub use roots::{
    build_characteristic_quartic, build_dual_quartic, classify_root_pattern, dual_ordinate, solve_quartic,
    DiagonalVFParams, Quartic, RootPattern, RootSet, RootsError,
};
pub use scalar::{parse_rational, Rational, Scalar};
pub use series::{expand_series, first_negative_coefficient, magnitude_scan, EliminationForm, SeriesReport};
