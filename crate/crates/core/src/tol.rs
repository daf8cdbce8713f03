//! Default tolerances. All are relative and Frobenius-scaled unless noted.

/// SVD cutoff for rank decisions, relative to the largest singular value.
pub const NUM: f64 = 1e-12;

/// Eigenpair residual bound for `eig_pencil`.
pub const EIG: f64 = 1e-9;

/// Symmetry residual bound for structure checks.
pub const STRUCT: f64 = 1e-10;

/// Relative residual bound for accepting a claimed deflating pair.
pub const DEFL: f64 = 1e-9;

/// Reciprocal condition below which the Gramian G is treated as singular.
pub const G_RCOND: f64 = 1e-12;

/// Eigenvalue equality: |a-b| <= EIG_EQ * (1 + max(|a|,|b|)).
pub const EIG_EQ: f64 = 1e-8;

/// Membership of a quadratic eigenvalue z in the set with purely imaginary z².
pub const QUAD_CLASS: f64 = 1e-8;

/// Definiteness: min eigenvalue >= -PSD * ||A||_F counts as semidefinite.
pub const PSD: f64 = 1e-10;

/// Relative residual bound for the core equation of a structured update.
pub const CORE: f64 = 1e-10;
