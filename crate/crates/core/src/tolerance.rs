//! Numerical acceptance thresholds shared by every module.

/// Allowed deviation of a squared norm or a trace from one.
pub const NORM: f64 = 1e-10;

/// Max entrywise `|M - M†|` for an operator to count as Hermitian.
pub const HERMITICITY: f64 = 1e-10;

/// Smallest eigenvalue accepted for a positive semidefinite operator.
pub const EIGENVALUE_FLOOR: f64 = -1e-10;

/// Norms below this are treated as exactly zero.
pub const ZERO_NORM: f64 = 1e-12;

/// Outcome probabilities below this cannot be post-selected on.
pub const DEGENERATE_PROBABILITY: f64 = 1e-12;

/// Largest composite dimension that will be materialized densely by default.
pub const MAX_DENSE_DIMENSION: usize = 1 << 20;
