//! Centrally configured numerical tolerances.
//!
//! Every module reads its thresholds from here; no ad-hoc magic numbers in
//! solver or geometry code.

/// Maximum constraint violation accepted in a returned primal point.
pub const FEAS_TOL: f64 = 1e-7;

/// Pivots with absolute value below this are rejected by the simplex
/// ratio test.
pub const PIVOT_TOL: f64 = 1e-9;

/// A binary variable is integral when within this distance of 0 or 1.
pub const INT_TOL: f64 = 1e-6;

/// Complementary-slackness residual accepted at an LP optimum.
pub const COMP_TOL: f64 = 1e-6;

/// Squared-distance threshold under which the robust containment check
/// declares a point inside the hull.
pub const DIST_TOL: f64 = 1e-6;

/// Collinearity tolerance on 2-D cross products (hulls, vertex dedup).
pub const CROSS_TOL: f64 = 1e-9;

/// Margin distinguishing a strict probing-price inequality from noise.
pub const STRICT_TOL: f64 = 1e-8;

/// Absolute branch-and-bound gap at which an incumbent is declared optimal.
pub const MILP_GAP_TOL: f64 = 1e-9;
