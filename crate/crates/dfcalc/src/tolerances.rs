//! Every tolerance used by the verification machinery, in one place.

/// Scaled deviation bound for identity checks under the float backend.
///
/// Deviations are divided by `max(1, largest |value| on the common domain)`
/// before comparison; grids stay at or below 64 points, so the kernel sums
/// accumulate well under 1e3 rounding steps of f64 arithmetic.
pub const FLOAT_IDENTITY_TOL: f64 = 1e-10;

/// Relative agreement demanded between the kernel recurrence and the
/// log-gamma route, for m <= 128 and orders in (0, 4].
pub const KERNEL_GAMMA_REL_TOL: f64 = 1e-12;

/// Central-difference consistency bound for caller-supplied Lagrangian
/// partial derivatives (float backend self-check).
pub const PARTIALS_SELF_CHECK_TOL: f64 = 1e-6;

/// Relative agreement between the exact first variation and a central
/// finite difference of the functional.
pub const FIRST_VARIATION_FD_REL_TOL: f64 = 1e-7;

/// How closely the descent oracle must reproduce the linear solver's
/// extremizer, and the residual bound at the oracle's final iterate.
pub const BRUTE_FORCE_AGREEMENT_TOL: f64 = 1e-5;

/// Float bound on Euler–Lagrange residuals of solved quadratic problems.
pub const EL_RESIDUAL_FLOAT_TOL: f64 = 1e-10;

/// Agreement between the solver at order 1 - 1e-6 and the classical
/// second-difference solution of the same data.
pub const CLASSICAL_LIMIT_TOL: f64 = 1e-3;

/// Descent oracle internals: Armijo slope factor, the gradient norm that
/// counts as converged, and the default iteration cap.
pub const ARMIJO_SLOPE: f64 = 1e-4;
pub const DESCENT_GRAD_TOL: f64 = 1e-9;
pub const DESCENT_MAX_ITERS: usize = 10_000;
