//! Special functions and integration primitives.

pub mod gamma;
pub mod hypergeometric;
pub mod j_integral;
pub mod quadrature;

pub use gamma::{log_beta, log_gamma, log_pochhammer, SignedLog};
pub use hypergeometric::{hyp3f2_at_one, hyp3f2_margin, hyp3f2_partial_sums};
pub use j_integral::{j_integral, j_monte_carlo, ln_j_integral, ln_j_quadrature, JArgs, JMethod, McEstimate};
pub use quadrature::{
    integrate_halfline, integrate_halfline_log, integrate_quadrant, integrate_quadrant_log_vec, integrate_unit,
    integrate_unit_log, Estimate, HalfLineMap, QuadrantPoint, QuadratureSpec, UnitPoint,
};
