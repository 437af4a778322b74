//! Numerical kernel shared by the analytical methods: adaptive quadrature,
//! Lambert W, the regularized incomplete beta function, monotone root finding,
//! Hermite interpolation and seeded random streams.

pub mod beta;
pub mod gamma;
pub mod interp;
pub mod lambert;
pub mod quadrature;
pub mod rng;
pub mod roots;

pub use beta::{ln_beta, ln_gamma, regularized_incomplete_beta};
pub use gamma::regularized_lower_gamma;
pub use interp::HermiteTable;
pub use lambert::{lambert_w0, lambert_w0_exp};
pub use quadrature::{integrate, Integrator, QuadValue, QuadratureResult};
pub use rng::{stream, StreamRng};
pub use roots::find_root_monotone;

/// Innermost, middle and outer absolute tolerances for nested integrals.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ToleranceBudget {
    pub inner: f64,
    pub middle: f64,
    pub outer: f64,
}

impl Default for ToleranceBudget {
    fn default() -> Self {
        Self {
            inner: 1e-10,
            middle: 1e-9,
            outer: 1e-8,
        }
    }
}
