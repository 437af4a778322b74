//! Uplink SINR meta distribution of Poisson cellular networks with truncated
//! fractional path-loss inversion power control and Rayleigh fading.
//!
//! Three analytical routes are provided:
//!
//! * [`dominant`]: nearest interferer treated exactly, the rest through their
//!   conditional mean, inverted in closed form with the Lambert W function;
//! * [`moments`]: moments of the conditional success probability, the
//!   two-moment beta approximation and exact Gil-Pelaez inversion;
//! * [`sim`]: a Monte-Carlo network simulator used as the reference.
//!
//! [`model`] holds the system parameters and distance laws shared by all of
//! them, [`numerics`] the quadrature and special-function kernel, and
//! [`cli`] the command-line front end.

// `!(x > 0.0)` style checks are used on purpose: they also reject NaN.
#![allow(clippy::neg_cmp_op_on_partial_ord)]
// quadrature and Lanczos constants are quoted at full published precision
#![allow(clippy::excessive_precision)]

pub mod cli;
pub mod dominant;
pub mod error;
pub mod model;
pub mod moments;
pub mod numerics;
pub mod sim;

pub use dominant::{DominantModel, ThresholdContext};
pub use error::{Error, Result};
pub use model::{LinkDistances, SystemParams};
pub use moments::{BetaShape, MomentEngine, MomentKernel, MomentValue};
pub use sim::{Realization, SimConfig};
