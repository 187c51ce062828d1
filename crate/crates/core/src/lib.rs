//! Iteration, bound verification, and limit estimation for the quadratic
//! recurrence `x -> r*x*(1-x)` near its attracting fixed points, together
//! with the matching continuum flows.
//!
//! The crate is organized around the regimes of the growth parameter:
//!
//! - [`map`]: the map itself, parameter domains, precision policy, and raw
//!   trajectory generation.
//! - [`marginal`]: the r = 1 regime, where decay is an inverse power law;
//!   telescoping decomposition, two-sided envelopes, partial-sum bounds,
//!   and the `n*lambda_n -> 1/beta` limit estimator.
//! - [`subcritical`]: 0 < r < 1; exponential envelope, log-telescoping rate
//!   analysis, and the `ln(lambda_n)/n -> ln r` limit estimator.
//! - [`superattractor`]: r = 2; the exact closed-form deviation from the
//!   interior fixed point in an underflow-proof log representation.
//! - [`flow`]: continuum analogues (Verhulst growth and polynomial decay
//!   flows), closed forms, an adaptive integrator, and bound checks.
//! - [`verify`]: the acceptance suite run by the CLI and the test gate.

pub mod error;
pub mod flow;
pub mod map;
pub mod marginal;
pub mod numeric;
pub mod ode;
pub mod subcritical;
pub mod superattractor;
pub mod verify;

pub use error::{Error, Result};
pub use map::{MapForm, MapParams, PrecisionMode, PrecisionPolicy, Summation, Trajectory};
