//! Tail asymptotics for suprema of weighted L^p norms of vector-valued
//! Gaussian processes with trend, together with the Monte Carlo machinery
//! needed to estimate the occurring Pickands/Piterbarg-type constants and to
//! validate every formula against exact-simulation oracles.
//!
//! The crate is organized around six subsystems:
//!
//! - [`geometry`]: weight vectors, L^p/L^q duality and the critical scale `d`
//!   obtained by maximizing a weighted quadratic over the dual unit sphere.
//! - [`tail`]: one-point tail asymptotics of the powered norm process and the
//!   exact/Monte-Carlo oracles that certify them.
//! - [`paths`]: exact-in-distribution samplers for fractional Brownian
//!   motion, Ornstein-Uhlenbeck and stationary power-exponential processes.
//! - [`constants`]: estimation of Pickands constants and generalized
//!   Piterbarg constants, with closed forms where they exist.
//! - [`asymptotics`]: the supremum-tail approximation formulas (regime
//!   classification, drift functionals, multipliers) assembled into
//!   evaluable [`asymptotics::TailApproximation`] values.
//! - [`validate`]: crude Monte Carlo estimation of supremum exceedance
//!   probabilities and ratio-versus-asymptotic convergence reports.
//!
//! Everything random is driven by explicit `(seed, stream)` pairs so results
//! are reproducible bit-for-bit regardless of thread count.

pub mod asymptotics;
pub mod constants;
pub mod error;
pub mod geometry;
pub mod paths;
pub mod quad;
pub mod report;
pub mod rng;
pub mod tail;
pub mod validate;

pub use error::{Error, Result};
