//! Modeling and security analysis of interdependent power-gas-water
//! infrastructure.
//!
//! The crate builds a linear state-space model of three coupled critical
//! infrastructures from a declarative topology, runs steady-state Kalman
//! estimation with a chi-square failure detector, quantifies the worst-case
//! stealthy sensor-attack impact per sensor cluster as a QCQP, solves the
//! attacker/defender Colonel Blotto resource-allocation game in closed form,
//! and verifies the equilibrium predictions by seeded Monte Carlo simulation.
//!
//! Pipeline stages map onto modules:
//!
//! - [`model`]: topology -> continuous state space -> bilinear discretization
//!   -> sensor matrix and cluster index.
//! - [`estimator`]: Riccati fixed point, fixed Kalman gain, simulation with
//!   optional impulse attacks, residue chi-square detection.
//! - [`attack`]: error/residue deviation dynamics, cumulative-error-difference
//!   maxima, the boundary QCQP for alpha-feasible attacks, cluster valuation.
//! - [`blotto`]: General Lotto / Colonel Blotto mixed equilibria, marginal
//!   distributions, sampling, payoffs and best responses.
//! - [`sim`]: end-to-end scenario runner, Monte Carlo match harness, reports.
//! - [`scenario`]: the JSON scenario document and its translation to models.
//! - [`report`]: deterministic CSV emission.

// validation deliberately writes `!(x > 0.0)` so NaN inputs are rejected
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod attack;
pub mod blotto;
pub mod error;
pub mod estimator;
pub mod labels;
pub mod linalg;
pub mod model;
pub mod report;
pub mod rng;
pub mod scenario;
pub mod sim;

pub use error::Error;

/// Crate-wide result alias.
pub type Result<T> = std::result::Result<T, Error>;
