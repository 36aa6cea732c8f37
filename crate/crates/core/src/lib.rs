//! Analog multiparty computation with locally differentially private sharing.
//!
//! Clients share real-valued matrices as evaluations of random polynomials at
//! the complex `N`-th roots of unity. Additions and scalings are local, and
//! products go through Beaver triples whose differences are opened with a
//! Vandermonde solve. The sharing noise is a truncated Gaussian calibrated to
//! an `(ε, δ)` local differential privacy budget.
//!
//! Module map:
//!
//! * [`numerics`]: matrices, the normal CDF, truncated sampling, roots of unity
//!   and Vandermonde conditioning.
//! * [`sharing`]: share polynomials, evaluation, reconstruction, the
//!   floating-point perturbation bound and the collusion witness.
//! * [`network`]: a deterministic in-process network of honest-but-curious
//!   clients with a message transcript.
//! * [`mpc`]: share arithmetic, Beaver multiplication and program execution.
//! * [`privacy`]: sensitivity, privacy loss, the violation objective, noise
//!   calibration and Monte-Carlo auditing.
//! * [`learn`]: private logistic and linear regression built on the
//!   cross-share product, plus centralized baselines.
//! * [`cli`]: the `ampc` command-line front end.

pub mod cli;
pub mod error;
pub mod exec;
pub mod learn;
pub mod mpc;
pub mod network;
pub mod numerics;
pub mod privacy;
pub mod rng;
pub mod sharing;

pub use error::{AmpcError, Result};
pub use exec::Execution;
