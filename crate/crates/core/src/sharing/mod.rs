//! Analog secret sharing at the complex roots of unity.
//!
//! A secret `X` is hidden as the constant term of a degree-`T` polynomial
//! whose other coefficients are Gaussian noise matrices; client `i` receives
//! the evaluation at ω_i. Any `T+1` evaluations recover `X` by a Vandermonde
//! solve, while `T` evaluations are consistent with any constant term.

mod bound;
mod polynomial;
mod reconstruct;
mod record;
mod witness;

pub use bound::{perturbation_bound, PerturbationBoundInputs, DEFAULT_PRECISION_BITS};
pub use polynomial::{evaluate_shares, make_share_polynomial, SharePolynomial, RESAMPLE_CAP};
pub use reconstruct::{
    reconstruct, reconstruct_complex, recovery_weights, Reconstruction, IMAG_TOLERANCE,
};
pub use record::Share;
pub use witness::{underdetermination_witness, WitnessPolynomial};
