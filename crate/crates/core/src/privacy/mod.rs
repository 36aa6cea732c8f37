//! Local differential privacy for share releases.
//!
//! A share leaks the secret plus truncated Gaussian noise. For sensitivity Δ
//! and truncation half-width `t`, the probability that the privacy loss
//! exceeds ε is the objective B(α), α = σ√(2ε)/Δ. B decreases in α on
//! (0, √(2t/Δ − 1)), so the smallest admissible noise is the root of
//! B(α) = δ, found by bisection.

mod audit;
mod calibrate;
mod loss;
mod objective;

pub use audit::{audit_mechanism, audit_protocol_noise, AuditResult, AUDIT_SHARDS};
pub use calibrate::{calibrate, PrivacyBudget};
pub use loss::{compute_sensitivity, privacy_loss_scalar, vector_privacy_loss, NeighborSpec};
pub use objective::{
    alpha_upper, analytic_violation_prob, b_objective, b_objective_terms, strictly_decreasing, ObjectiveTerms,
};
