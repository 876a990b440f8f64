//! Utility-based provider scoring.
//!
//! Every attribute value is a normalized quality `q` in `[0, 1]` (higher is
//! better). A provider's score is the weighted sum of per-attribute
//! utilities `q^beta`, where the user's weights sum to one and `beta >= 0`
//! expresses how sharply the user penalizes shortfalls on that attribute.
//! The eligibility threshold is the same sum evaluated at the user's minimum
//! acceptable values.

mod normalize;
pub(crate) mod rank;
mod request;
mod utility;

use thiserror::Error;

pub use normalize::{normalize_offers, NormalizedOffer};
pub use rank::{rank, RankEntry, RankingReport, RequestEcho};
pub use request::{
    validate_request, MinimumRequirements, RequestViolation, SensitivityVector, ValidatedRequest,
    WeightVector, DEFAULT_WEIGHT_TOLERANCE,
};
pub use utility::{
    aggregate_utility, individual_utility, threshold_utility, utility_breakdown, Breakdown,
};

#[derive(Debug, Error, PartialEq)]
pub enum ScoringError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("attribute keys differ: expected {expected:?}, found {found:?}")]
    KeyMismatch {
        expected: Vec<String>,
        found: Vec<String>,
    },
    #[error("invalid request: {}", join(.0))]
    Validation(Vec<RequestViolation>),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
}

fn join(v: &[RequestViolation]) -> String {
    v.iter()
        .map(ToString::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}
