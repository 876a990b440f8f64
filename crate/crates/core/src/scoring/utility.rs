use std::collections::BTreeMap;

use super::{MinimumRequirements, NormalizedOffer, ScoringError, SensitivityVector, WeightVector};

/// `p^beta` for a normalized value `p`, with `0^0 = 1` so that a zero
/// sensitivity means the attribute always contributes its full weight.
pub fn individual_utility(p: f64, beta: f64) -> Result<f64, ScoringError> {
    if !(0.0..=1.0).contains(&p) {
        return Err(ScoringError::Domain(format!(
            "normalized value {p} is outside [0, 1]"
        )));
    }
    if !(beta.is_finite() && beta >= 0.0) {
        return Err(ScoringError::Domain(format!(
            "sensitivity {beta} must be finite and non-negative"
        )));
    }
    if beta == 0.0 {
        return Ok(1.0);
    }
    Ok(p.powf(beta))
}

/// Aggregate utility together with the per-attribute utilities.
#[derive(Debug, Clone, PartialEq)]
pub struct Breakdown {
    pub total: f64,
    pub utilities: BTreeMap<String, f64>,
}

fn key_mismatch(expected: &BTreeMap<String, f64>, found: &BTreeMap<String, f64>) -> ScoringError {
    ScoringError::KeyMismatch {
        expected: expected.keys().cloned().collect(),
        found: found.keys().cloned().collect(),
    }
}

/// The weighted sum, accumulated in ascending attribute-id order.
fn evaluate(
    values: &BTreeMap<String, f64>,
    weights: &WeightVector,
    sensitivities: &SensitivityVector,
) -> Result<Breakdown, ScoringError> {
    let w = weights.as_map();
    let b = sensitivities.as_map();
    if !values.keys().eq(w.keys()) {
        return Err(key_mismatch(w, values));
    }
    if !b.keys().eq(w.keys()) {
        return Err(key_mismatch(w, b));
    }

    let mut total = 0.0;
    let mut utilities = BTreeMap::new();
    for ((id, &q), (&wt, &beta)) in values.iter().zip(w.values().zip(b.values())) {
        let u = individual_utility(q, beta)?;
        total += wt * u;
        utilities.insert(id.clone(), u);
    }
    // weights may overshoot one by the accepted tolerance
    Ok(Breakdown {
        total: total.clamp(0.0, 1.0),
        utilities,
    })
}

pub fn utility_breakdown(
    offer: &NormalizedOffer,
    weights: &WeightVector,
    sensitivities: &SensitivityVector,
) -> Result<Breakdown, ScoringError> {
    evaluate(offer.values(), weights, sensitivities)
}

/// Weighted sum of individual utilities for one provider.
pub fn aggregate_utility(
    offer: &NormalizedOffer,
    weights: &WeightVector,
    sensitivities: &SensitivityVector,
) -> Result<f64, ScoringError> {
    evaluate(offer.values(), weights, sensitivities).map(|b| b.total)
}

/// The aggregate utility of a hypothetical provider that exactly meets every
/// minimum; providers scoring below it are not eligible.
pub fn threshold_utility(
    minima: &MinimumRequirements,
    weights: &WeightVector,
    sensitivities: &SensitivityVector,
) -> Result<f64, ScoringError> {
    evaluate(minima.as_map(), weights, sensitivities).map(|b| b.total)
}
