use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use super::ScoringError;

/// Accepted distance of the weight sum from one.
pub const DEFAULT_WEIGHT_TOLERANCE: f64 = 1e-9;

/// A single problem found in a selection request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestViolation {
    pub field: String,
    pub message: String,
}

impl RequestViolation {
    fn new(field: impl Into<String>, message: impl Into<String>) -> Self {
        Self {
            field: field.into(),
            message: message.into(),
        }
    }
}

impl fmt::Display for RequestViolation {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}: {}", self.field, self.message)
    }
}

/// Attribute weights: non-negative and summing to one.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct WeightVector(BTreeMap<String, f64>);

impl WeightVector {
    pub fn new(weights: BTreeMap<String, f64>, tolerance: f64) -> Result<Self, ScoringError> {
        let mut violations = Vec::new();
        check_weights(&weights, tolerance, &mut violations);
        if violations.is_empty() {
            Ok(Self(weights))
        } else {
            Err(ScoringError::Validation(violations))
        }
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.0
    }

    pub fn get(&self, id: &str) -> Option<f64> {
        self.0.get(id).copied()
    }
}

/// Per-attribute sensitivity exponents, finite and non-negative.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SensitivityVector(BTreeMap<String, f64>);

impl SensitivityVector {
    pub fn new(sensitivities: BTreeMap<String, f64>) -> Result<Self, ScoringError> {
        let mut violations = Vec::new();
        check_sensitivities(&sensitivities, &mut violations);
        if violations.is_empty() {
            Ok(Self(sensitivities))
        } else {
            Err(ScoringError::Validation(violations))
        }
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.0
    }
}

/// Minimum acceptable normalized value per attribute.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct MinimumRequirements(BTreeMap<String, f64>);

impl MinimumRequirements {
    pub fn new(minima: BTreeMap<String, f64>) -> Result<Self, ScoringError> {
        let mut violations = Vec::new();
        check_minima(&minima, &mut violations);
        if violations.is_empty() {
            Ok(Self(minima))
        } else {
            Err(ScoringError::Validation(violations))
        }
    }

    pub fn as_map(&self) -> &BTreeMap<String, f64> {
        &self.0
    }
}

/// Weights, sensitivities and minima that passed [`validate_request`];
/// all three share one key set.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ValidatedRequest {
    pub weights: WeightVector,
    pub sensitivities: SensitivityVector,
    pub minima: MinimumRequirements,
}

impl ValidatedRequest {
    pub fn attributes(&self) -> impl Iterator<Item = &str> {
        self.weights.0.keys().map(String::as_str)
    }
}

fn check_weights(weights: &BTreeMap<String, f64>, tolerance: f64, out: &mut Vec<RequestViolation>) {
    if weights.is_empty() {
        out.push(RequestViolation::new(
            "weights",
            "at least one weighted attribute is required",
        ));
    }
    let mut all_finite = true;
    for (id, &w) in weights {
        if !w.is_finite() {
            all_finite = false;
            out.push(RequestViolation::new(
                format!("weights.{id}"),
                format!("weight {w} is not finite"),
            ));
        } else if w < 0.0 {
            out.push(RequestViolation::new(
                format!("weights.{id}"),
                format!("weight {w} is negative"),
            ));
        } else if w > 1.0 {
            out.push(RequestViolation::new(
                format!("weights.{id}"),
                format!("weight {w} exceeds 1"),
            ));
        }
    }
    if all_finite && !weights.is_empty() {
        let sum: f64 = weights.values().sum();
        if (sum - 1.0).abs() > tolerance {
            // shown rounded; binary sums of decimal inputs are rarely exact
            let shown = (sum * 1e12).round() / 1e12;
            out.push(RequestViolation::new(
                "weights",
                format!("weight sum {shown} ≠ 1"),
            ));
        }
    }
}

fn check_sensitivities(sensitivities: &BTreeMap<String, f64>, out: &mut Vec<RequestViolation>) {
    for (id, &b) in sensitivities {
        if !(b.is_finite() && b >= 0.0) {
            out.push(RequestViolation::new(
                format!("sensitivities.{id}"),
                format!("sensitivity {b} must be finite and non-negative"),
            ));
        }
    }
}

fn check_minima(minima: &BTreeMap<String, f64>, out: &mut Vec<RequestViolation>) {
    for (id, &x) in minima {
        if !(0.0..=1.0).contains(&x) {
            out.push(RequestViolation::new(
                format!("minima.{id}"),
                format!("minimum {x} must lie in [0, 1]"),
            ));
        }
    }
}

fn check_keys(
    name: &str,
    reference: &BTreeSet<&String>,
    other: &BTreeMap<String, f64>,
    out: &mut Vec<RequestViolation>,
) {
    for id in other.keys().filter(|k| !reference.contains(k)) {
        out.push(RequestViolation::new(
            format!("{name}.{id}"),
            "attribute has no weight",
        ));
    }
    for id in reference.iter().filter(|k| !other.contains_key(k.as_str())) {
        out.push(RequestViolation::new(
            format!("{name}.{id}"),
            "missing value for weighted attribute",
        ));
    }
}

/// Checks every constraint and returns either the validated request or the
/// complete list of violations.
pub fn validate_request(
    weights: BTreeMap<String, f64>,
    sensitivities: BTreeMap<String, f64>,
    minima: BTreeMap<String, f64>,
    tolerance: f64,
) -> Result<ValidatedRequest, ScoringError> {
    let mut violations = Vec::new();
    check_weights(&weights, tolerance, &mut violations);
    check_sensitivities(&sensitivities, &mut violations);
    check_minima(&minima, &mut violations);
    let keys: BTreeSet<&String> = weights.keys().collect();
    check_keys("sensitivities", &keys, &sensitivities, &mut violations);
    check_keys("minima", &keys, &minima, &mut violations);

    if !violations.is_empty() {
        return Err(ScoringError::Validation(violations));
    }
    Ok(ValidatedRequest {
        weights: WeightVector(weights),
        sensitivities: SensitivityVector(sensitivities),
        minima: MinimumRequirements(minima),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn map(pairs: &[(&str, f64)]) -> BTreeMap<String, f64> {
        pairs.iter().map(|(k, v)| (k.to_string(), *v)).collect()
    }

    #[test]
    fn example_request_is_valid() {
        let req = crate::fixtures::example_request();
        assert!(validate_request(
            req.weights,
            req.sensitivities,
            req.minima,
            DEFAULT_WEIGHT_TOLERANCE
        )
        .is_ok());
    }

    #[test]
    fn weight_sum_violation_is_reported() {
        let err = validate_request(
            map(&[("a", 0.5), ("b", 0.6)]),
            map(&[("a", 1.0), ("b", 1.0)]),
            map(&[("a", 0.5), ("b", 0.5)]),
            DEFAULT_WEIGHT_TOLERANCE,
        )
        .unwrap_err();
        let ScoringError::Validation(v) = err else {
            panic!()
        };
        assert_eq!(v.len(), 1);
        assert_eq!(v[0].to_string(), "weights: weight sum 1.1 ≠ 1");
    }

    #[test]
    fn negative_sensitivity_is_rejected() {
        let err = validate_request(
            map(&[("a", 1.0)]),
            map(&[("a", -1.0)]),
            map(&[("a", 0.5)]),
            1e-9,
        )
        .unwrap_err();
        let ScoringError::Validation(v) = err else {
            panic!()
        };
        assert_eq!(v[0].field, "sensitivities.a");
    }

    #[test]
    fn all_violations_are_collected() {
        let err = validate_request(
            map(&[("a", 0.7), ("b", -0.1)]),
            map(&[("a", f64::NAN), ("c", 1.0)]),
            map(&[("a", 1.5)]),
            1e-9,
        )
        .unwrap_err();
        let ScoringError::Validation(v) = err else {
            panic!()
        };
        let fields: Vec<_> = v.iter().map(|v| v.field.as_str()).collect();
        assert_eq!(
            fields,
            [
                "weights.b",
                "weights",
                "sensitivities.a",
                "minima.a",
                "sensitivities.c",
                "sensitivities.b",
                "minima.b"
            ]
        );
    }

    #[test]
    fn tolerance_boundary() {
        let w = map(&[("a", 0.5), ("b", 0.5 + 5e-10)]);
        assert!(WeightVector::new(w.clone(), 1e-9).is_ok());
        assert!(WeightVector::new(w, 1e-10).is_err());
    }
}
