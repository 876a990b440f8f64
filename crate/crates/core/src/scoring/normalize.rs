use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use super::ScoringError;
use crate::catalog::{AttributeRegistry, ProviderProfile, QosMode, Tendency};

/// A provider's offering expressed as normalized qualities in `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizedOffer {
    provider_id: String,
    values: BTreeMap<String, f64>,
}

impl NormalizedOffer {
    pub fn new(
        provider_id: impl Into<String>,
        values: BTreeMap<String, f64>,
    ) -> Result<Self, ScoringError> {
        let provider_id = provider_id.into();
        if let Some((id, v)) = values.iter().find(|(_, v)| !(0.0..=1.0).contains(*v)) {
            return Err(ScoringError::Domain(format!(
                "provider {provider_id}: normalized value {v} for {id} is outside [0, 1]"
            )));
        }
        Ok(Self {
            provider_id,
            values,
        })
    }

    pub fn provider_id(&self) -> &str {
        &self.provider_id
    }

    pub fn values(&self) -> &BTreeMap<String, f64> {
        &self.values
    }

    /// Keeps only the given attributes.
    pub fn restricted_to<'a>(
        &self,
        keys: impl IntoIterator<Item = &'a str>,
    ) -> Result<Self, ScoringError> {
        let mut values = BTreeMap::new();
        for k in keys {
            let v = self.values.get(k).ok_or_else(|| {
                ScoringError::Domain(format!(
                    "provider {} does not offer attribute {k}",
                    self.provider_id
                ))
            })?;
            values.insert(k.to_owned(), *v);
        }
        Ok(Self {
            provider_id: self.provider_id.clone(),
            values,
        })
    }
}

/// Brings provider offerings onto a common `[0, 1]` higher-is-better scale.
///
/// Normalized catalogs pass through unchanged. Raw catalogs have
/// negative-tendency values replaced by their reciprocal and are then
/// min–max scaled per attribute across the given providers, so the result is
/// relative to this cohort. An attribute on which all providers agree maps
/// to 1 for everyone.
pub fn normalize_offers(
    providers: &[&ProviderProfile],
    registry: &AttributeRegistry,
) -> Result<Vec<NormalizedOffer>, ScoringError> {
    let Some(first) = providers.first() else {
        return Err(ScoringError::DegenerateInput(
            "no providers to normalize".into(),
        ));
    };
    let mode = first.qos_mode;
    if let Some(p) = providers.iter().find(|p| p.qos_mode != mode) {
        return Err(ScoringError::Domain(format!(
            "provider {} uses {:?} mode, expected {mode:?}",
            p.provider_id, p.qos_mode
        )));
    }

    match mode {
        QosMode::Normalized => providers
            .iter()
            .map(|p| NormalizedOffer::new(p.provider_id.clone(), p.qos_offering.clone()))
            .collect(),
        QosMode::Raw => normalize_raw(providers, registry),
    }
}

fn normalize_raw(
    providers: &[&ProviderProfile],
    registry: &AttributeRegistry,
) -> Result<Vec<NormalizedOffer>, ScoringError> {
    // benefit-oriented values: reciprocal for negative tendency
    let mut oriented: Vec<BTreeMap<&str, f64>> = Vec::with_capacity(providers.len());
    for p in providers {
        let mut row = BTreeMap::new();
        for (id, &v) in &p.qos_offering {
            let attr = registry.get(id).ok_or_else(|| {
                ScoringError::Domain(format!(
                    "provider {}: attribute {id} is not registered",
                    p.provider_id
                ))
            })?;
            if !(v.is_finite() && v >= 0.0) {
                return Err(ScoringError::Domain(format!(
                    "provider {}: raw value {v} for {id} must be finite and non-negative",
                    p.provider_id
                )));
            }
            let oriented_value = match attr.tendency {
                Tendency::Positive => v,
                Tendency::Negative if v > 0.0 => 1.0 / v,
                Tendency::Negative => {
                    return Err(ScoringError::Domain(format!(
                        "provider {}: zero raw value for negative-tendency attribute {id}",
                        p.provider_id
                    )))
                }
            };
            row.insert(id.as_str(), oriented_value);
        }
        oriented.push(row);
    }

    let attributes: BTreeSet<&str> = oriented.iter().flat_map(|r| r.keys().copied()).collect();
    let mut bounds = BTreeMap::new();
    for id in attributes {
        let (lo, hi) = oriented
            .iter()
            .filter_map(|r| r.get(id))
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &v| {
                (lo.min(v), hi.max(v))
            });
        bounds.insert(id, (lo, hi));
    }

    providers
        .iter()
        .zip(&oriented)
        .map(|(p, row)| {
            let values = row
                .iter()
                .map(|(&id, &v)| {
                    let (lo, hi) = bounds[id];
                    let q = if hi > lo { (v - lo) / (hi - lo) } else { 1.0 };
                    (id.to_owned(), q)
                })
                .collect();
            NormalizedOffer::new(p.provider_id.clone(), values)
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::catalog::ingest_catalog;
    use crate::fixtures;

    fn raw_catalog(values: &[(&str, f64)], tendency: &str) -> crate::catalog::Catalog {
        let providers: Vec<String> = values
            .iter()
            .map(|(id, v)| {
                format!(r#"{{"provider_id":"{id}","name":"{id}","qos_offering":{{"x":{v:?}}}}}"#)
            })
            .collect();
        ingest_catalog(&format!(
            r#"{{"attributes":[{{"id":"x","display_name":"x","tendency":"{tendency}"}}],"mode":"raw","providers":[{}]}}"#,
            providers.join(",")
        ))
        .unwrap()
    }

    #[test]
    fn normalized_mode_passes_through() {
        let catalog = fixtures::example_catalog();
        let refs: Vec<_> = catalog.providers().iter().collect();
        let offers = normalize_offers(&refs, catalog.registry()).unwrap();
        for (offer, p) in offers.iter().zip(catalog.providers()) {
            assert_eq!(offer.values(), &p.qos_offering);
        }
    }

    #[test]
    fn raw_costs_are_inverted_then_scaled() {
        let catalog = raw_catalog(&[("RF_a", 2.0), ("RF_b", 4.0)], "negative");
        let refs: Vec<_> = catalog.providers().iter().collect();
        let offers = normalize_offers(&refs, catalog.registry()).unwrap();
        // reciprocals 0.5 and 0.25, then min-max
        assert_eq!(offers[0].values()["x"], 1.0);
        assert_eq!(offers[1].values()["x"], 0.0);
    }

    #[test]
    fn positive_tendency_keeps_direction() {
        let catalog = raw_catalog(&[("a", 10.0), ("b", 20.0), ("c", 15.0)], "positive");
        let refs: Vec<_> = catalog.providers().iter().collect();
        let offers = normalize_offers(&refs, catalog.registry()).unwrap();
        let q: Vec<_> = offers.iter().map(|o| o.values()["x"]).collect();
        assert_eq!(q, [0.0, 1.0, 0.5]);
    }

    #[test]
    fn identical_values_map_to_one() {
        let catalog = raw_catalog(&[("a", 3.0), ("b", 3.0), ("c", 3.0)], "negative");
        let refs: Vec<_> = catalog.providers().iter().collect();
        let offers = normalize_offers(&refs, catalog.registry()).unwrap();
        assert!(offers.iter().all(|o| o.values()["x"] == 1.0));
    }

    #[test]
    fn empty_input_is_degenerate() {
        let catalog = fixtures::example_catalog();
        assert!(matches!(
            normalize_offers(&[], catalog.registry()),
            Err(ScoringError::DegenerateInput(_))
        ));
    }

    #[test]
    fn zero_negative_raw_value_is_a_domain_error() {
        // bypass ingestion, which would already reject this
        let catalog = raw_catalog(&[("a", 1.0)], "negative");
        let mut p = catalog.providers()[0].clone();
        p.qos_offering.insert("x".into(), 0.0);
        assert!(matches!(
            normalize_offers(&[&p], catalog.registry()),
            Err(ScoringError::Domain(_))
        ));
    }
}
