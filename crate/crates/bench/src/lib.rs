//! Synthetic workloads shared by the benchmarks.

use std::collections::BTreeMap;

use rfbroker_core::catalog::{FunctionalCapabilities, ProviderProfile, QosMode, SoftwareItem};
use rfbroker_core::matching::FunctionalRequirements;
use rfbroker_core::scoring::{
    validate_request, NormalizedOffer, ValidatedRequest, DEFAULT_WEIGHT_TOLERANCE,
};

const ENGINES: [&str; 4] = ["v-ray", "mental ray", "arnold", "redshift"];

pub fn attribute_ids(n: usize) -> Vec<String> {
    (0..n).map(|i| format!("attr{i:02}")).collect()
}

/// Cheap deterministic value in [0, 1].
fn mix(i: usize, j: usize) -> f64 {
    ((i * 7919 + j * 104_729) % 1000) as f64 / 999.0
}

/// Equal weights, sensitivities cycling 1..=9, minima at 0.3.
pub fn request(attributes: usize) -> ValidatedRequest {
    let ids = attribute_ids(attributes);
    let w = 1.0 / attributes as f64;
    let weights = ids.iter().map(|id| (id.clone(), w)).collect();
    let betas = ids
        .iter()
        .enumerate()
        .map(|(i, id)| (id.clone(), (i % 9 + 1) as f64))
        .collect();
    let minima = ids.iter().map(|id| (id.clone(), 0.3)).collect();
    validate_request(weights, betas, minima, DEFAULT_WEIGHT_TOLERANCE)
        .expect("synthetic request is valid")
}

pub fn offers(providers: usize, attributes: usize) -> Vec<NormalizedOffer> {
    let ids = attribute_ids(attributes);
    (0..providers)
        .map(|i| {
            let values = ids
                .iter()
                .enumerate()
                .map(|(j, id)| (id.clone(), mix(i, j)))
                .collect();
            NormalizedOffer::new(format!("rf{i:05}"), values).expect("values in range")
        })
        .collect()
}

pub fn providers(count: usize, attributes: usize) -> Vec<ProviderProfile> {
    let ids = attribute_ids(attributes);
    (0..count)
        .map(|i| ProviderProfile {
            provider_id: format!("rf{i:05}"),
            name: format!("farm {i}"),
            capabilities: FunctionalCapabilities {
                software: [SoftwareItem::new(
                    "maya",
                    if i % 2 == 0 { "7.0" } else { "8.0" },
                )]
                .into(),
                render_engines: [ENGINES[i % 4].to_string(), ENGINES[(i / 4) % 4].to_string()]
                    .into(),
                node_config: BTreeMap::from([("cores".to_string(), (8 + i % 57) as f64)]),
            },
            qos_offering: ids
                .iter()
                .enumerate()
                .map(|(j, id)| (id.clone(), mix(i, j)))
                .collect(),
            qos_mode: QosMode::Normalized,
        })
        .collect()
}

/// Maya 7.0 with arnold and at least 32 cores.
pub fn requirements() -> FunctionalRequirements {
    FunctionalRequirements {
        software: [SoftwareItem::new("maya", "7.0")].into(),
        render_engines: ["arnold".to_string()].into(),
        node_config_min: BTreeMap::from([("cores".to_string(), 32.0)]),
        required_attributes: Default::default(),
    }
}
