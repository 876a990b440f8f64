//! Functional matching: filter providers down to those that can run the
//! studio's software, engines and node sizes, and that publish every QoS
//! attribute the studio will score on.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::catalog::{canonical_name, ProviderProfile, SoftwareItem};

/// Hard constraints. Empty facets impose no constraint.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FunctionalRequirements {
    #[serde(default)]
    pub software: BTreeSet<SoftwareItem>,
    #[serde(default)]
    pub render_engines: BTreeSet<String>,
    #[serde(default)]
    pub node_config_min: BTreeMap<String, f64>,
    #[serde(default)]
    pub required_attributes: BTreeSet<String>,
}

impl FunctionalRequirements {
    /// Applies the catalog's name canonicalization to every name facet.
    /// Attribute ids are identifiers and are left untouched.
    pub fn canonicalized(self) -> Self {
        Self {
            software: self
                .software
                .iter()
                .map(|s| SoftwareItem::new(&s.product, &s.version))
                .collect(),
            render_engines: self
                .render_engines
                .iter()
                .map(|e| canonical_name(e))
                .collect(),
            node_config_min: self
                .node_config_min
                .into_iter()
                .map(|(k, v)| (canonical_name(&k), v))
                .collect(),
            required_attributes: self.required_attributes,
        }
    }

    /// Field paths of `node_config_min` entries that are not strictly
    /// positive finite numbers.
    pub fn invalid_minimums(&self) -> Vec<String> {
        self.node_config_min
            .iter()
            .filter(|(_, &v)| !(v.is_finite() && v > 0.0))
            .map(|(k, v)| format!("functional.node_config_min.{k}: {v} must be strictly positive"))
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "clause", rename_all = "snake_case")]
pub enum Mismatch {
    MissingSoftware {
        item: SoftwareItem,
    },
    MissingEngine {
        engine: String,
    },
    InsufficientCapacity {
        resource: String,
        required: f64,
        offered: Option<f64>,
    },
    MissingAttribute {
        attribute: String,
    },
}

impl fmt::Display for Mismatch {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Mismatch::MissingSoftware { item } => write!(f, "software {item} not offered"),
            Mismatch::MissingEngine { engine } => write!(f, "render engine {engine} not offered"),
            Mismatch::InsufficientCapacity {
                resource,
                required,
                offered: Some(offered),
            } => write!(
                f,
                "{resource}: offers {offered}, requires at least {required}"
            ),
            Mismatch::InsufficientCapacity {
                resource,
                required,
                offered: None,
            } => {
                write!(f, "{resource}: not offered, requires at least {required}")
            }
            Mismatch::MissingAttribute { attribute } => {
                write!(f, "QoS attribute {attribute} not published")
            }
        }
    }
}

/// Outcome of matching one provider. Empty `mismatches` means a match.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MatchReport {
    pub provider_id: String,
    pub mismatches: Vec<Mismatch>,
}

impl MatchReport {
    pub fn is_match(&self) -> bool {
        self.mismatches.is_empty()
    }
}

/// Checks every clause and reports all that fail.
pub fn matches(requirements: &FunctionalRequirements, provider: &ProviderProfile) -> MatchReport {
    let caps = &provider.capabilities;
    let mut mismatches = Vec::new();

    mismatches.extend(
        requirements
            .software
            .difference(&caps.software)
            .map(|item| Mismatch::MissingSoftware { item: item.clone() }),
    );
    mismatches.extend(
        requirements
            .render_engines
            .difference(&caps.render_engines)
            .map(|engine| Mismatch::MissingEngine {
                engine: engine.clone(),
            }),
    );
    for (resource, &required) in &requirements.node_config_min {
        let offered = caps.node_config.get(resource).copied();
        if !offered.is_some_and(|o| o >= required) {
            mismatches.push(Mismatch::InsufficientCapacity {
                resource: resource.clone(),
                required,
                offered,
            });
        }
    }
    mismatches.extend(
        requirements
            .required_attributes
            .iter()
            .filter(|a| !provider.qos_offering.contains_key(*a))
            .map(|a| Mismatch::MissingAttribute {
                attribute: a.clone(),
            }),
    );

    MatchReport {
        provider_id: provider.provider_id.clone(),
        mismatches,
    }
}

/// Providers satisfying `requirements`, ordered by provider id.
pub fn discover<'a>(
    requirements: &FunctionalRequirements,
    providers: &'a [ProviderProfile],
) -> Vec<&'a ProviderProfile> {
    let mut found: Vec<_> = providers
        .iter()
        .filter(|p| matches(requirements, p).is_match())
        .collect();
    found.sort_by(|a, b| a.provider_id.cmp(&b.provider_id));
    found
}
