//! Provider catalog: the QoS attribute registry and render-farm profiles.
//!
//! Catalogs enter the system as JSON documents ([`CatalogDocument`]) and are
//! turned into a validated [`Catalog`] by [`ingest_catalog`]. Validation is
//! total: every field of every provider is checked and all issues are
//! reported together, so an invalid document never yields a partial catalog.

use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Whether larger raw values of an attribute are better or worse.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tendency {
    Positive,
    Negative,
}

/// A named quality dimension.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct QosAttribute {
    pub id: String,
    pub display_name: String,
    pub tendency: Tendency,
    #[serde(default)]
    pub unit: String,
}

/// The set of attributes a catalog may reference, in declaration order.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct AttributeRegistry {
    attributes: Vec<QosAttribute>,
}

impl AttributeRegistry {
    pub fn get(&self, id: &str) -> Option<&QosAttribute> {
        self.attributes.iter().find(|a| a.id == id)
    }

    pub fn contains(&self, id: &str) -> bool {
        self.get(id).is_some()
    }

    pub fn iter(&self) -> impl Iterator<Item = &QosAttribute> {
        self.attributes.iter()
    }

    pub fn len(&self) -> usize {
        self.attributes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.attributes.is_empty()
    }
}

/// How `qos_offering` values are expressed.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QosMode {
    /// Values already lie in `[0, 1]`, higher is better.
    Normalized,
    /// Values are measurements in the attribute's unit.
    Raw,
}

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct SoftwareItem {
    pub product: String,
    pub version: String,
}

impl SoftwareItem {
    /// Builds a canonical item (trimmed, case-folded).
    pub fn new(product: &str, version: &str) -> Self {
        Self {
            product: canonical_name(product),
            version: canonical_name(version),
        }
    }
}

impl fmt::Display for SoftwareItem {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} {}", self.product, self.version)
    }
}

/// What a render farm can run. All names are stored canonicalized.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct FunctionalCapabilities {
    pub software: BTreeSet<SoftwareItem>,
    pub render_engines: BTreeSet<String>,
    pub node_config: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProviderProfile {
    pub provider_id: String,
    pub name: String,
    pub capabilities: FunctionalCapabilities,
    pub qos_offering: BTreeMap<String, f64>,
    pub qos_mode: QosMode,
}

/// A validated catalog. Construct through [`ingest_catalog`] or
/// [`Catalog::from_document`].
#[derive(Debug, Clone, PartialEq)]
pub struct Catalog {
    registry: AttributeRegistry,
    mode: QosMode,
    providers: Vec<ProviderProfile>,
}

impl Catalog {
    pub fn registry(&self) -> &AttributeRegistry {
        &self.registry
    }

    pub fn mode(&self) -> QosMode {
        self.mode
    }

    pub fn providers(&self) -> &[ProviderProfile] {
        &self.providers
    }

    pub fn provider(&self, provider_id: &str) -> Option<&ProviderProfile> {
        self.providers.iter().find(|p| p.provider_id == provider_id)
    }

    /// Validates a parsed document.
    pub fn from_document(doc: CatalogDocument) -> Result<Self, CatalogError> {
        validate_document(doc)
    }

    /// Converts back to the wire representation. Re-ingesting the result
    /// yields an equal catalog.
    pub fn to_document(&self) -> CatalogDocument {
        CatalogDocument {
            attributes: self.registry.attributes.clone(),
            mode: self.mode,
            providers: self
                .providers
                .iter()
                .map(|p| ProviderDocument {
                    provider_id: p.provider_id.clone(),
                    name: p.name.clone(),
                    capabilities: CapabilitiesDocument {
                        software: p.capabilities.software.iter().cloned().collect(),
                        render_engines: p.capabilities.render_engines.iter().cloned().collect(),
                        node_config: p.capabilities.node_config.clone(),
                    },
                    qos_offering: p.qos_offering.clone(),
                })
                .collect(),
        }
    }

    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(&self.to_document()).expect("catalog document serializes")
    }
}

/// Catalog file layout.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CatalogDocument {
    pub attributes: Vec<QosAttribute>,
    pub mode: QosMode,
    #[serde(default)]
    pub providers: Vec<ProviderDocument>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ProviderDocument {
    pub provider_id: String,
    pub name: String,
    #[serde(default)]
    pub capabilities: CapabilitiesDocument,
    pub qos_offering: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CapabilitiesDocument {
    #[serde(default)]
    pub software: Vec<SoftwareItem>,
    #[serde(default)]
    pub render_engines: Vec<String>,
    #[serde(default)]
    pub node_config: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum IssueKind {
    /// A value outside its permitted range.
    Range,
    /// A duplicated identifier or key.
    Uniqueness,
    /// A required string is empty.
    Empty,
    /// An offering references an attribute missing from the registry.
    UnknownAttribute,
}

/// One validation failure, located by provider and field path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Issue {
    pub kind: IssueKind,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub provider_id: Option<String>,
    pub path: String,
    pub message: String,
}

impl fmt::Display for Issue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match &self.provider_id {
            Some(id) => write!(f, "provider {id}: {}: {}", self.path, self.message),
            None => write!(f, "{}: {}", self.path, self.message),
        }
    }
}

#[derive(Debug, Error)]
pub enum CatalogError {
    #[error("malformed catalog document: {0}")]
    Schema(String),
    #[error("catalog rejected with {} issue(s): {}", .0.len(), join_issues(.0))]
    Validation(Vec<Issue>),
}

impl CatalogError {
    pub fn issues(&self) -> &[Issue] {
        match self {
            CatalogError::Validation(issues) => issues,
            CatalogError::Schema(_) => &[],
        }
    }
}

fn join_issues(issues: &[Issue]) -> String {
    issues
        .iter()
        .map(Issue::to_string)
        .collect::<Vec<_>>()
        .join("; ")
}

/// Trims surrounding whitespace and case-folds.
pub fn canonical_name(s: &str) -> String {
    s.trim().to_lowercase()
}

/// Parses and validates a catalog document.
pub fn ingest_catalog(document: &str) -> Result<Catalog, CatalogError> {
    let doc: CatalogDocument =
        serde_json::from_str(document).map_err(|e| CatalogError::Schema(e.to_string()))?;
    validate_document(doc)
}

fn validate_document(doc: CatalogDocument) -> Result<Catalog, CatalogError> {
    let mut issues = Vec::new();
    let push =
        |issues: &mut Vec<Issue>, kind, provider: Option<&str>, path: String, message: String| {
            issues.push(Issue {
                kind,
                provider_id: provider.map(str::to_owned),
                path,
                message,
            })
        };

    let mut seen_attr: HashMap<String, usize> = HashMap::new();
    for (i, attr) in doc.attributes.iter().enumerate() {
        let path = format!("attributes[{i}].id");
        if attr.id.trim().is_empty() {
            push(
                &mut issues,
                IssueKind::Empty,
                None,
                path,
                "attribute id is empty".into(),
            );
            continue;
        }
        if attr.id.trim() != attr.id {
            push(
                &mut issues,
                IssueKind::Range,
                None,
                path.clone(),
                format!("attribute id {:?} has surrounding whitespace", attr.id),
            );
        }
        if let Some(prev) = seen_attr.insert(attr.id.to_lowercase(), i) {
            push(
                &mut issues,
                IssueKind::Uniqueness,
                None,
                path,
                format!(
                    "attribute id {:?} duplicates attributes[{prev}] (case-insensitive)",
                    attr.id
                ),
            );
        }
    }
    let registry = AttributeRegistry {
        attributes: doc.attributes,
    };

    let mut seen_provider: HashMap<&str, usize> = HashMap::new();
    let mut providers = Vec::with_capacity(doc.providers.len());
    for (i, p) in doc.providers.iter().enumerate() {
        let pid = Some(p.provider_id.as_str());
        if p.provider_id.trim().is_empty() {
            push(
                &mut issues,
                IssueKind::Empty,
                None,
                format!("providers[{i}].provider_id"),
                "provider id is empty".into(),
            );
        } else if let Some(prev) = seen_provider.insert(p.provider_id.as_str(), i) {
            push(
                &mut issues,
                IssueKind::Uniqueness,
                pid,
                format!("providers[{i}].provider_id"),
                format!("duplicates providers[{prev}]"),
            );
        }

        let mut software = BTreeSet::new();
        for (j, item) in p.capabilities.software.iter().enumerate() {
            let canon = SoftwareItem::new(&item.product, &item.version);
            if canon.product.is_empty() {
                push(
                    &mut issues,
                    IssueKind::Empty,
                    pid,
                    format!("capabilities.software[{j}].product"),
                    "product name is empty".into(),
                );
            }
            if canon.version.is_empty() {
                push(
                    &mut issues,
                    IssueKind::Empty,
                    pid,
                    format!("capabilities.software[{j}].version"),
                    "version is empty".into(),
                );
            }
            software.insert(canon);
        }

        let mut render_engines = BTreeSet::new();
        for (j, engine) in p.capabilities.render_engines.iter().enumerate() {
            let canon = canonical_name(engine);
            if canon.is_empty() {
                push(
                    &mut issues,
                    IssueKind::Empty,
                    pid,
                    format!("capabilities.render_engines[{j}]"),
                    "engine name is empty".into(),
                );
            }
            render_engines.insert(canon);
        }

        let mut node_config = BTreeMap::new();
        for (key, &value) in &p.capabilities.node_config {
            let path = format!("capabilities.node_config.{key}");
            let canon = canonical_name(key);
            if canon.is_empty() {
                push(
                    &mut issues,
                    IssueKind::Empty,
                    pid,
                    path.clone(),
                    "resource name is empty".into(),
                );
            }
            if !(value.is_finite() && value > 0.0) {
                push(
                    &mut issues,
                    IssueKind::Range,
                    pid,
                    path.clone(),
                    format!("capacity {value} must be a strictly positive finite number"),
                );
            }
            if node_config.insert(canon.clone(), value).is_some() {
                push(
                    &mut issues,
                    IssueKind::Uniqueness,
                    pid,
                    path,
                    format!("resource {canon:?} given more than once after canonicalization"),
                );
            }
        }

        for (attr_id, &value) in &p.qos_offering {
            let path = format!("qos_offering.{attr_id}");
            let Some(attr) = registry.get(attr_id) else {
                push(
                    &mut issues,
                    IssueKind::UnknownAttribute,
                    pid,
                    path,
                    format!("attribute {attr_id:?} is not registered"),
                );
                continue;
            };
            let ok = match doc.mode {
                QosMode::Normalized => (0.0..=1.0).contains(&value),
                QosMode::Raw => match attr.tendency {
                    Tendency::Positive => value.is_finite() && value >= 0.0,
                    Tendency::Negative => value.is_finite() && value > 0.0,
                },
            };
            if !ok {
                let rule = match (doc.mode, attr.tendency) {
                    (QosMode::Normalized, _) => "must lie in [0, 1] in normalized mode",
                    (QosMode::Raw, Tendency::Positive) => "must be finite and non-negative in raw mode",
                    (QosMode::Raw, Tendency::Negative) => {
                        "must be finite and strictly positive for a negative-tendency attribute in raw mode"
                    }
                };
                push(
                    &mut issues,
                    IssueKind::Range,
                    pid,
                    path,
                    format!("value {value} {rule}"),
                );
            }
        }

        providers.push(ProviderProfile {
            provider_id: p.provider_id.clone(),
            name: p.name.clone(),
            capabilities: FunctionalCapabilities {
                software,
                render_engines,
                node_config,
            },
            qos_offering: p.qos_offering.clone(),
            qos_mode: doc.mode,
        });
    }

    if !issues.is_empty() {
        return Err(CatalogError::Validation(issues));
    }
    Ok(Catalog {
        registry,
        mode: doc.mode,
        providers,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(mode: &str, providers: &str) -> String {
        format!(
            r#"{{"attributes":[
                {{"id":"elasticity","display_name":"Elasticity","tendency":"positive","unit":""}},
                {{"id":"cost","display_name":"Cost","tendency":"negative","unit":"USD/node-hour"}}
            ],"mode":"{mode}","providers":[{providers}]}}"#
        )
    }

    #[test]
    fn empty_provider_list_keeps_registry() {
        let catalog = ingest_catalog(&doc("normalized", "")).unwrap();
        assert!(catalog.providers().is_empty());
        assert_eq!(catalog.registry().len(), 2);
        assert_eq!(
            catalog.registry().get("cost").unwrap().tendency,
            Tendency::Negative
        );
    }

    #[test]
    fn normalized_value_above_one_names_provider_and_attribute() {
        let err = ingest_catalog(&doc(
            "normalized",
            r#"{"provider_id":"RF1","name":"a","qos_offering":{"elasticity":1.2,"cost":0.5}}"#,
        ))
        .unwrap_err();
        let issues = err.issues();
        assert_eq!(issues.len(), 1);
        assert_eq!(issues[0].kind, IssueKind::Range);
        assert_eq!(issues[0].provider_id.as_deref(), Some("RF1"));
        assert_eq!(issues[0].path, "qos_offering.elasticity");
    }

    #[test]
    fn every_violation_is_reported() {
        let err = ingest_catalog(&doc(
            "normalized",
            r#"{"provider_id":"RF1","name":"a","qos_offering":{"elasticity":1.2,"karma":0.5}},
               {"provider_id":"RF1","name":"b","capabilities":{"node_config":{"cores":0}},"qos_offering":{"cost":-0.1}}"#,
        ))
        .unwrap_err();
        let kinds: Vec<_> = err.issues().iter().map(|i| i.kind).collect();
        assert_eq!(
            kinds,
            vec![
                IssueKind::Range,
                IssueKind::UnknownAttribute,
                IssueKind::Uniqueness,
                IssueKind::Range,
                IssueKind::Range
            ]
        );
    }

    #[test]
    fn raw_mode_rejects_zero_on_negative_tendency_only() {
        let ok = ingest_catalog(&doc(
            "raw",
            r#"{"provider_id":"a","name":"a","qos_offering":{"elasticity":0,"cost":3.5}}"#,
        ));
        assert!(ok.is_ok());
        let err = ingest_catalog(&doc(
            "raw",
            r#"{"provider_id":"a","name":"a","qos_offering":{"elasticity":40,"cost":0}}"#,
        ))
        .unwrap_err();
        assert_eq!(err.issues()[0].path, "qos_offering.cost");
    }

    #[test]
    fn duplicate_attribute_ids_are_case_insensitive() {
        let text = r#"{"attributes":[
            {"id":"Cost","display_name":"a","tendency":"negative"},
            {"id":"cost","display_name":"b","tendency":"negative"}],
            "mode":"normalized","providers":[]}"#;
        let err = ingest_catalog(text).unwrap_err();
        assert_eq!(err.issues()[0].kind, IssueKind::Uniqueness);
    }

    #[test]
    fn missing_tendency_is_a_schema_error() {
        let text = r#"{"attributes":[{"id":"cost","display_name":"a"}],"mode":"normalized","providers":[]}"#;
        assert!(matches!(ingest_catalog(text), Err(CatalogError::Schema(_))));
    }

    #[test]
    fn nan_literals_are_rejected() {
        let text = doc(
            "normalized",
            r#"{"provider_id":"a","name":"a","qos_offering":{"cost":NaN}}"#,
        );
        assert!(matches!(
            ingest_catalog(&text),
            Err(CatalogError::Schema(_))
        ));
    }

    #[test]
    fn names_are_canonicalized() {
        let catalog = ingest_catalog(&doc(
            "normalized",
            r#"{"provider_id":"a","name":"a","capabilities":{
                "software":[{"product":"  Maya ","version":"7.0"}],
                "render_engines":["V-Ray","v-ray "],
                "node_config":{" Cores":16}},
              "qos_offering":{}}"#,
        ))
        .unwrap();
        let caps = &catalog.providers()[0].capabilities;
        assert!(caps.software.contains(&SoftwareItem::new("maya", "7.0")));
        assert_eq!(caps.render_engines.len(), 1);
        assert_eq!(caps.node_config.get("cores"), Some(&16.0));
    }

    #[test]
    fn canonical_collision_in_node_config_is_rejected() {
        let err = ingest_catalog(&doc(
            "normalized",
            r#"{"provider_id":"a","name":"a","capabilities":{"node_config":{"Cores":16,"cores":8}},"qos_offering":{}}"#,
        ))
        .unwrap_err();
        assert_eq!(err.issues()[0].kind, IssueKind::Uniqueness);
    }

    #[test]
    fn document_round_trip() {
        let catalog = ingest_catalog(&doc(
            "normalized",
            r#"{"provider_id":"a","name":"A","capabilities":{"software":[{"product":"Maya","version":"7.0"}]},
               "qos_offering":{"elasticity":0.75,"cost":0.97}}"#,
        ))
        .unwrap();
        let again = ingest_catalog(&catalog.to_json_pretty()).unwrap();
        assert_eq!(catalog, again);
    }
}
