//! Selection request file / body schema.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::matching::FunctionalRequirements;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SelectionRequest {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub description: Option<String>,
    #[serde(default)]
    pub functional: FunctionalRequirements,
    pub weights: BTreeMap<String, f64>,
    pub sensitivities: BTreeMap<String, f64>,
    pub minima: BTreeMap<String, f64>,
}

#[derive(Debug, Error)]
#[error("malformed selection request: {0}")]
pub struct RequestSchemaError(pub String);

pub fn parse_request(text: &str) -> Result<SelectionRequest, RequestSchemaError> {
    serde_json::from_str(text).map_err(|e| RequestSchemaError(e.to_string()))
}
