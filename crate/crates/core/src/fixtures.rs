//! The five-farm worked example, bundled for tests, benches and demos.
//!
//! The request's elasticity minimum (0.95) is reconstructed, not given: it is
//! the value that brings the threshold to 0.230 from the other four terms.

use crate::catalog::{ingest_catalog, Catalog};
use crate::request::{parse_request, SelectionRequest};
use crate::scoring::{validate_request, ValidatedRequest, DEFAULT_WEIGHT_TOLERANCE};

pub const EXAMPLE_CATALOG_JSON: &str = include_str!("../../../fixtures/example_catalog.json");
pub const EXAMPLE_REQUEST_JSON: &str = include_str!("../../../fixtures/example_request.json");
pub const RAW_COST_JSON: &str = include_str!("../../../fixtures/raw_cost.json");

pub fn example_catalog() -> Catalog {
    ingest_catalog(EXAMPLE_CATALOG_JSON).expect("bundled catalog is valid")
}

pub fn example_request() -> SelectionRequest {
    parse_request(EXAMPLE_REQUEST_JSON).expect("bundled request is valid")
}

pub fn example_validated() -> ValidatedRequest {
    let r = example_request();
    validate_request(
        r.weights,
        r.sensitivities,
        r.minima,
        DEFAULT_WEIGHT_TOLERANCE,
    )
    .expect("bundled request is valid")
}
