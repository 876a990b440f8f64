//! Core of a render-farm service broker.
//!
//! * [`catalog`] ingests and validates provider catalogs.
//! * [`store`] persists catalogs as immutable numbered snapshots.
//! * [`matching`] filters providers on functional requirements.
//! * [`scoring`] normalizes offerings and ranks providers by weighted,
//!   sensitivity-shaped utility against a threshold built from the user's
//!   minimum acceptable values.
//! * [`pipeline`] composes the three for a single selection request.
//! * [`sla`] negotiates service level agreements and takes violation
//!   reports from third-party monitors.

pub mod catalog;
pub mod fixtures;
pub mod matching;
pub mod pipeline;
pub mod request;
pub mod scoring;
pub mod sla;
pub mod store;

pub use catalog::{
    ingest_catalog, Catalog, CatalogError, ProviderProfile, QosAttribute, QosMode, Tendency,
};
pub use matching::{discover, matches, FunctionalRequirements};
pub use pipeline::{select, SelectionError, SelectionReport, SelectionStatus};
pub use request::{parse_request, SelectionRequest};
pub use scoring::{RankingReport, ScoringError, DEFAULT_WEIGHT_TOLERANCE};
pub use sla::{SlaError, SlaManager};
pub use store::{SnapshotId, SnapshotStore, StoreError};
