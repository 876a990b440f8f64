//! Full selection: functional discovery, normalization and ranking.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{Catalog, QosMode};
use crate::matching::{discover, matches, MatchReport};
use crate::request::SelectionRequest;
use crate::scoring::{
    normalize_offers, rank, validate_request, RankingReport, RequestViolation, ScoringError,
};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SelectionStatus {
    Ok,
    NoMatch,
}

/// How offerings were brought onto the `[0, 1]` scale.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Normalization {
    /// The catalog was already normalized.
    AsProvided,
    /// Raw values were min–max scaled across the matching providers only;
    /// scores are relative to that cohort.
    CohortMinMax,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SelectionReport {
    pub status: SelectionStatus,
    pub normalization: Normalization,
    /// Highest-ranked eligible provider.
    pub selected_provider: Option<String>,
    pub ranking: RankingReport,
    /// Providers filtered out by functional matching, with reasons.
    pub excluded: Vec<MatchReport>,
}

impl SelectionReport {
    /// Canonical JSON body shared by every front end.
    pub fn to_json_pretty(&self) -> String {
        serde_json::to_string_pretty(self).expect("report serializes")
    }
}

#[derive(Debug, Error)]
pub enum SelectionError {
    #[error("invalid request: {}", .0.iter().map(ToString::to_string).collect::<Vec<_>>().join("; "))]
    Invalid(Vec<RequestViolation>),
    #[error(transparent)]
    Scoring(#[from] ScoringError),
}

/// Runs the request against `catalog`.
///
/// Every weighted attribute is implicitly required, so providers that do
/// not publish it are excluded during discovery rather than scored on a
/// guessed value.
pub fn select(
    catalog: &Catalog,
    request: &SelectionRequest,
    tolerance: f64,
) -> Result<SelectionReport, SelectionError> {
    let mut violations = match validate_request(
        request.weights.clone(),
        request.sensitivities.clone(),
        request.minima.clone(),
        tolerance,
    ) {
        Ok(_) => Vec::new(),
        Err(ScoringError::Validation(v)) => v,
        Err(other) => return Err(other.into()),
    };
    violations.extend(
        request
            .functional
            .invalid_minimums()
            .into_iter()
            .map(|msg| {
                let (field, message) = msg
                    .split_once(": ")
                    .unwrap_or(("functional.node_config_min", &msg));
                RequestViolation {
                    field: field.to_owned(),
                    message: message.to_owned(),
                }
            }),
    );
    for id in request
        .weights
        .keys()
        .chain(&request.functional.required_attributes)
    {
        if !catalog.registry().contains(id) {
            violations.push(RequestViolation {
                field: format!("weights.{id}"),
                message: format!("attribute {id:?} is not registered in the catalog"),
            });
        }
    }
    if !violations.is_empty() {
        return Err(SelectionError::Invalid(violations));
    }
    let validated = validate_request(
        request.weights.clone(),
        request.sensitivities.clone(),
        request.minima.clone(),
        tolerance,
    )?;

    let mut functional = request.functional.clone().canonicalized();
    functional
        .required_attributes
        .extend(request.weights.keys().cloned());

    let normalization = match catalog.mode() {
        QosMode::Normalized => Normalization::AsProvided,
        QosMode::Raw => Normalization::CohortMinMax,
    };
    let survivors = discover(&functional, catalog.providers());
    let mut excluded: Vec<MatchReport> = catalog
        .providers()
        .iter()
        .map(|p| matches(&functional, p))
        .filter(|r| !r.is_match())
        .collect();
    excluded.sort_by(|a, b| a.provider_id.cmp(&b.provider_id));

    if survivors.is_empty() {
        return Ok(SelectionReport {
            status: SelectionStatus::NoMatch,
            normalization,
            selected_provider: None,
            ranking: crate::scoring::rank::empty_report(&validated)?,
            excluded,
        });
    }

    let offers = normalize_offers(&survivors, catalog.registry())?
        .iter()
        .map(|o| o.restricted_to(validated.attributes()))
        .collect::<Result<Vec<_>, _>>()?;
    let ranking = rank(&offers, &validated)?;
    Ok(SelectionReport {
        status: SelectionStatus::Ok,
        normalization,
        selected_provider: ranking.selected().map(|e| e.provider_id.clone()),
        ranking,
        excluded,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures;
    use crate::scoring::DEFAULT_WEIGHT_TOLERANCE;

    #[test]
    fn worked_example() {
        let report = select(
            &fixtures::example_catalog(),
            &fixtures::example_request(),
            DEFAULT_WEIGHT_TOLERANCE,
        )
        .unwrap();
        assert_eq!(report.status, SelectionStatus::Ok);
        assert_eq!(report.selected_provider.as_deref(), Some("RF1"));
        assert!(report.excluded.is_empty());
        let last = report.ranking.entries.last().unwrap();
        assert_eq!((last.provider_id.as_str(), last.eligible), ("RF4", false));
    }

    #[test]
    fn unsatisfiable_requirements_give_no_match() {
        let mut req = fixtures::example_request();
        req.functional.render_engines.insert("redshift".into());
        let report = select(&fixtures::example_catalog(), &req, DEFAULT_WEIGHT_TOLERANCE).unwrap();
        assert_eq!(report.status, SelectionStatus::NoMatch);
        assert!(report.ranking.entries.is_empty());
        assert_eq!(report.excluded.len(), 5);
        assert!((report.ranking.threshold - 0.2291).abs() < 1e-4);
    }

    #[test]
    fn weight_sum_of_point_nine_is_rejected() {
        let mut req = fixtures::example_request();
        *req.weights.get_mut("cost").unwrap() = 0.2;
        let Err(SelectionError::Invalid(v)) =
            select(&fixtures::example_catalog(), &req, DEFAULT_WEIGHT_TOLERANCE)
        else {
            panic!("expected validation failure")
        };
        assert_eq!(v.len(), 1);
        assert!(
            v[0].message.starts_with("weight sum 0.9"),
            "{}",
            v[0].message
        );
    }

    #[test]
    fn unregistered_weight_is_rejected() {
        let req = crate::request::parse_request(
            r#"{"weights":{"karma":1},"sensitivities":{"karma":1},"minima":{"karma":0.1}}"#,
        )
        .unwrap();
        assert!(matches!(
            select(&fixtures::example_catalog(), &req, DEFAULT_WEIGHT_TOLERANCE),
            Err(SelectionError::Invalid(_))
        ));
    }

    #[test]
    fn raw_catalog_is_scaled_over_survivors() {
        let catalog = crate::catalog::ingest_catalog(fixtures::RAW_COST_JSON).unwrap();
        let req = crate::request::parse_request(
            r#"{"weights":{"cost":1},"sensitivities":{"cost":1},"minima":{"cost":0.5}}"#,
        )
        .unwrap();
        let report = select(&catalog, &req, DEFAULT_WEIGHT_TOLERANCE).unwrap();
        assert_eq!(report.normalization, Normalization::CohortMinMax);
        let aus: Vec<_> = report
            .ranking
            .entries
            .iter()
            .map(|e| (e.provider_id.as_str(), e.aggregate_utility))
            .collect();
        assert_eq!(aus, [("RF_a", 1.0), ("RF_b", 0.0)]);
    }
}
