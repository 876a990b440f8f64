use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::{
    threshold_utility, utility_breakdown, NormalizedOffer, ScoringError, ValidatedRequest,
};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankEntry {
    pub provider_id: String,
    pub aggregate_utility: f64,
    pub utilities: BTreeMap<String, f64>,
    pub eligible: bool,
}

/// The inputs a report was computed from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RequestEcho {
    pub weights: BTreeMap<String, f64>,
    pub sensitivities: BTreeMap<String, f64>,
    pub minima: BTreeMap<String, f64>,
}

impl From<&ValidatedRequest> for RequestEcho {
    fn from(req: &ValidatedRequest) -> Self {
        Self {
            weights: req.weights.as_map().clone(),
            sensitivities: req.sensitivities.as_map().clone(),
            minima: req.minima.as_map().clone(),
        }
    }
}

/// Entries are sorted by aggregate utility, highest first, ties broken by
/// ascending provider id. An entry is eligible iff its utility reaches the
/// threshold.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RankingReport {
    pub threshold: f64,
    pub entries: Vec<RankEntry>,
    pub request_echo: RequestEcho,
}

impl RankingReport {
    pub fn eligible(&self) -> impl Iterator<Item = &RankEntry> {
        self.entries.iter().filter(|e| e.eligible)
    }

    /// Best eligible provider.
    pub fn selected(&self) -> Option<&RankEntry> {
        self.eligible().next()
    }
}

pub fn rank(
    offers: &[NormalizedOffer],
    request: &ValidatedRequest,
) -> Result<RankingReport, ScoringError> {
    if offers.is_empty() {
        return Err(ScoringError::DegenerateInput("no offers to rank".into()));
    }
    let threshold = threshold_utility(&request.minima, &request.weights, &request.sensitivities)?;
    let mut entries = offers
        .iter()
        .map(|offer| {
            let b = utility_breakdown(offer, &request.weights, &request.sensitivities)?;
            Ok(RankEntry {
                provider_id: offer.provider_id().to_owned(),
                aggregate_utility: b.total,
                utilities: b.utilities,
                eligible: b.total >= threshold,
            })
        })
        .collect::<Result<Vec<_>, ScoringError>>()?;
    entries.sort_by(|a, b| {
        b.aggregate_utility
            .total_cmp(&a.aggregate_utility)
            .then_with(|| a.provider_id.cmp(&b.provider_id))
    });
    Ok(RankingReport {
        threshold,
        entries,
        request_echo: request.into(),
    })
}

/// Ranks an empty cohort: the threshold is still reported.
pub(crate) fn empty_report(request: &ValidatedRequest) -> Result<RankingReport, ScoringError> {
    Ok(RankingReport {
        threshold: threshold_utility(&request.minima, &request.weights, &request.sensitivities)?,
        entries: Vec::new(),
        request_echo: request.into(),
    })
}
