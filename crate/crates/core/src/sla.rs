//! SLA negotiation and violation intake.
//!
//! Negotiation is a two-party alternating-offer protocol. A draft starts in
//! `Proposed` with one party as the author of the pending offer; the other
//! party may accept, reject, or counter. A counter moves the draft to
//! `Countered` and hands authorship to the counter-party, who is then the
//! only one that cannot answer. `Accepted`, `Rejected` and `Expired` are
//! terminal. Expiry is an explicit administrative action.
//!
//! Third-party monitors register once and then file violation reports
//! against accepted SLAs. Each accepted report is stored append-only and
//! queues one notification per party.

use std::collections::HashMap;
use std::fmt;
use std::fs::OpenOptions;
use std::io::{self, Write};
use std::path::PathBuf;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex, RwLock};

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::catalog::{AttributeRegistry, Catalog};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Actor {
    User,
    Provider,
}

impl Actor {
    pub const ALL: [Actor; 2] = [Actor::User, Actor::Provider];

    pub fn other(self) -> Actor {
        match self {
            Actor::User => Actor::Provider,
            Actor::Provider => Actor::User,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Comparator {
    #[serde(rename = ">=")]
    AtLeast,
    #[serde(rename = "<=")]
    AtMost,
}

impl Comparator {
    /// Whether `observed` honours the bound.
    pub fn holds(self, observed: f64, bound: f64) -> bool {
        match self {
            Comparator::AtLeast => observed >= bound,
            Comparator::AtMost => observed <= bound,
        }
    }
}

impl fmt::Display for Comparator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Comparator::AtLeast => ">=",
            Comparator::AtMost => "<=",
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlaTerm {
    pub attribute: String,
    pub comparator: Comparator,
    pub bound: f64,
    #[serde(default)]
    pub unit: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SlaState {
    Proposed,
    Countered,
    Accepted,
    Rejected,
    Expired,
}

impl SlaState {
    pub const ALL: [SlaState; 5] = [
        SlaState::Proposed,
        SlaState::Countered,
        SlaState::Accepted,
        SlaState::Rejected,
        SlaState::Expired,
    ];

    pub fn is_terminal(self) -> bool {
        matches!(
            self,
            SlaState::Accepted | SlaState::Rejected | SlaState::Expired
        )
    }
}

impl fmt::Display for SlaState {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

/// A party's answer to the pending offer.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "action", content = "terms", rename_all = "lowercase")]
pub enum Response {
    Accept,
    Reject,
    Counter(Vec<SlaTerm>),
}

impl Response {
    pub fn kind(&self) -> ActionKind {
        match self {
            Response::Accept => ActionKind::Accept,
            Response::Reject => ActionKind::Reject,
            Response::Counter(_) => ActionKind::Counter,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ActionKind {
    Propose,
    Accept,
    Reject,
    Counter,
    Expire,
}

impl fmt::Display for ActionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Debug::fmt(self, f)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryEntry {
    pub seq: u64,
    pub at: DateTime<Utc>,
    /// `None` for administrative actions.
    pub actor: Option<Actor>,
    pub action: ActionKind,
    pub terms: Vec<SlaTerm>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SlaDraft {
    pub sla_id: String,
    pub provider_id: String,
    pub user_id: String,
    pub terms: Vec<SlaTerm>,
    pub state: SlaState,
    /// Author of the offer currently awaiting an answer.
    pub pending_author: Actor,
    pub history: Vec<HistoryEntry>,
}

impl SlaDraft {
    fn record(&mut self, at: DateTime<Utc>, actor: Option<Actor>, action: ActionKind) {
        let at = self.history.last().map_or(at, |last| at.max(last.at));
        self.history.push(HistoryEntry {
            seq: self.history.len() as u64,
            at,
            actor,
            action,
            terms: self.terms.clone(),
        });
    }

    pub fn term_for(&self, attribute: &str, bound: f64) -> Option<&SlaTerm> {
        self.terms
            .iter()
            .find(|t| t.attribute == attribute && t.bound == bound)
    }
}

/// The negotiation transition table.
pub fn next_state(
    state: SlaState,
    pending_author: Actor,
    actor: Actor,
    action: ActionKind,
) -> Result<SlaState, SlaError> {
    if state.is_terminal() || matches!(action, ActionKind::Propose | ActionKind::Expire) {
        return Err(SlaError::IllegalTransition { state, action });
    }
    if actor == pending_author {
        return Err(SlaError::WrongActor { actor });
    }
    Ok(match action {
        ActionKind::Accept => SlaState::Accepted,
        ActionKind::Reject => SlaState::Rejected,
        ActionKind::Counter => SlaState::Countered,
        ActionKind::Propose | ActionKind::Expire => unreachable!(),
    })
}

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct MonitorRegistration {
    pub monitor_id: String,
    pub endpoint: String,
    pub registered_at: DateTime<Utc>,
    #[serde(skip_serializing, default)]
    token: String,
}

impl MonitorRegistration {
    pub fn token_matches(&self, token: &str) -> bool {
        // length check first, then compare without early exit
        self.token.len() == token.len()
            && self
                .token
                .bytes()
                .zip(token.bytes())
                .fold(0u8, |acc, (a, b)| acc | (a ^ b))
                == 0
    }
}

/// What a monitor submits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ViolationSubmission {
    pub sla_id: String,
    pub monitor_id: String,
    pub attribute: String,
    pub observed: f64,
    pub bound: f64,
    pub observed_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub report_id: String,
    pub sla_id: String,
    pub monitor_id: String,
    pub attribute: String,
    pub observed: f64,
    pub bound: f64,
    pub observed_at: DateTime<Utc>,
    pub received_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Notification {
    pub sla_id: String,
    pub report_id: String,
    pub recipient: Actor,
    /// User id or provider id, depending on `recipient`.
    pub party_id: String,
    pub queued_at: DateTime<Utc>,
    pub message: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationAck {
    pub report: ViolationReport,
    pub notifications: Vec<Notification>,
}

#[derive(Debug, Error)]
pub enum SlaError {
    #[error("SLA terms must not be empty")]
    EmptyTerms,
    #[error("unknown QoS attribute {0:?}")]
    UnknownAttribute(String),
    #[error("invalid term on {attribute}: {message}")]
    InvalidTerm { attribute: String, message: String },
    #[error("unknown provider {0:?}")]
    UnknownProvider(String),
    #[error("unknown SLA {0:?}")]
    UnknownSla(String),
    #[error("{action} is not allowed in state {state}")]
    IllegalTransition { state: SlaState, action: ActionKind },
    #[error("{actor:?} authored the pending offer and cannot answer it")]
    WrongActor { actor: Actor },
    #[error("unknown monitor {0:?}")]
    UnknownMonitor(String),
    #[error("monitor {0:?} is already registered")]
    MonitorExists(String),
    #[error("SLA is {state}, violations can only be filed against accepted SLAs")]
    SlaNotActive { state: SlaState },
    #[error("SLA has no term on {attribute} with bound {bound}")]
    UnknownTerm { attribute: String, bound: f64 },
    #[error("observed {observed} satisfies {comparator} {bound}")]
    NotAViolation {
        observed: f64,
        comparator: Comparator,
        bound: f64,
    },
    #[error("violation journal I/O failure: {0}")]
    Storage(#[from] io::Error),
}

pub trait Clock: Send + Sync {
    fn now(&self) -> DateTime<Utc>;
}

#[derive(Debug, Default, Clone, Copy)]
pub struct SystemClock;

impl Clock for SystemClock {
    fn now(&self) -> DateTime<Utc> {
        Utc::now()
    }
}

fn validate_terms(terms: &[SlaTerm], registry: &AttributeRegistry) -> Result<(), SlaError> {
    if terms.is_empty() {
        return Err(SlaError::EmptyTerms);
    }
    for t in terms {
        if !registry.contains(&t.attribute) {
            return Err(SlaError::UnknownAttribute(t.attribute.clone()));
        }
        if !t.bound.is_finite() {
            return Err(SlaError::InvalidTerm {
                attribute: t.attribute.clone(),
                message: format!("bound {} is not finite", t.bound),
            });
        }
    }
    Ok(())
}

/// Holds drafts, monitors and violation records. Transitions on a single
/// SLA are serialized by a per-draft lock.
pub struct SlaManager {
    drafts: RwLock<HashMap<String, Arc<Mutex<SlaDraft>>>>,
    monitors: RwLock<HashMap<String, MonitorRegistration>>,
    violations: Mutex<Vec<ViolationReport>>,
    outbox: Mutex<Vec<Notification>>,
    next_sla: AtomicU64,
    next_report: AtomicU64,
    journal: Option<PathBuf>,
    clock: Box<dyn Clock>,
}

impl Default for SlaManager {
    fn default() -> Self {
        Self::new()
    }
}

impl SlaManager {
    pub fn new() -> Self {
        Self::with_clock(Box::new(SystemClock))
    }

    pub fn with_clock(clock: Box<dyn Clock>) -> Self {
        Self {
            drafts: RwLock::default(),
            monitors: RwLock::default(),
            violations: Mutex::default(),
            outbox: Mutex::default(),
            next_sla: AtomicU64::new(1),
            next_report: AtomicU64::new(1),
            journal: None,
            clock,
        }
    }

    /// Also append every accepted violation report, one JSON object per
    /// line, to `path`.
    pub fn with_journal(mut self, path: impl Into<PathBuf>) -> Self {
        self.journal = Some(path.into());
        self
    }

    pub fn propose(
        &self,
        catalog: &Catalog,
        user_id: &str,
        provider_id: &str,
        author: Actor,
        terms: Vec<SlaTerm>,
    ) -> Result<SlaDraft, SlaError> {
        if catalog.provider(provider_id).is_none() {
            return Err(SlaError::UnknownProvider(provider_id.to_owned()));
        }
        validate_terms(&terms, catalog.registry())?;
        let sla_id = format!("sla-{}", self.next_sla.fetch_add(1, Ordering::Relaxed));
        let mut draft = SlaDraft {
            sla_id: sla_id.clone(),
            provider_id: provider_id.to_owned(),
            user_id: user_id.to_owned(),
            terms,
            state: SlaState::Proposed,
            pending_author: author,
            history: Vec::new(),
        };
        draft.record(self.clock.now(), Some(author), ActionKind::Propose);
        self.drafts
            .write()
            .unwrap_or_else(|e| e.into_inner())
            .insert(sla_id, Arc::new(Mutex::new(draft.clone())));
        Ok(draft)
    }

    fn draft(&self, sla_id: &str) -> Result<Arc<Mutex<SlaDraft>>, SlaError> {
        self.drafts
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(sla_id)
            .cloned()
            .ok_or_else(|| SlaError::UnknownSla(sla_id.to_owned()))
    }

    pub fn get(&self, sla_id: &str) -> Result<SlaDraft, SlaError> {
        let draft = self.draft(sla_id)?;
        let guard = draft.lock().unwrap_or_else(|e| e.into_inner());
        Ok(guard.clone())
    }

    pub fn respond(
        &self,
        registry: &AttributeRegistry,
        sla_id: &str,
        actor: Actor,
        response: Response,
    ) -> Result<SlaDraft, SlaError> {
        let draft = self.draft(sla_id)?;
        let mut draft = draft.lock().unwrap_or_else(|e| e.into_inner());
        let next = next_state(draft.state, draft.pending_author, actor, response.kind())?;
        let kind = response.kind();
        if let Response::Counter(terms) = response {
            validate_terms(&terms, registry)?;
            draft.terms = terms;
            draft.pending_author = actor;
        }
        draft.state = next;
        draft.record(self.clock.now(), Some(actor), kind);
        Ok(draft.clone())
    }

    /// Administrative expiry of a draft still under negotiation.
    pub fn expire(&self, sla_id: &str) -> Result<SlaDraft, SlaError> {
        let draft = self.draft(sla_id)?;
        let mut draft = draft.lock().unwrap_or_else(|e| e.into_inner());
        if draft.state.is_terminal() {
            return Err(SlaError::IllegalTransition {
                state: draft.state,
                action: ActionKind::Expire,
            });
        }
        draft.state = SlaState::Expired;
        draft.record(self.clock.now(), None, ActionKind::Expire);
        Ok(draft.clone())
    }

    pub fn register_monitor(
        &self,
        monitor_id: &str,
        endpoint: &str,
        token: &str,
    ) -> Result<MonitorRegistration, SlaError> {
        let mut monitors = self.monitors.write().unwrap_or_else(|e| e.into_inner());
        if monitors.contains_key(monitor_id) {
            return Err(SlaError::MonitorExists(monitor_id.to_owned()));
        }
        let reg = MonitorRegistration {
            monitor_id: monitor_id.to_owned(),
            endpoint: endpoint.to_owned(),
            registered_at: self.clock.now(),
            token: token.to_owned(),
        };
        monitors.insert(monitor_id.to_owned(), reg.clone());
        Ok(reg)
    }

    pub fn monitor(&self, monitor_id: &str) -> Option<MonitorRegistration> {
        self.monitors
            .read()
            .unwrap_or_else(|e| e.into_inner())
            .get(monitor_id)
            .cloned()
    }

    pub fn submit_violation(
        &self,
        submission: ViolationSubmission,
    ) -> Result<ViolationAck, SlaError> {
        if self.monitor(&submission.monitor_id).is_none() {
            return Err(SlaError::UnknownMonitor(submission.monitor_id));
        }
        let draft = self.draft(&submission.sla_id)?;
        // hold the draft lock so the state cannot change under us
        let draft = draft.lock().unwrap_or_else(|e| e.into_inner());
        if draft.state != SlaState::Accepted {
            return Err(SlaError::SlaNotActive { state: draft.state });
        }
        let term = draft
            .term_for(&submission.attribute, submission.bound)
            .ok_or_else(|| SlaError::UnknownTerm {
                attribute: submission.attribute.clone(),
                bound: submission.bound,
            })?;
        if !submission.observed.is_finite()
            || term.comparator.holds(submission.observed, term.bound)
        {
            return Err(SlaError::NotAViolation {
                observed: submission.observed,
                comparator: term.comparator,
                bound: term.bound,
            });
        }

        let now = self.clock.now();
        let report = ViolationReport {
            report_id: format!("vr-{}", self.next_report.fetch_add(1, Ordering::Relaxed)),
            sla_id: submission.sla_id,
            monitor_id: submission.monitor_id,
            attribute: submission.attribute,
            observed: submission.observed,
            bound: submission.bound,
            observed_at: submission.observed_at,
            received_at: now,
        };
        let mut violations = self.violations.lock().unwrap_or_else(|e| e.into_inner());
        if let Some(path) = &self.journal {
            let mut line = serde_json::to_string(&report).expect("report serializes");
            line.push('\n');
            OpenOptions::new()
                .create(true)
                .append(true)
                .open(path)?
                .write_all(line.as_bytes())?;
        }
        violations.push(report.clone());
        drop(violations);

        let message = format!(
            "SLA {}: {} observed {} violates {} {} (monitor {})",
            report.sla_id,
            report.attribute,
            report.observed,
            term.comparator,
            term.bound,
            report.monitor_id
        );
        let notifications: Vec<_> = [
            (Actor::User, &draft.user_id),
            (Actor::Provider, &draft.provider_id),
        ]
        .into_iter()
        .map(|(recipient, party)| Notification {
            sla_id: report.sla_id.clone(),
            report_id: report.report_id.clone(),
            recipient,
            party_id: party.clone(),
            queued_at: now,
            message: message.clone(),
        })
        .collect();
        for n in &notifications {
            log::info!("notify {:?} {}: {}", n.recipient, n.party_id, n.message);
        }
        self.outbox
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .extend(notifications.iter().cloned());
        Ok(ViolationAck {
            report,
            notifications,
        })
    }

    /// Every accepted violation report, in arrival order.
    pub fn violations(&self) -> Vec<ViolationReport> {
        self.violations
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    pub fn violations_for(&self, sla_id: &str) -> Vec<ViolationReport> {
        self.violations()
            .into_iter()
            .filter(|v| v.sla_id == sla_id)
            .collect()
    }

    pub fn notifications(&self) -> Vec<Notification> {
        self.outbox
            .lock()
            .unwrap_or_else(|e| e.into_inner())
            .clone()
    }

    /// Re-checks every stored report against its SLA term. Returns the ids
    /// of reports that no longer fail their term.
    pub fn replay_violations(&self) -> Result<Vec<String>, SlaError> {
        let mut inconsistent = Vec::new();
        for v in self.violations() {
            let draft = self.get(&v.sla_id)?;
            let violates = draft
                .term_for(&v.attribute, v.bound)
                .is_some_and(|t| !t.comparator.holds(v.observed, t.bound));
            if !violates {
                inconsistent.push(v.report_id);
            }
        }
        Ok(inconsistent)
    }
}
