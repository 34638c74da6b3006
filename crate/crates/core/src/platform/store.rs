//! In-memory indexes over the record log, and the per-measurement pipeline.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::{LogRecord, Registry};
use crate::analytics::SubmissionRecord;
use crate::anthro::{assess, CutoffTable, GrowthReference, Measurement, ZScoreResult};
use crate::config::{Config, ConfigError};
use crate::game::{score_submission, Badge, CellContext, GameState, Quest, ScoreEvent};
use crate::integrity::{
    digit_preference, find_duplicates, screen_measurement, Alert, AlertKind, AlertSeverity, DigitPreference, Evidence,
};

/// Everything processing depends on besides the store itself.
#[derive(Debug, Clone)]
pub struct Env {
    pub config: Config,
    pub reference: GrowthReference,
    pub cutoffs: CutoffTable,
}

impl Env {
    /// Bundled reference and cutoff tables.
    pub fn new(config: Config) -> Self {
        Self { config, reference: GrowthReference::bundled(), cutoffs: CutoffTable::default() }
    }

    /// Loads the tables the config names, bundled ones otherwise.
    pub fn from_config(config: Config) -> Result<Self, ConfigError> {
        let open =
            |p: &std::path::Path| std::fs::File::open(p).map_err(|e| ConfigError::Io(p.to_path_buf(), e.to_string()));
        let reference = match &config.reference_path {
            Some(p) => GrowthReference::from_csv(open(p)?).map_err(|e| ConfigError::Table(p.clone(), e))?,
            None => GrowthReference::bundled(),
        };
        let cutoffs = match &config.cutoffs_path {
            Some(p) => CutoffTable::from_csv(open(p)?).map_err(|e| ConfigError::Table(p.clone(), e))?,
            None => CutoffTable::default(),
        };
        Ok(Self { config, reference, cutoffs })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StoredMeasurement {
    pub measurement: Measurement,
    pub z: Option<ZScoreResult>,
    pub alerts: Vec<Alert>,
    pub score: Option<ScoreEvent>,
    pub badges: Vec<Badge>,
    pub held: bool,
    pub cell: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AcceptedQuest {
    pub quest: Quest,
    pub accepted_at: DateTime<Utc>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "detail", rename_all = "snake_case")]
pub enum RejectReason {
    Validation(String),
    /// Same id as an earlier measurement with a different payload.
    Conflict,
    /// A block-severity screening flag; the record is kept for review.
    Blocked(String),
    UnknownChw(String),
    ChwMismatch(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum SyncOutcome {
    Accepted { measurement_id: String, z: Option<ZScoreResult>, points: i64, badges: Vec<Badge>, alerts: Vec<Alert> },
    Duplicate { measurement_id: String },
    Rejected { measurement_id: String, reason: RejectReason },
}

impl SyncOutcome {
    pub fn measurement_id(&self) -> &str {
        match self {
            SyncOutcome::Accepted { measurement_id, .. }
            | SyncOutcome::Duplicate { measurement_id }
            | SyncOutcome::Rejected { measurement_id, .. } => measurement_id,
        }
    }

    pub fn is_accepted(&self) -> bool {
        matches!(self, SyncOutcome::Accepted { .. })
    }
}

/// State rebuilt from the log. Every change goes through [`Store::apply`].
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Store {
    registry: Registry,
    measurements: BTreeMap<String, StoredMeasurement>,
    order: Vec<String>,
    by_child: BTreeMap<String, Vec<usize>>,
    cell_last: BTreeMap<usize, DateTime<Utc>>,
    states: BTreeMap<String, GameState>,
    quests: BTreeMap<String, AcceptedQuest>,
}

impl Store {
    pub fn rebuild<'a>(records: impl IntoIterator<Item = &'a LogRecord>, env: &Env) -> Self {
        let mut s = Store::default();
        for r in records {
            s.apply(r, env);
        }
        s
    }

    pub fn registry(&self) -> &Registry {
        &self.registry
    }

    pub fn measurement(&self, id: &str) -> Option<&StoredMeasurement> {
        self.measurements.get(id)
    }

    /// Stored measurements in acceptance order.
    pub fn measurements(&self) -> impl Iterator<Item = &StoredMeasurement> {
        self.order.iter().map(|id| &self.measurements[id])
    }

    pub fn len(&self) -> usize {
        self.order.len()
    }

    /// Time of the newest stored measurement.
    pub fn latest_timestamp(&self) -> Option<DateTime<Utc>> {
        self.measurements().map(|s| s.measurement.timestamp).max()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn states(&self) -> &BTreeMap<String, GameState> {
        &self.states
    }

    pub fn accepted_quests(&self) -> impl Iterator<Item = &AcceptedQuest> {
        self.quests.values()
    }

    pub fn quest(&self, id: &str) -> Option<&AcceptedQuest> {
        self.quests.get(id)
    }

    pub fn cell_last(&self, cell: usize) -> Option<DateTime<Utc>> {
        self.cell_last.get(&cell).copied()
    }

    /// Accepted, unheld visits of one child.
    pub fn history(&self, child_id: &str) -> Vec<&Measurement> {
        self.by_child
            .get(child_id)
            .into_iter()
            .flatten()
            .map(|&i| &self.measurements[&self.order[i]].measurement)
            .collect()
    }

    pub fn apply(&mut self, record: &LogRecord, env: &Env) {
        match record {
            LogRecord::Registry { registry } => self.registry = registry.clone(),
            LogRecord::QuestAccepted { quest, accepted_at } => {
                self.quests.insert(quest.id.clone(), AcceptedQuest { quest: quest.clone(), accepted_at: *accepted_at });
            }
            LogRecord::Accepted { measurement, z, alerts, score, badges, held } => {
                let cell = self.cell_for(measurement, env);
                let idx = self.order.len();
                self.order.push(measurement.id.clone());
                if !*held {
                    self.by_child.entry(measurement.child_id.clone()).or_default().push(idx);
                    if let Some(c) = cell {
                        let last = self.cell_last.entry(c).or_insert(measurement.timestamp);
                        if measurement.timestamp > *last {
                            *last = measurement.timestamp;
                        }
                    }
                }
                if let Some(ev) = score {
                    let team = self.registry.chw(&ev.chw_id).and_then(|w| w.team_id.clone());
                    self.states
                        .entry(ev.chw_id.clone())
                        .or_insert_with(|| GameState::new(ev.chw_id.clone(), team))
                        .record(ev.clone(), &env.config.reward);
                }
                self.measurements.insert(
                    measurement.id.clone(),
                    StoredMeasurement {
                        measurement: measurement.clone(),
                        z: z.clone(),
                        alerts: alerts.clone(),
                        score: score.clone(),
                        badges: badges.clone(),
                        held: *held,
                        cell,
                    },
                );
            }
        }
    }

    /// Grid cell credited for a measurement: the child's home when registered.
    pub fn cell_for(&self, m: &Measurement, env: &Env) -> Option<usize> {
        let at = self.registry.child(&m.child_id).map_or(m.location, |c| c.home);
        env.config.grid.cell_of(at)
    }

    /// Runs one measurement through validation, z-scores, screening and
    /// scoring without touching the store. Returns the outcome and, for a new
    /// valid measurement, the record to append.
    pub fn process(&self, m: &Measurement, batch_chw: &str, env: &Env) -> (SyncOutcome, Option<LogRecord>) {
        let id = m.id.clone();
        let reject = |reason| (SyncOutcome::Rejected { measurement_id: id.clone(), reason }, None);
        if let Some(prev) = self.measurements.get(&m.id) {
            return if prev.measurement == *m {
                (SyncOutcome::Duplicate { measurement_id: id }, None)
            } else {
                reject(RejectReason::Conflict)
            };
        }
        if let Err(e) = m.validate() {
            return reject(RejectReason::Validation(e.to_string()));
        }
        if m.chw_id != batch_chw {
            return reject(RejectReason::ChwMismatch(format!("record names {}, batch is from {batch_chw}", m.chw_id)));
        }
        if self.registry.chw(&m.chw_id).is_none() {
            return reject(RejectReason::UnknownChw(m.chw_id.clone()));
        }
        let cfg = &env.config;
        let child = self.registry.child(&m.child_id);
        let z = child.map(|c| assess(m, &c.profile(), &env.reference, &env.cutoffs, &cfg.assess));
        let history: Vec<Measurement> = self.history(&m.child_id).into_iter().cloned().collect();
        let zvals = z.as_ref().map(|r| r.z).unwrap_or_default();
        let screening = screen_measurement(m, &history, child.map(|c| c.home), &zvals, &cfg.integrity);
        let alerts: Vec<Alert> = screening
            .flags
            .iter()
            .enumerate()
            .map(|(k, f)| Alert {
                id: format!("{}/{k}-{}", m.id, f.kind),
                kind: f.kind,
                severity: f.severity,
                chw_id: m.chw_id.clone(),
                child_id: Some(m.child_id.clone()),
                measurement_ids: vec![m.id.clone()],
                evidence: f.evidence.clone(),
                created_at: m.timestamp,
            })
            .collect();

        if screening.blocks() {
            let detail = alerts
                .iter()
                .filter(|a| a.severity == AlertSeverity::Block)
                .map(|a| a.evidence.detail.clone())
                .collect::<Vec<_>>()
                .join("; ");
            let record =
                LogRecord::Accepted { measurement: m.clone(), z, alerts, score: None, badges: vec![], held: true };
            return (SyncOutcome::Rejected { measurement_id: id, reason: RejectReason::Blocked(detail) }, Some(record));
        }

        let cell = self.cell_for(m, env);
        let last = cell.and_then(|c| self.cell_last(c));
        let ctx = CellContext::from_last(cell, last, m.timestamp, &cfg.reward);
        let team = self.registry.chw(&m.chw_id).and_then(|w| w.team_id.clone());
        let mut state = self
            .states
            .get(&m.chw_id)
            .map(GameState::summary)
            .unwrap_or_else(|| GameState::new(m.chw_id.clone(), team));
        state.observe_activity(cfg.reward.activity_date(m.timestamp));
        let event = match score_submission(m, &screening, &ctx, &state, &cfg.campaigns, &cfg.reward) {
            Ok(ev) => ev,
            Err(e) => return reject(RejectReason::Validation(e.to_string())),
        };
        let badges = state.preview_badges(&event, &cfg.reward);
        let outcome = SyncOutcome::Accepted {
            measurement_id: id,
            z: z.clone(),
            points: event.amount,
            badges: badges.clone(),
            alerts: alerts.clone(),
        };
        let record = LogRecord::Accepted { measurement: m.clone(), z, alerts, score: Some(event), badges, held: false };
        (outcome, Some(record))
    }

    /// Alerts that need more than one record: terminal-digit preference per
    /// CHW and copied value tuples.
    pub fn aggregate_alerts(&self, env: &Env) -> Vec<Alert> {
        let lim = &env.config.integrity;
        let mut by_chw: BTreeMap<&str, Vec<&Measurement>> = BTreeMap::new();
        for s in self.measurements() {
            by_chw.entry(s.measurement.chw_id.as_str()).or_default().push(&s.measurement);
        }
        let mut out = Vec::new();
        type Field = fn(&Measurement) -> Option<f64>;
        let fields: [(&str, Field, u32); 3] =
            [("weight", |m| m.weight, 1), ("height", |m| m.height, 1), ("muac", |m| m.muac, 0)];
        for (chw, ms) in &by_chw {
            let latest = ms.iter().map(|m| m.timestamp).max().expect("non-empty");
            for (name, get, decimals) in fields {
                let values: Vec<f64> = ms.iter().filter_map(|m| get(m)).collect();
                if let DigitPreference::Tested { n, counts, chi2, flagged: true } =
                    digit_preference(&values, decimals, lim.digit_min_values, lim.digit_chi2_critical)
                {
                    out.push(Alert {
                        id: format!("digits/{chw}/{name}"),
                        kind: AlertKind::DigitPreference,
                        severity: AlertSeverity::Warn,
                        chw_id: chw.to_string(),
                        child_id: None,
                        measurement_ids: vec![],
                        evidence: Evidence::new(
                            chi2,
                            lim.digit_chi2_critical,
                            format!("{name} terminal digits over {n} values: {counts:?}"),
                        ),
                        created_at: latest,
                    });
                }
            }
        }
        let all: Vec<Measurement> = self.measurements().map(|s| s.measurement.clone()).collect();
        for g in find_duplicates(&all, lim.duplicate_window_days, lim.duplicate_warn_size) {
            let created_at =
                g.measurement_ids.iter().map(|id| self.measurements[id].measurement.timestamp).max().unwrap();
            out.push(Alert {
                id: format!("duplicate/{}/{}", g.chw_id, g.measurement_ids[0]),
                kind: AlertKind::Duplicate,
                severity: g.severity,
                chw_id: g.chw_id.clone(),
                child_id: None,
                evidence: Evidence::new(
                    g.size() as f64,
                    lim.duplicate_warn_size as f64,
                    format!("identical values for {} children", g.size()),
                ),
                measurement_ids: g.measurement_ids,
                created_at,
            });
        }
        out
    }

    /// Per-measurement and aggregate alerts, ordered by time then id.
    pub fn all_alerts(&self, env: &Env) -> Vec<Alert> {
        let mut out: Vec<Alert> = self.measurements().flat_map(|s| s.alerts.iter().cloned()).collect();
        out.extend(self.aggregate_alerts(env));
        out.sort_by(|a, b| a.created_at.cmp(&b.created_at).then_with(|| a.id.cmp(&b.id)));
        out
    }

    /// Efficiency inputs for one CHW, with duplicate alerts attributed to
    /// the measurements they name.
    pub fn submissions(&self, chw_id: &str, alerts: &[Alert]) -> Vec<SubmissionRecord> {
        let mut worst: BTreeMap<&str, AlertSeverity> = BTreeMap::new();
        for a in alerts.iter().filter(|a| a.chw_id == chw_id) {
            for id in &a.measurement_ids {
                let w = worst.entry(id.as_str()).or_insert(a.severity);
                *w = (*w).max(a.severity);
            }
        }
        self.measurements()
            .filter(|s| s.measurement.chw_id == chw_id)
            .map(|s| SubmissionRecord {
                measurement_id: s.measurement.id.clone(),
                child_id: s.measurement.child_id.clone(),
                timestamp: s.measurement.timestamp,
                entry_duration: s.measurement.entry_duration,
                worst_flag: worst.get(s.measurement.id.as_str()).copied(),
            })
            .collect()
    }
}
