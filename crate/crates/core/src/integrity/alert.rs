use std::collections::BTreeMap;
use std::fmt;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AlertKind {
    DigitPreference,
    Duplicate,
    Velocity,
    ExtremeZ,
    LocationMismatch,
    UnregisteredChild,
}

impl fmt::Display for AlertKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlertKind::DigitPreference => "digit_preference",
            AlertKind::Duplicate => "duplicate",
            AlertKind::Velocity => "velocity",
            AlertKind::ExtremeZ => "extreme_z",
            AlertKind::LocationMismatch => "location_mismatch",
            AlertKind::UnregisteredChild => "unregistered_child",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AlertSeverity {
    Info,
    Warn,
    Block,
}

impl fmt::Display for AlertSeverity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            AlertSeverity::Info => "info",
            AlertSeverity::Warn => "warn",
            AlertSeverity::Block => "block",
        })
    }
}

/// The statistic that tripped a rule and the threshold it was compared with.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Evidence {
    pub statistic: f64,
    pub threshold: f64,
    pub detail: String,
}

impl Evidence {
    pub fn new(statistic: f64, threshold: f64, detail: impl Into<String>) -> Self {
        Self { statistic, threshold, detail: detail.into() }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Alert {
    pub id: String,
    pub kind: AlertKind,
    pub severity: AlertSeverity,
    pub chw_id: String,
    #[serde(default)]
    pub child_id: Option<String>,
    pub measurement_ids: Vec<String>,
    pub evidence: Evidence,
    pub created_at: DateTime<Utc>,
}

/// Alert counts for one CHW.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct RiskSummary {
    pub chw_id: String,
    pub total: usize,
    pub by_severity: BTreeMap<AlertSeverity, usize>,
    pub by_kind: BTreeMap<AlertKind, BTreeMap<AlertSeverity, usize>>,
}

/// Per-CHW alert counts for alerts created in `[from, to)`, ordered by CHW id.
pub fn chw_risk_report(alerts: &[Alert], from: DateTime<Utc>, to: DateTime<Utc>) -> Vec<RiskSummary> {
    let mut by_chw: BTreeMap<&str, RiskSummary> = BTreeMap::new();
    for a in alerts.iter().filter(|a| a.created_at >= from && a.created_at < to) {
        let s = by_chw
            .entry(a.chw_id.as_str())
            .or_insert_with(|| RiskSummary { chw_id: a.chw_id.clone(), ..Default::default() });
        s.total += 1;
        *s.by_severity.entry(a.severity).or_default() += 1;
        *s.by_kind.entry(a.kind).or_default().entry(a.severity).or_default() += 1;
    }
    by_chw.into_values().collect()
}

#[derive(Serialize)]
struct AlertRow<'a> {
    id: &'a str,
    kind: String,
    severity: String,
    chw_id: &'a str,
    child_id: &'a str,
    measurement_ids: String,
    statistic: String,
    threshold: String,
    detail: &'a str,
    created_at: String,
}

/// Delimited export for audits.
pub fn alerts_to_csv<W: std::io::Write>(writer: W, alerts: &[Alert]) -> std::io::Result<()> {
    let rows: Vec<AlertRow> = alerts
        .iter()
        .map(|a| AlertRow {
            id: &a.id,
            kind: a.kind.to_string(),
            severity: a.severity.to_string(),
            chw_id: &a.chw_id,
            child_id: a.child_id.as_deref().unwrap_or(""),
            measurement_ids: a.measurement_ids.join(";"),
            statistic: crate::fmt::sig6(a.evidence.statistic),
            threshold: crate::fmt::sig6(a.evidence.threshold),
            detail: &a.evidence.detail,
            created_at: a.created_at.to_rfc3339(),
        })
        .collect();
    crate::io::write_csv(writer, &rows)
}
