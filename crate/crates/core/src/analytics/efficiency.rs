use std::collections::BTreeSet;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::AnalyticsError;
use crate::integrity::AlertSeverity;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyWeights {
    pub accuracy: f64,
    pub speed: f64,
    pub coverage: f64,
    /// Entries per hour counted as full speed.
    pub target_rate: f64,
    pub scale: f64,
}

impl Default for EfficiencyWeights {
    fn default() -> Self {
        Self { accuracy: 0.5, speed: 0.3, coverage: 0.2, target_rate: 20.0, scale: 1.0 }
    }
}

impl EfficiencyWeights {
    pub fn validate(&self) -> Result<(), AnalyticsError> {
        let ws = [self.accuracy, self.speed, self.coverage];
        if ws.iter().any(|w| !(*w >= 0.0 && w.is_finite())) || ws.iter().sum::<f64>() <= 0.0 {
            return Err(AnalyticsError::Domain("efficiency weights must be non-negative with a positive sum".into()));
        }
        if !(self.target_rate > 0.0 && self.scale > 0.0) {
            return Err(AnalyticsError::Domain("target rate and scale must be positive".into()));
        }
        Ok(())
    }

    /// `100 * (wA A + wS S + wC C) / (wA + wS + wC) * scale`.
    pub fn composite(&self, accuracy: f64, speed: f64, coverage: f64) -> f64 {
        let total = self.accuracy + self.speed + self.coverage;
        100.0 * (self.accuracy * accuracy + self.speed * speed + self.coverage * coverage) / total * self.scale
    }
}

/// One submission as seen by efficiency scoring.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubmissionRecord {
    pub measurement_id: String,
    pub child_id: String,
    pub timestamp: DateTime<Utc>,
    /// Seconds spent entering the record.
    pub entry_duration: f64,
    /// Worst screening flag, if any.
    pub worst_flag: Option<AlertSeverity>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EfficiencyScore {
    pub chw_id: String,
    pub from: DateTime<Utc>,
    pub to: DateTime<Utc>,
    pub submissions: usize,
    pub accuracy: f64,
    pub speed: f64,
    pub coverage: f64,
    pub composite: f64,
    pub inactive: bool,
}

fn median(mut xs: Vec<f64>) -> f64 {
    xs.sort_by(f64::total_cmp);
    let n = xs.len();
    if n % 2 == 1 {
        xs[n / 2]
    } else {
        let (a, b) = (xs[n / 2 - 1], xs[n / 2]);
        if a.is_infinite() || b.is_infinite() {
            // avoids inf - inf when both are unbounded
            if a == b {
                a
            } else {
                a / 2.0 + b / 2.0
            }
        } else {
            (a + b) / 2.0
        }
    }
}

/// Scores a CHW over `[from, to)`.
///
/// Accuracy is the share of submissions with no warn or block flag, speed the
/// median entries per hour against the target rate (capped at 1), coverage the
/// share of assigned children measured in the period. With no submissions
/// every component is 0 and the score is marked inactive.
pub fn efficiency_score(
    chw_id: &str,
    records: &[SubmissionRecord],
    assigned_children: &BTreeSet<String>,
    from: DateTime<Utc>,
    to: DateTime<Utc>,
    weights: &EfficiencyWeights,
) -> Result<EfficiencyScore, AnalyticsError> {
    if to <= from {
        return Err(AnalyticsError::Domain(format!("empty period {from} .. {to}")));
    }
    weights.validate()?;
    let inside: Vec<&SubmissionRecord> = records.iter().filter(|r| r.timestamp >= from && r.timestamp < to).collect();
    if inside.is_empty() {
        return Ok(EfficiencyScore {
            chw_id: chw_id.to_string(),
            from,
            to,
            submissions: 0,
            accuracy: 0.0,
            speed: 0.0,
            coverage: 0.0,
            composite: 0.0,
            inactive: true,
        });
    }
    let n = inside.len() as f64;
    let clean = inside.iter().filter(|r| r.worst_flag.is_none_or(|s| s == AlertSeverity::Info)).count();
    let accuracy = clean as f64 / n;
    let rates: Vec<f64> =
        inside.iter().map(|r| if r.entry_duration > 0.0 { 3600.0 / r.entry_duration } else { f64::INFINITY }).collect();
    let speed = (median(rates) / weights.target_rate).min(1.0);
    let measured: BTreeSet<&str> = inside.iter().map(|r| r.child_id.as_str()).collect();
    let coverage = if assigned_children.is_empty() {
        0.0
    } else {
        assigned_children.iter().filter(|c| measured.contains(c.as_str())).count() as f64
            / assigned_children.len() as f64
    };
    Ok(EfficiencyScore {
        chw_id: chw_id.to_string(),
        from,
        to,
        submissions: inside.len(),
        accuracy,
        speed,
        coverage,
        composite: weights.composite(accuracy, speed, coverage),
        inactive: false,
    })
}
