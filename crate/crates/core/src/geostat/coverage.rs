use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::{GridSpec, LatLon};

#[derive(Debug, Clone, PartialEq)]
pub struct ChildLocation {
    pub child_id: String,
    pub home: LatLon,
}

/// A measurement reduced to what coverage needs. `location` should be the
/// child's home when the child is registered.
#[derive(Debug, Clone, PartialEq)]
pub struct MeasurementStamp {
    pub child_id: String,
    pub location: LatLon,
    pub at: DateTime<Utc>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CoverageStatus {
    /// No known children and no measurements.
    Empty,
    /// Known children but never measured.
    Uncharted,
    Measured,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CoverageCell {
    pub cell: usize,
    pub n_children_known: usize,
    /// Distinct known children of this cell measured inside the window.
    pub n_measured_window: usize,
    pub last_measurement: Option<DateTime<Utc>>,
    /// Days since `last_measurement`; `None` when never measured.
    pub staleness: Option<f64>,
    pub status: CoverageStatus,
}

impl CoverageCell {
    pub fn is_uncharted(&self) -> bool {
        self.status == CoverageStatus::Uncharted
    }
}

/// Per-cell coverage and staleness as of `now`. Measurements after `now` are ignored.
pub fn coverage_map(
    children: &[ChildLocation],
    measurements: &[MeasurementStamp],
    spec: &GridSpec,
    window_days: f64,
    now: DateTime<Utc>,
) -> Vec<CoverageCell> {
    let mut known: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); spec.len()];
    let mut home_cell: BTreeMap<&str, usize> = BTreeMap::new();
    for c in children {
        if let Some(cell) = spec.cell_of(c.home) {
            known[cell].insert(c.child_id.as_str());
            home_cell.insert(c.child_id.as_str(), cell);
        }
    }
    let window = Duration::milliseconds((window_days * 86_400_000.0) as i64);
    let mut last: Vec<Option<DateTime<Utc>>> = vec![None; spec.len()];
    let mut measured: Vec<BTreeSet<&str>> = vec![BTreeSet::new(); spec.len()];
    for m in measurements.iter().filter(|m| m.at <= now) {
        let cell = home_cell.get(m.child_id.as_str()).copied().or_else(|| spec.cell_of(m.location));
        let Some(cell) = cell else { continue };
        if last[cell].is_none_or(|t| m.at > t) {
            last[cell] = Some(m.at);
        }
        if now - m.at <= window && known[cell].contains(m.child_id.as_str()) {
            measured[cell].insert(m.child_id.as_str());
        }
    }
    (0..spec.len())
        .map(|cell| {
            let staleness = last[cell].map(|t| ((now - t).num_milliseconds() as f64 / 86_400_000.0).max(0.0));
            let status = match (last[cell], known[cell].is_empty()) {
                (Some(_), _) => CoverageStatus::Measured,
                (None, false) => CoverageStatus::Uncharted,
                (None, true) => CoverageStatus::Empty,
            };
            CoverageCell {
                cell,
                n_children_known: known[cell].len(),
                n_measured_window: measured[cell].len(),
                last_measurement: last[cell],
                staleness,
                status,
            }
        })
        .collect()
}
