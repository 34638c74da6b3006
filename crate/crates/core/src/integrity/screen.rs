use serde::{Deserialize, Serialize};

use super::{AlertKind, AlertSeverity, Evidence};
use crate::anthro::{Indicator, Measurement, PlausibilityLimits, ZValues};
use crate::geostat::{haversine_m, LatLon};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct IntegrityLimits {
    pub plausibility: PlausibilityLimits,
    /// Largest tolerated height decrease between consecutive visits (cm).
    pub max_height_drop_cm: f64,
    /// Largest tolerated weight change rate (kg/day).
    pub max_weight_rate_kg_per_day: f64,
    pub max_home_distance_m: f64,
    /// Chi-square critical value for terminal digits (df = 9, alpha = 0.05).
    pub digit_chi2_critical: f64,
    pub digit_min_values: usize,
    pub duplicate_window_days: f64,
    /// Duplicate groups with at least this many children raise a warning.
    pub duplicate_warn_size: usize,
}

impl Default for IntegrityLimits {
    fn default() -> Self {
        Self {
            plausibility: PlausibilityLimits::default(),
            max_height_drop_cm: 1.0,
            max_weight_rate_kg_per_day: 0.2,
            max_home_distance_m: 2000.0,
            digit_chi2_critical: 16.92,
            digit_min_values: 20,
            duplicate_window_days: 1.0,
            duplicate_warn_size: 3,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Flag {
    pub kind: AlertKind,
    pub severity: AlertSeverity,
    pub evidence: Evidence,
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct Screening {
    pub flags: Vec<Flag>,
}

impl Screening {
    /// Highest severity raised, if any.
    pub fn severity(&self) -> Option<AlertSeverity> {
        self.flags.iter().map(|f| f.severity).max()
    }

    pub fn blocks(&self) -> bool {
        self.severity() == Some(AlertSeverity::Block)
    }

    /// No warn or block flags.
    pub fn is_clean(&self) -> bool {
        self.severity().is_none_or(|s| s < AlertSeverity::Warn)
    }
}

/// Screens one measurement against the child's earlier visits and home location.
///
/// `home` is `None` for an unregistered child, which yields an info flag.
pub fn screen_measurement(
    m: &Measurement,
    history: &[Measurement],
    home: Option<LatLon>,
    z: &ZValues,
    limits: &IntegrityLimits,
) -> Screening {
    let mut flags = Vec::new();

    for indicator in Indicator::ALL {
        let (Some(v), Some((lo, hi))) = (z.get(indicator), limits.plausibility.window(indicator)) else {
            continue;
        };
        if v < lo || v > hi {
            let threshold = if v < lo { lo } else { hi };
            flags.push(Flag {
                kind: AlertKind::ExtremeZ,
                severity: AlertSeverity::Block,
                evidence: Evidence::new(v, threshold, format!("{indicator} z outside [{lo}, {hi}]")),
            });
        }
    }

    let earlier = |has: fn(&Measurement) -> Option<f64>| {
        history
            .iter()
            .filter(|h| h.timestamp < m.timestamp && h.id != m.id && has(h).is_some())
            .max_by_key(|h| h.timestamp)
    };
    if let (Some(h), Some(prev)) = (m.height, earlier(|x| x.height)) {
        let change = h - prev.height.unwrap_or(h);
        if -change > limits.max_height_drop_cm {
            flags.push(Flag {
                kind: AlertKind::Velocity,
                severity: AlertSeverity::Warn,
                evidence: Evidence::new(
                    change,
                    -limits.max_height_drop_cm,
                    format!("height change {change:.1} cm since {}", prev.id),
                ),
            });
        }
    }
    if let (Some(w), Some(prev)) = (m.weight, earlier(|x| x.weight)) {
        let days = ((m.timestamp - prev.timestamp).num_seconds() as f64 / 86_400.0).max(1.0);
        let rate = (w - prev.weight.unwrap_or(w)) / days;
        if rate.abs() > limits.max_weight_rate_kg_per_day {
            flags.push(Flag {
                kind: AlertKind::Velocity,
                severity: AlertSeverity::Warn,
                evidence: Evidence::new(
                    rate,
                    limits.max_weight_rate_kg_per_day,
                    format!("weight change {:.0} g/day since {}", rate * 1000.0, prev.id),
                ),
            });
        }
    }

    match home {
        Some(home) => {
            let d = haversine_m(m.location, home);
            if d > limits.max_home_distance_m {
                flags.push(Flag {
                    kind: AlertKind::LocationMismatch,
                    severity: AlertSeverity::Warn,
                    evidence: Evidence::new(d, limits.max_home_distance_m, "metres from registered home"),
                });
            }
        }
        None => flags.push(Flag {
            kind: AlertKind::UnregisteredChild,
            severity: AlertSeverity::Info,
            evidence: Evidence::new(0.0, 0.0, format!("child {} not in registry", m.child_id)),
        }),
    }

    Screening { flags }
}
