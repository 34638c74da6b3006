use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{
    classify, lms_zscore, Classification, CutoffTable, GrowthReference, HeightMode, Indicator, Measurement, Sex,
};

/// Per-indicator z values; `None` when the inputs were absent or outside the reference.
#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct ZValues {
    pub waz: Option<f64>,
    pub haz: Option<f64>,
    pub whz: Option<f64>,
    pub muacz: Option<f64>,
}

impl ZValues {
    pub fn get(&self, indicator: Indicator) -> Option<f64> {
        match indicator {
            Indicator::Wfa => self.waz,
            Indicator::Hfa => self.haz,
            Indicator::Wfh => self.whz,
            Indicator::Muacfa => self.muacz,
        }
    }

    fn slot(&mut self, indicator: Indicator) -> &mut Option<f64> {
        match indicator {
            Indicator::Wfa => &mut self.waz,
            Indicator::Hfa => &mut self.haz,
            Indicator::Wfh => &mut self.whz,
            Indicator::Muacfa => &mut self.muacz,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(tag = "flag", content = "indicator", rename_all = "snake_case")]
pub enum ZFlag {
    /// Input present but the key (age or length) is outside the reference.
    OutsideReference(Indicator),
    /// z beyond the plausibility limits; the value is still reported.
    Implausible(Indicator),
    /// Measurement predates the birth date.
    NegativeAge,
}

/// Plausibility window per indicator, `(low, high)`; values outside are flagged.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlausibilityLimits {
    pub waz: (f64, f64),
    pub haz: (f64, f64),
    pub whz: (f64, f64),
    pub muacz: Option<(f64, f64)>,
}

impl Default for PlausibilityLimits {
    fn default() -> Self {
        Self { waz: (-6.0, 5.0), haz: (-6.0, 6.0), whz: (-5.0, 5.0), muacz: None }
    }
}

impl PlausibilityLimits {
    pub fn window(&self, indicator: Indicator) -> Option<(f64, f64)> {
        match indicator {
            Indicator::Wfa => Some(self.waz),
            Indicator::Hfa => Some(self.haz),
            Indicator::Wfh => Some(self.whz),
            Indicator::Muacfa => self.muacz,
        }
    }

    pub fn is_implausible(&self, indicator: Indicator, z: f64) -> bool {
        self.window(indicator).is_some_and(|(lo, hi)| z < lo || z > hi)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct AssessSettings {
    /// Children younger than this (days) are expected to be measured lying down.
    pub recumbent_below_days: i64,
    /// Length/height offset applied when the measuring position does not
    /// match the age: +offset for standing under-twos, -offset for recumbent
    /// older children.
    pub position_offset_cm: f64,
    pub limits: PlausibilityLimits,
}

impl Default for AssessSettings {
    fn default() -> Self {
        Self { recumbent_below_days: 731, position_offset_cm: 0.7, limits: PlausibilityLimits::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ChildProfile {
    pub sex: Sex,
    pub birth_date: NaiveDate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ZScoreResult {
    pub z: ZValues,
    pub flags: BTreeSet<ZFlag>,
    pub classification: Classification,
}

impl AssessSettings {
    /// Length/height adjusted to the position the reference expects at this age.
    pub fn adjusted_height(&self, height: f64, mode: HeightMode, age_days: i64) -> f64 {
        let expects_recumbent = age_days < self.recumbent_below_days;
        match (mode, expects_recumbent) {
            (HeightMode::Standing, true) => height + self.position_offset_cm,
            (HeightMode::Recumbent, false) => height - self.position_offset_cm,
            _ => height,
        }
    }
}

/// Computes every z-score the measurement supports, flags and classification.
pub fn assess(
    m: &Measurement,
    child: &ChildProfile,
    reference: &GrowthReference,
    cutoffs: &CutoffTable,
    settings: &AssessSettings,
) -> ZScoreResult {
    let age_days = (m.timestamp.date_naive() - child.birth_date).num_days();
    let mut z = ZValues::default();
    let mut flags = BTreeSet::new();
    let height = m.height.map(|h| settings.adjusted_height(h, m.height_mode, age_days.max(0)));

    let mut compute = |indicator: Indicator, x: Option<f64>, key: f64| {
        let Some(x) = x else { return };
        match reference.lookup(indicator, child.sex, key).and_then(|row| lms_zscore(x, &row)) {
            Ok(v) => {
                if settings.limits.is_implausible(indicator, v) {
                    flags.insert(ZFlag::Implausible(indicator));
                }
                *z.slot(indicator) = Some(v);
            }
            Err(_) => {
                flags.insert(ZFlag::OutsideReference(indicator));
            }
        }
    };

    if age_days >= 0 {
        let age = age_days as f64;
        compute(Indicator::Wfa, m.weight, age);
        compute(Indicator::Hfa, height, age);
        compute(Indicator::Muacfa, m.muac, age);
    }
    if let (Some(w), Some(h)) = (m.weight, height) {
        compute(Indicator::Wfh, Some(w), h * 10.0);
    }

    if age_days < 0 {
        flags.insert(ZFlag::NegativeAge);
    }
    let classification = classify(&z, m.muac, cutoffs);
    ZScoreResult { z, flags, classification }
}
