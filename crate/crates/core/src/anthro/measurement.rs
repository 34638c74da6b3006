use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geostat::LatLon;

/// Stadiometer (standing) or infantometer (recumbent) reading.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum HeightMode {
    #[default]
    Standing,
    Recumbent,
}

/// A geotagged anthropometric record submitted by a CHW.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Measurement {
    /// Client-generated, globally unique.
    pub id: String,
    pub child_id: String,
    pub chw_id: String,
    pub timestamp: DateTime<Utc>,
    pub location: LatLon,
    /// kg
    #[serde(default)]
    pub weight: Option<f64>,
    /// cm
    #[serde(default)]
    pub height: Option<f64>,
    #[serde(default)]
    pub height_mode: HeightMode,
    /// mm
    #[serde(default)]
    pub muac: Option<f64>,
    /// Seconds from opening the form to submitting it.
    #[serde(default)]
    pub entry_duration: f64,
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ValidationError {
    #[error("measurement id is empty")]
    EmptyId,
    #[error("no weight, height or MUAC present")]
    NoValues,
    #[error("weight {0} kg outside (0, 40]")]
    Weight(f64),
    #[error("height {0} cm outside (30, 140]")]
    Height(f64),
    #[error("MUAC {0} mm outside (60, 250]")]
    Muac(f64),
    #[error("location ({0}, {1}) outside valid latitude/longitude")]
    Location(f64, f64),
    #[error("entry duration {0} s must be non-negative")]
    Duration(f64),
}

fn within(v: f64, lo: f64, hi: f64) -> bool {
    v.is_finite() && v > lo && v <= hi
}

impl Measurement {
    pub fn validate(&self) -> Result<(), ValidationError> {
        if self.id.trim().is_empty() {
            return Err(ValidationError::EmptyId);
        }
        if self.weight.is_none() && self.height.is_none() && self.muac.is_none() {
            return Err(ValidationError::NoValues);
        }
        if let Some(w) = self.weight.filter(|&w| !within(w, 0.0, 40.0)) {
            return Err(ValidationError::Weight(w));
        }
        if let Some(h) = self.height.filter(|&h| !within(h, 30.0, 140.0)) {
            return Err(ValidationError::Height(h));
        }
        if let Some(m) = self.muac.filter(|&m| !within(m, 60.0, 250.0)) {
            return Err(ValidationError::Muac(m));
        }
        let LatLon { lat, lon } = self.location;
        if !(lat.is_finite() && lon.is_finite() && (-90.0..=90.0).contains(&lat) && (-180.0..=180.0).contains(&lon)) {
            return Err(ValidationError::Location(lat, lon));
        }
        if !(self.entry_duration.is_finite() && self.entry_duration >= 0.0) {
            return Err(ValidationError::Duration(self.entry_duration));
        }
        Ok(())
    }

    /// The (weight, height, MUAC) tuple as raw bits, for exact-copy detection.
    pub fn value_key(&self) -> (Option<u64>, Option<u64>, Option<u64>) {
        (self.weight.map(f64::to_bits), self.height.map(f64::to_bits), self.muac.map(f64::to_bits))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn base() -> Measurement {
        Measurement {
            id: "m1".into(),
            child_id: "c1".into(),
            chw_id: "w1".into(),
            timestamp: "2024-03-01T10:00:00Z".parse().unwrap(),
            location: LatLon::new(21.1, 79.0),
            weight: Some(10.0),
            height: Some(80.0),
            height_mode: HeightMode::Standing,
            muac: Some(140.0),
            entry_duration: 60.0,
        }
    }

    #[test]
    fn accepts_valid() {
        assert_eq!(base().validate(), Ok(()));
    }

    #[test]
    fn range_edges() {
        let mut m = base();
        m.weight = Some(40.0);
        assert!(m.validate().is_ok());
        m.weight = Some(40.01);
        assert_eq!(m.validate(), Err(ValidationError::Weight(40.01)));
        m.weight = Some(0.0);
        assert!(m.validate().is_err());
        let mut m = base();
        m.height = Some(30.0);
        assert!(matches!(m.validate(), Err(ValidationError::Height(_))));
        let mut m = base();
        m.muac = Some(60.0);
        assert!(matches!(m.validate(), Err(ValidationError::Muac(_))));
        let mut m = base();
        m.location = LatLon::new(91.0, 0.0);
        assert!(matches!(m.validate(), Err(ValidationError::Location(..))));
    }

    #[test]
    fn requires_a_value() {
        let mut m = base();
        m.weight = None;
        m.height = None;
        m.muac = None;
        assert_eq!(m.validate(), Err(ValidationError::NoValues));
        m.muac = Some(130.0);
        assert!(m.validate().is_ok());
    }
}
