use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{AnthroError, ZValues};
use crate::io::ParseError;

const DEFAULT_CUTOFFS: &str = include_str!("../../data/cutoffs_default.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Severity {
    None,
    Moderate,
    Severe,
}

/// MUAC tape colour band, ordered from healthiest.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum MuacBand {
    Green,
    Yellow,
    Red,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Axis {
    Stunting,
    Wasting,
    Underweight,
    Muac,
}

impl fmt::Display for Severity {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Severity::None => "none",
            Severity::Moderate => "moderate",
            Severity::Severe => "severe",
        })
    }
}

impl fmt::Display for MuacBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            MuacBand::Green => "green",
            MuacBand::Yellow => "yellow",
            MuacBand::Red => "red",
        })
    }
}

impl fmt::Display for Axis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Axis::Stunting => "stunting",
            Axis::Wasting => "wasting",
            Axis::Underweight => "underweight",
            Axis::Muac => "muac",
        })
    }
}

impl FromStr for Axis {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "stunting" => Ok(Axis::Stunting),
            "wasting" => Ok(Axis::Wasting),
            "underweight" => Ok(Axis::Underweight),
            "muac" => Ok(Axis::Muac),
            other => Err(format!("unknown axis `{other}`")),
        }
    }
}

/// Malnutrition classification. `None` fields mean the axis could not be
/// classified because its input was absent; they never default to healthy.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct Classification {
    pub stunting: Option<Severity>,
    pub wasting: Option<Severity>,
    pub underweight: Option<Severity>,
    pub muac_band: Option<MuacBand>,
}

/// One `axis,threshold,label` row: values strictly below `threshold` earn `label`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Cutoff {
    pub axis: Axis,
    pub threshold: f64,
    pub label: String,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CutoffTable {
    rows: Vec<Cutoff>,
}

impl Default for CutoffTable {
    fn default() -> Self {
        Self::from_csv(DEFAULT_CUTOFFS.as_bytes()).expect("bundled cutoffs are valid")
    }
}

impl CutoffTable {
    pub fn new(rows: Vec<Cutoff>) -> Result<Self, AnthroError> {
        for row in &rows {
            let ok = match row.axis {
                Axis::Muac => row.label.parse::<MuacBand>().is_ok(),
                _ => row.label.parse::<Severity>().is_ok(),
            };
            if !ok || !row.threshold.is_finite() {
                return Err(AnthroError::InvalidCutoffs(format!(
                    "label `{}` / threshold {} not valid for axis {}",
                    row.label, row.threshold, row.axis
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn from_csv<R: Read>(reader: R) -> Result<Self, ParseError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).from_reader(reader);
        let mut rows = Vec::new();
        for (i, rec) in rdr.records().enumerate() {
            let rec = rec.map_err(ParseError::from_csv)?;
            let line = i as u64 + 2;
            let field = |idx: usize| rec.get(idx).unwrap_or("");
            let axis = field(0).parse::<Axis>().map_err(|m| ParseError { line, column: 1, message: m })?;
            let threshold =
                field(1).parse::<f64>().map_err(|e| ParseError { line, column: 2, message: e.to_string() })?;
            rows.push(Cutoff { axis, threshold, label: field(2).to_string() });
        }
        Self::new(rows).map_err(|e| ParseError { line: 0, column: 0, message: e.to_string() })
    }

    pub fn rows(&self) -> &[Cutoff] {
        &self.rows
    }

    fn severity(&self, axis: Axis, z: f64) -> Severity {
        self.rows
            .iter()
            .filter(|c| c.axis == axis && z < c.threshold)
            .filter_map(|c| c.label.parse::<Severity>().ok())
            .max()
            .unwrap_or(Severity::None)
    }

    fn band(&self, muac: f64) -> MuacBand {
        self.rows
            .iter()
            .filter(|c| c.axis == Axis::Muac && muac < c.threshold)
            .filter_map(|c| c.label.parse::<MuacBand>().ok())
            .max()
            .unwrap_or(MuacBand::Green)
    }
}

impl FromStr for Severity {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "none" => Ok(Severity::None),
            "moderate" => Ok(Severity::Moderate),
            "severe" => Ok(Severity::Severe),
            other => Err(format!("unknown severity `{other}`")),
        }
    }
}

impl FromStr for MuacBand {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "green" => Ok(MuacBand::Green),
            "yellow" => Ok(MuacBand::Yellow),
            "red" => Ok(MuacBand::Red),
            other => Err(format!("unknown MUAC band `{other}`")),
        }
    }
}

/// Classifies each axis against the cutoff table: HAZ for stunting, WHZ for
/// wasting, WAZ for underweight and raw MUAC (mm) for the tape band.
pub fn classify(z: &ZValues, muac_mm: Option<f64>, cutoffs: &CutoffTable) -> Classification {
    Classification {
        stunting: z.haz.map(|v| cutoffs.severity(Axis::Stunting, v)),
        wasting: z.whz.map(|v| cutoffs.severity(Axis::Wasting, v)),
        underweight: z.waz.map(|v| cutoffs.severity(Axis::Underweight, v)),
        muac_band: muac_mm.map(|m| cutoffs.band(m)),
    }
}
