use std::collections::BTreeMap;
use std::fmt;
use std::io::Read;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::AnthroError;

const BUNDLED_REFERENCE: &str = include_str!("../../data/reference_synthetic.csv");

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum Indicator {
    /// Weight-for-age.
    Wfa,
    /// Height/length-for-age.
    Hfa,
    /// Weight-for-height, keyed by length in mm.
    Wfh,
    /// MUAC-for-age.
    Muacfa,
}

impl Indicator {
    pub const ALL: [Indicator; 4] = [Indicator::Wfa, Indicator::Hfa, Indicator::Wfh, Indicator::Muacfa];

    /// Weight-based indicators get the restricted adjustment beyond |z| > 3.
    pub fn is_restricted(self) -> bool {
        matches!(self, Indicator::Wfa | Indicator::Wfh)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Indicator::Wfa => "WFA",
            Indicator::Hfa => "HFA",
            Indicator::Wfh => "WFH",
            Indicator::Muacfa => "MUACFA",
        }
    }
}

impl fmt::Display for Indicator {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Indicator {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "WFA" => Ok(Indicator::Wfa),
            "HFA" | "LHFA" | "LFA" => Ok(Indicator::Hfa),
            "WFH" | "WFL" => Ok(Indicator::Wfh),
            "MUACFA" | "ACFA" => Ok(Indicator::Muacfa),
            other => Err(format!("unknown indicator `{other}`")),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Sex {
    F,
    M,
}

impl fmt::Display for Sex {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Sex::F => "F",
            Sex::M => "M",
        })
    }
}

impl FromStr for Sex {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "F" | "f" | "2" => Ok(Sex::F),
            "M" | "m" | "1" => Ok(Sex::M),
            other => Err(format!("unknown sex `{other}`")),
        }
    }
}

/// One knot of an LMS growth table.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GrowthReferenceRow {
    pub indicator: Indicator,
    pub sex: Sex,
    /// Age in days, or length in mm for [`Indicator::Wfh`].
    pub key: f64,
    pub l: f64,
    pub m: f64,
    pub s: f64,
}

impl GrowthReferenceRow {
    pub fn new(indicator: Indicator, sex: Sex, key: f64, l: f64, m: f64, s: f64) -> Self {
        Self { indicator, sex, key, l, m, s }
    }

    pub fn check(&self) -> Result<(), AnthroError> {
        if !(self.m > 0.0 && self.m.is_finite()) {
            return Err(AnthroError::InvalidTable(format!("M must be positive, got {}", self.m)));
        }
        if !(self.s > 0.0 && self.s.is_finite()) {
            return Err(AnthroError::InvalidTable(format!("S must be positive, got {}", self.s)));
        }
        if !self.l.is_finite() || !self.key.is_finite() {
            return Err(AnthroError::InvalidTable("L and key must be finite".into()));
        }
        Ok(())
    }
}

/// Linear interpolation of L, M and S between the two knots bracketing `key`.
///
/// `table` must be ordered by key. An exact knot is returned verbatim.
pub fn interpolate_reference(table: &[GrowthReferenceRow], key: f64) -> Result<GrowthReferenceRow, AnthroError> {
    let gap = || match table.first() {
        Some(r) => AnthroError::ReferenceGap { indicator: r.indicator, sex: r.sex, key },
        None => AnthroError::Domain("empty reference table".into()),
    };
    let (first, last) = match (table.first(), table.last()) {
        (Some(f), Some(l)) => (f, l),
        _ => return Err(gap()),
    };
    if !key.is_finite() || key < first.key || key > last.key {
        return Err(gap());
    }
    // index of the first knot with knot.key >= key
    let idx = table.partition_point(|r| r.key < key);
    let upper = &table[idx];
    if upper.key == key {
        return Ok(*upper);
    }
    let lower = &table[idx - 1];
    let t = (key - lower.key) / (upper.key - lower.key);
    let lerp = |a: f64, b: f64| a + t * (b - a);
    Ok(GrowthReferenceRow {
        indicator: lower.indicator,
        sex: lower.sex,
        key,
        l: lerp(lower.l, upper.l),
        m: lerp(lower.m, upper.m),
        s: lerp(lower.s, upper.s),
    })
}

/// Growth-reference tables keyed by (indicator, sex).
#[derive(Debug, Clone, Default)]
pub struct GrowthReference {
    tables: BTreeMap<(Indicator, Sex), Vec<GrowthReferenceRow>>,
}

#[derive(Debug, Deserialize)]
struct CsvRow {
    indicator: String,
    sex: String,
    key: f64,
    #[serde(rename = "L")]
    l: f64,
    #[serde(rename = "M")]
    m: f64,
    #[serde(rename = "S")]
    s: f64,
}

impl GrowthReference {
    /// The small synthetic reference shipped with the crate. Its shape follows
    /// the usual under-five curves but it is not the WHO standard; load a real
    /// export with [`GrowthReference::from_csv`] for field use.
    pub fn bundled() -> Self {
        Self::from_csv(BUNDLED_REFERENCE.as_bytes()).expect("bundled reference table is valid")
    }

    /// Reads `indicator,sex,key,L,M,S` delimited text. Extra columns are ignored.
    pub fn from_csv<R: Read>(reader: R) -> Result<Self, crate::io::ParseError> {
        let mut rdr = csv::ReaderBuilder::new().trim(csv::Trim::All).flexible(true).from_reader(reader);
        let mut rows = Vec::new();
        for rec in rdr.deserialize::<CsvRow>() {
            let rec = rec.map_err(crate::io::ParseError::from_csv)?;
            let line = rows.len() as u64 + 2;
            let bad = |msg: String| crate::io::ParseError { line, column: 0, message: msg };
            let indicator = rec.indicator.parse::<Indicator>().map_err(bad)?;
            let sex = rec.sex.parse::<Sex>().map_err(bad)?;
            rows.push(GrowthReferenceRow::new(indicator, sex, rec.key, rec.l, rec.m, rec.s));
        }
        Self::from_rows(rows).map_err(|e| crate::io::ParseError { line: 0, column: 0, message: e.to_string() })
    }

    /// Builds the reference from loose rows; rows are sorted per table and
    /// duplicated keys are rejected.
    pub fn from_rows(rows: impl IntoIterator<Item = GrowthReferenceRow>) -> Result<Self, AnthroError> {
        let mut tables: BTreeMap<(Indicator, Sex), Vec<GrowthReferenceRow>> = BTreeMap::new();
        for row in rows {
            row.check()?;
            tables.entry((row.indicator, row.sex)).or_default().push(row);
        }
        for ((ind, sex), rows) in tables.iter_mut() {
            rows.sort_by(|a, b| a.key.total_cmp(&b.key));
            if let Some(w) = rows.windows(2).find(|w| w[0].key == w[1].key) {
                return Err(AnthroError::InvalidTable(format!("duplicate key {} in {ind}/{sex}", w[0].key)));
            }
        }
        Ok(Self { tables })
    }

    pub fn table(&self, indicator: Indicator, sex: Sex) -> Option<&[GrowthReferenceRow]> {
        self.tables.get(&(indicator, sex)).map(Vec::as_slice)
    }

    /// Key range `[min, max]` covered for an indicator and sex.
    pub fn key_range(&self, indicator: Indicator, sex: Sex) -> Option<(f64, f64)> {
        let t = self.table(indicator, sex)?;
        Some((t.first()?.key, t.last()?.key))
    }

    pub fn lookup(&self, indicator: Indicator, sex: Sex, key: f64) -> Result<GrowthReferenceRow, AnthroError> {
        let table = self.table(indicator, sex).ok_or(AnthroError::ReferenceGap { indicator, sex, key })?;
        interpolate_reference(table, key)
    }

    pub fn rows(&self) -> impl Iterator<Item = &GrowthReferenceRow> {
        self.tables.values().flatten()
    }
}
