//! Flat delimited-text rows for registry and measurement files.

use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::{Child, Chw};
use crate::anthro::{HeightMode, Measurement, Sex};
use crate::geostat::LatLon;

/// `child_id,sex,birth_date,home_lat,home_lon,chw_id`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChildRow {
    pub child_id: String,
    pub sex: Sex,
    pub birth_date: NaiveDate,
    pub home_lat: f64,
    pub home_lon: f64,
    pub chw_id: String,
}

impl From<ChildRow> for Child {
    fn from(r: ChildRow) -> Self {
        Child {
            id: r.child_id,
            sex: r.sex,
            birth_date: r.birth_date,
            home: LatLon::new(r.home_lat, r.home_lon),
            chw_id: r.chw_id,
        }
    }
}

impl From<&Child> for ChildRow {
    fn from(c: &Child) -> Self {
        ChildRow {
            child_id: c.id.clone(),
            sex: c.sex,
            birth_date: c.birth_date,
            home_lat: c.home.lat,
            home_lon: c.home.lon,
            chw_id: c.chw_id.clone(),
        }
    }
}

/// `chw_id,handle,home_lat,home_lon,team_id,opt_out`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChwRow {
    pub chw_id: String,
    pub handle: String,
    pub home_lat: f64,
    pub home_lon: f64,
    pub team_id: Option<String>,
    #[serde(default)]
    pub opt_out: bool,
}

impl From<ChwRow> for Chw {
    fn from(r: ChwRow) -> Self {
        Chw {
            id: r.chw_id,
            handle: r.handle,
            home: LatLon::new(r.home_lat, r.home_lon),
            team_id: r.team_id.filter(|t| !t.is_empty()),
            opt_out: r.opt_out,
        }
    }
}

impl From<&Chw> for ChwRow {
    fn from(w: &Chw) -> Self {
        ChwRow {
            chw_id: w.id.clone(),
            handle: w.handle.clone(),
            home_lat: w.home.lat,
            home_lon: w.home.lon,
            team_id: w.team_id.clone(),
            opt_out: w.opt_out,
        }
    }
}

/// `id,child_id,chw_id,timestamp,lat,lon,weight,height,height_mode,muac,entry_duration`
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeasurementRow {
    pub id: String,
    pub child_id: String,
    pub chw_id: String,
    pub timestamp: DateTime<Utc>,
    pub lat: f64,
    pub lon: f64,
    pub weight: Option<f64>,
    pub height: Option<f64>,
    #[serde(default)]
    pub height_mode: HeightMode,
    pub muac: Option<f64>,
    #[serde(default)]
    pub entry_duration: f64,
}

impl From<MeasurementRow> for Measurement {
    fn from(r: MeasurementRow) -> Self {
        Measurement {
            id: r.id,
            child_id: r.child_id,
            chw_id: r.chw_id,
            timestamp: r.timestamp,
            location: LatLon::new(r.lat, r.lon),
            weight: r.weight,
            height: r.height,
            height_mode: r.height_mode,
            muac: r.muac,
            entry_duration: r.entry_duration,
        }
    }
}

impl From<&Measurement> for MeasurementRow {
    fn from(m: &Measurement) -> Self {
        MeasurementRow {
            id: m.id.clone(),
            child_id: m.child_id.clone(),
            chw_id: m.chw_id.clone(),
            timestamp: m.timestamp,
            lat: m.location.lat,
            lon: m.location.lon,
            weight: m.weight,
            height: m.height,
            height_mode: m.height_mode,
            muac: m.muac,
            entry_duration: m.entry_duration,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::io::{read_csv, write_csv};

    #[test]
    fn measurement_rows_round_trip() {
        let text = "id,child_id,chw_id,timestamp,lat,lon,weight,height,height_mode,muac,entry_duration\n\
                    m1,c1,w1,2024-03-01T09:30:00Z,18.51,73.81,9.4,,recumbent,131,75\n";
        let rows: Vec<MeasurementRow> = read_csv(text.as_bytes()).unwrap();
        let m: Measurement = rows[0].clone().into();
        assert_eq!(m.height, None);
        assert_eq!(m.height_mode, HeightMode::Recumbent);
        let mut out = Vec::new();
        write_csv(&mut out, &[MeasurementRow::from(&m)]).unwrap();
        assert_eq!(String::from_utf8(out).unwrap(), text.replace("131,75", "131.0,75.0"));
    }

    #[test]
    fn bad_field_reports_column() {
        let text = "child_id,sex,birth_date,home_lat,home_lon,chw_id\nc1,X,2022-01-01,18.5,73.8,w1\n";
        let e = read_csv::<ChildRow, _>(text.as_bytes()).unwrap_err();
        assert_eq!((e.line, e.column), (2, 2));
    }
}
