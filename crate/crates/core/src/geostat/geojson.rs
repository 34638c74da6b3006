//! GeoJSON FeatureCollections with one polygon feature per grid cell.

use serde_json::{json, Map, Value};

use super::{CoverageCell, CoverageStatus, GridSpec, HotspotLayer};

fn num(v: Option<f64>) -> Value {
    v.and_then(|x| serde_json::Number::from_f64(x).map(Value::Number)).unwrap_or(Value::Null)
}

/// A feature for `cell` carrying `properties` plus its index and row/col.
pub fn cell_feature(spec: &GridSpec, cell: usize, mut properties: Map<String, Value>) -> Value {
    let (row, col) = spec.row_col(cell);
    properties.insert("cell".into(), json!(cell));
    properties.insert("row".into(), json!(row));
    properties.insert("col".into(), json!(col));
    json!({
        "type": "Feature",
        "geometry": { "type": "Polygon", "coordinates": [spec.ring(cell)] },
        "properties": properties,
    })
}

pub fn feature_collection(features: Vec<Value>) -> Value {
    json!({ "type": "FeatureCollection", "features": features })
}

/// Cells without a value are omitted.
pub fn hotspot_geojson(layer: &HotspotLayer) -> Value {
    let features = (0..layer.spec.len())
        .filter(|&c| layer.value[c].is_some())
        .map(|c| {
            let mut p = Map::new();
            p.insert("value".into(), num(layer.value[c]));
            p.insert("gi_star".into(), num(layer.gi_star[c]));
            p.insert("p_value".into(), num(layer.p_value[c]));
            p.insert("class".into(), layer.class[c].map(|k| json!(k.as_str())).unwrap_or(Value::Null));
            p.insert("staleness".into(), Value::Null);
            cell_feature(&layer.spec, c, p)
        })
        .collect();
    let mut fc = feature_collection(features);
    fc["generated_at"] = json!(layer.generated_at);
    fc
}

/// Density layer; cells with zero density are omitted.
pub fn density_geojson(spec: &GridSpec, density: &[f64]) -> Value {
    let features = density
        .iter()
        .enumerate()
        .filter(|(_, d)| **d > 0.0)
        .map(|(c, d)| {
            let mut p = Map::new();
            p.insert("value".into(), num(Some(*d)));
            p.insert("gi_star".into(), Value::Null);
            p.insert("p_value".into(), Value::Null);
            p.insert("class".into(), Value::Null);
            p.insert("staleness".into(), Value::Null);
            cell_feature(spec, c, p)
        })
        .collect();
    feature_collection(features)
}

/// Coverage layer; empty cells are omitted.
pub fn coverage_geojson(spec: &GridSpec, cells: &[CoverageCell]) -> Value {
    let features = cells
        .iter()
        .filter(|c| c.status != CoverageStatus::Empty)
        .map(|c| {
            let mut p = Map::new();
            p.insert("value".into(), json!(c.n_measured_window));
            p.insert("gi_star".into(), Value::Null);
            p.insert("p_value".into(), Value::Null);
            p.insert("class".into(), json!(c.status));
            p.insert("staleness".into(), num(c.staleness));
            p.insert("n_children_known".into(), json!(c.n_children_known));
            p.insert("n_measured_window".into(), json!(c.n_measured_window));
            p.insert("last_measurement".into(), json!(c.last_measurement));
            cell_feature(spec, c.cell, p)
        })
        .collect();
    feature_collection(features)
}
