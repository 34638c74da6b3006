//! Published map layers and quest lists, rebuilt by `recompute`.

use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};
use serde_json::Value;

use super::{Env, PlatformError, Store};
use crate::anthro::Indicator;
use crate::game::{generate_quests, Quest};
use crate::geostat::geojson::{coverage_geojson, density_geojson, hotspot_geojson};
use crate::geostat::{coverage_map, kde_density, ChildLocation, CoverageCell, HotspotLayer, LatLon, MeasurementStamp};

/// z below which a child counts toward an indicator's prevalence.
pub const CASE_THRESHOLD: f64 = -2.0;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum LayerKind {
    Gistar,
    Density,
}

impl std::str::FromStr for LayerKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s.to_ascii_lowercase().as_str() {
            "gistar" | "gi" | "gi*" => Ok(LayerKind::Gistar),
            "density" | "kde" => Ok(LayerKind::Density),
            other => Err(format!("unknown layer {other:?}, expected gistar or density")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Layers {
    pub generated_at: Option<DateTime<Utc>>,
    pub coverage: Vec<CoverageCell>,
    pub hotspots: BTreeMap<Indicator, HotspotLayer>,
    pub density: BTreeMap<Indicator, Vec<f64>>,
    pub quests: BTreeMap<String, Vec<Quest>>,
    hotspot_json: BTreeMap<Indicator, Value>,
    density_json: BTreeMap<Indicator, Value>,
    coverage_json: Value,
}

impl Layers {
    /// Nothing computed yet: every layer is an empty collection.
    pub fn empty() -> Self {
        Self {
            generated_at: None,
            coverage: Vec::new(),
            hotspots: BTreeMap::new(),
            density: BTreeMap::new(),
            quests: BTreeMap::new(),
            hotspot_json: BTreeMap::new(),
            density_json: BTreeMap::new(),
            coverage_json: crate::geostat::geojson::feature_collection(vec![]),
        }
    }

    pub fn geojson(&self, indicator: Indicator, kind: LayerKind) -> Value {
        let cache = match kind {
            LayerKind::Gistar => &self.hotspot_json,
            LayerKind::Density => &self.density_json,
        };
        cache.get(&indicator).cloned().unwrap_or_else(|| crate::geostat::geojson::feature_collection(vec![]))
    }

    pub fn coverage_geojson(&self) -> &Value {
        &self.coverage_json
    }
}

/// Latest z per child for one indicator, with the point it is mapped at.
pub fn latest_cases(store: &Store, indicator: Indicator) -> BTreeMap<String, (LatLon, DateTime<Utc>, f64)> {
    let mut latest: BTreeMap<String, (LatLon, DateTime<Utc>, f64)> = BTreeMap::new();
    for s in store.measurements().filter(|s| !s.held) {
        let Some(z) = s.z.as_ref().and_then(|r| r.z.get(indicator)) else { continue };
        let m = &s.measurement;
        let at = store.registry().child(&m.child_id).map_or(m.location, |c| c.home);
        match latest.get(&m.child_id) {
            Some((_, t, _)) if *t > m.timestamp => {}
            _ => {
                latest.insert(m.child_id.clone(), (at, m.timestamp, z));
            }
        }
    }
    latest
}

/// Share of mapped children per cell with z below [`CASE_THRESHOLD`].
pub fn prevalence(store: &Store, env: &Env, indicator: Indicator) -> Vec<Option<f64>> {
    let grid = &env.config.grid;
    let mut cases = vec![0usize; grid.len()];
    let mut seen = vec![0usize; grid.len()];
    for (at, _, z) in latest_cases(store, indicator).into_values() {
        if let Some(c) = grid.cell_of(at) {
            seen[c] += 1;
            if z < CASE_THRESHOLD {
                cases[c] += 1;
            }
        }
    }
    seen.iter().zip(&cases).map(|(&n, &k)| (n > 0).then(|| k as f64 / n as f64)).collect()
}

pub fn compute_layers(store: &Store, env: &Env, now: DateTime<Utc>) -> Result<Layers, PlatformError> {
    let cfg = &env.config;
    let grid = &cfg.grid;
    let children: Vec<ChildLocation> =
        store.registry().children().map(|c| ChildLocation { child_id: c.id.clone(), home: c.home }).collect();
    let stamps: Vec<MeasurementStamp> = store
        .measurements()
        .filter(|s| !s.held)
        .map(|s| MeasurementStamp {
            child_id: s.measurement.child_id.clone(),
            location: s.measurement.location,
            at: s.measurement.timestamp,
        })
        .collect();
    let coverage = coverage_map(&children, &stamps, grid, cfg.coverage_window_days, now);

    let mut layers = Layers::empty();
    layers.generated_at = Some(now);
    for ind in Indicator::ALL {
        let value = prevalence(store, env, ind);
        let layer = HotspotLayer::build(*grid, value, cfg.gistar_radius, cfg.gistar_fdr, now)
            .map_err(|e| PlatformError::Invalid(e.to_string()))?;
        let points: Vec<LatLon> =
            latest_cases(store, ind).into_values().filter(|(_, _, z)| *z < CASE_THRESHOLD).map(|(p, _, _)| p).collect();
        let density =
            kde_density(points, grid, cfg.kde_bandwidth_m).map_err(|e| PlatformError::Invalid(e.to_string()))?;
        layers.hotspot_json.insert(ind, hotspot_geojson(&layer));
        layers.density_json.insert(ind, density_geojson(grid, &density));
        layers.hotspots.insert(ind, layer);
        layers.density.insert(ind, density);
    }
    for w in store.registry().chws() {
        let qs = generate_quests(&coverage, grid, &w.id, w.home, cfg.max_quests, now, &cfg.campaigns, &cfg.reward)
            .map_err(|e| PlatformError::Invalid(e.to_string()))?;
        layers.quests.insert(w.id.clone(), qs);
    }
    layers.coverage_json = coverage_geojson(grid, &coverage);
    layers.coverage = coverage;
    Ok(layers)
}
