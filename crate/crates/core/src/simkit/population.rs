use std::collections::BTreeMap;

use chrono::Duration;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use super::{stream, SimConfig};
use crate::anthro::{inverse_zscore, lms_zscore, GrowthReference, Indicator, PlausibilityLimits, Sex};
use crate::geostat::GridSpec;
use crate::platform::{Child, Chw, Registry};

/// Youngest and oldest age (days) a child may be enrolled at.
pub const ENROL_AGE_DAYS: (i64, i64) = (183, 1795);

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LatentZ {
    pub haz: f64,
    pub whz: f64,
    pub muacz: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Arm {
    Game,
    Control,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Population {
    pub registry: Registry,
    pub latent: BTreeMap<String, LatentZ>,
    pub arms: BTreeMap<String, Arm>,
}

/// Depth of the planted severity field at projected point `(x, y)`.
pub fn severity_at(cfg: &SimConfig, x: f64, y: f64) -> f64 {
    let cs = cfg.grid.cell_size;
    cfg.bumps
        .iter()
        .map(|b| {
            let dx = x / cs - (b.col + 0.5);
            let dy = y / cs - (b.row + 0.5);
            b.depth * (-(dx * dx + dy * dy) / (2.0 * b.sigma_cells * b.sigma_cells)).exp()
        })
        .sum()
}

/// Severity at every cell centroid.
pub fn severity_field(cfg: &SimConfig) -> Vec<f64> {
    (0..cfg.grid.len())
        .map(|c| {
            let (x, y) = cfg.grid.centroid_xy(c);
            severity_at(cfg, x, y)
        })
        .collect()
}

/// Cells whose centroid lies where some bump is at least half its depth.
pub fn planted_cells(cfg: &SimConfig) -> Vec<usize> {
    (0..cfg.grid.len())
        .filter(|&c| {
            let (x, y) = cfg.grid.centroid_xy(c);
            let cs = cfg.grid.cell_size;
            cfg.bumps.iter().any(|b| {
                let dx = x / cs - (b.col + 0.5);
                let dy = y / cs - (b.row + 0.5);
                (-(dx * dx + dy * dy) / (2.0 * b.sigma_cells * b.sigma_cells)).exp() >= 0.5
            })
        })
        .collect()
}

/// CHW homes on a jittered lattice covering the grid.
fn chw_positions(grid: &GridSpec, n: usize, rng: &mut ChaCha8Rng) -> Vec<(f64, f64)> {
    let w = grid.cols as f64 * grid.cell_size;
    let h = grid.rows as f64 * grid.cell_size;
    let k = (n as f64).sqrt().ceil().max(1.0) as usize;
    let rows = n.div_ceil(k).max(1);
    (0..n)
        .map(|i| {
            let (r, c) = (i / k, i % k);
            let jx: f64 = rng.random_range(-0.25..0.25);
            let jy: f64 = rng.random_range(-0.25..0.25);
            ((c as f64 + 0.5 + jx) * w / k as f64, (r as f64 + 0.5 + jy) * h / rows as f64)
        })
        .collect()
}

fn waz_ok(reference: &GrowthReference, sex: Sex, haz: f64, whz: f64, limits: &PlausibilityLimits, margin: f64) -> bool {
    let (lo, hi) = limits.waz;
    // every age a child can be seen at, recumbent before two, standing after
    (ENROL_AGE_DAYS.0..=1856).step_by(30).all(|age| {
        let a = age as f64;
        let z = reference
            .lookup(Indicator::Hfa, sex, a)
            .and_then(|r| inverse_zscore(haz, &r))
            .and_then(|h| reference.lookup(Indicator::Wfh, sex, h * 10.0))
            .and_then(|r| inverse_zscore(whz, &r))
            .and_then(|w| reference.lookup(Indicator::Wfa, sex, a).and_then(|r| lms_zscore(w, &r)));
        z.is_ok_and(|z| z >= lo + margin && z <= hi - margin)
    })
}

/// Registry plus each child's latent z. Children live uniformly over the
/// grid; their latent z is lowered by the local severity.
pub fn generate_population(cfg: &SimConfig) -> Population {
    generate_population_with(cfg, &GrowthReference::bundled())
}

pub fn generate_population_with(cfg: &SimConfig, reference: &GrowthReference) -> Population {
    let mut rng = stream(cfg.seed, 1);
    let grid = &cfg.grid;

    let homes = chw_positions(grid, cfg.n_chws, &mut rng);
    let n_game = (cfg.agents.game_fraction * cfg.n_chws as f64).round() as usize;
    let mut arms = BTreeMap::new();
    let chws: Vec<Chw> = homes
        .iter()
        .enumerate()
        .map(|(i, &(x, y))| {
            let id = format!("w{:03}", i + 1);
            arms.insert(id.clone(), if i < n_game { Arm::Game } else { Arm::Control });
            Chw {
                handle: format!("chw-{:03}", i + 1),
                home: grid.unproject(x, y),
                team_id: Some(format!("t{}", i % cfg.n_teams.max(1) + 1)),
                opt_out: false,
                id,
            }
        })
        .collect();

    let w = grid.cols as f64 * grid.cell_size;
    let h = grid.rows as f64 * grid.cell_size;
    let lat = cfg.latent;
    let limits = PlausibilityLimits::default();
    let mut latent = BTreeMap::new();
    let mut children = Vec::with_capacity(cfg.n_children);
    for i in 0..cfg.n_children {
        let x = rng.random_range(0.0..w);
        let y = rng.random_range(0.0..h);
        let sex = if rng.random_bool(0.5) { Sex::F } else { Sex::M };
        let age = rng.random_range(ENROL_AGE_DAYS.0..=ENROL_AGE_DAYS.1);
        let s = severity_at(cfg, x, y);
        let e_h: f64 = rng.sample(StandardNormal);
        let e_w: f64 = rng.sample(StandardNormal);
        let e_m: f64 = rng.sample(StandardNormal);
        let clamp = |z: f64| z.clamp(lat.clamp.0, lat.clamp.1);
        let r = lat.muac_whz_corr;
        let mut z = LatentZ {
            haz: clamp(lat.haz_mean - s + lat.sd * e_h),
            whz: clamp(lat.whz_mean - s + lat.sd * e_w),
            muacz: clamp(lat.muacz_mean - s + lat.sd * (r * e_w + (1.0 - r * r).sqrt() * e_m)),
        };
        // keep the implied weight-for-age plausible at every age the child can be seen at
        let mut tries = 0;
        while !waz_ok(reference, sex, z.haz, z.whz, &limits, 0.5) && tries < 60 {
            z.haz *= 0.95;
            z.whz *= 0.95;
            tries += 1;
        }

        let id = format!("c{:05}", i + 1);
        let nearest = homes
            .iter()
            .enumerate()
            .min_by(|(_, a), (_, b)| {
                let da = (a.0 - x).powi(2) + (a.1 - y).powi(2);
                let db = (b.0 - x).powi(2) + (b.1 - y).powi(2);
                da.total_cmp(&db)
            })
            .map(|(k, _)| k)
            .expect("at least one CHW");
        children.push(Child {
            id: id.clone(),
            sex,
            birth_date: cfg.start.date_naive() - Duration::days(age),
            home: grid.unproject(x, y),
            chw_id: chws[nearest].id.clone(),
        });
        latent.insert(id, z);
    }
    let registry = Registry::new(children, chws).expect("generated registry is consistent");
    Population { registry, latent, arms }
}
