use std::collections::{BTreeMap, BTreeSet};

use chrono::{DateTime, Duration, Utc};
use rand::seq::SliceRandom;
use rand::Rng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, LogNormal, StandardNormal};
use serde::{Deserialize, Serialize};

use super::{stream, Arm, LatentZ, Population, SimConfig};
use crate::anthro::{
    inverse_zscore, lms_zscore, GrowthReference, GrowthReferenceRow, HeightMode, Indicator, Measurement,
    PlausibilityLimits, Sex,
};
use crate::platform::Child;

/// Oldest age (days) covered by the bundled reference.
pub const MAX_AGE_DAYS: i64 = 1856;

/// Which planted records should be caught, and by which rule.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct FraudTruth {
    pub digit_chws: Vec<String>,
    /// Measurement ids per planted group, anchor first.
    pub duplicate_groups: Vec<Vec<String>>,
    pub height_drops: Vec<String>,
    pub extreme_z: Vec<String>,
}

impl FraudTruth {
    /// Every measurement id touched by the plan, except digit stuffing.
    pub fn measurement_ids(&self) -> BTreeSet<String> {
        self.duplicate_groups.iter().flatten().chain(&self.height_drops).chain(&self.extreme_z).cloned().collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    /// Time-ordered, ties by id.
    pub measurements: Vec<Measurement>,
    pub truth: FraudTruth,
}

// Instrument resolution as a rational step num/den.
#[derive(Clone, Copy)]
struct Step(f64, f64);

const KG_01: Step = Step(1.0, 10.0);
const CM_01: Step = Step(1.0, 10.0);
const MM_1: Step = Step(1.0, 1.0);
const HALF: Step = Step(1.0, 2.0);
const MM_5: Step = Step(5.0, 1.0);

impl Step {
    fn units(self, v: f64) -> f64 {
        (v * self.1 / self.0).round()
    }

    fn value(self, k: f64) -> f64 {
        k * self.0 / self.1
    }

    fn round(self, v: f64) -> f64 {
        self.value(self.units(v))
    }

    /// Rounds, then moves one step inward if rounding pushed z out of `[lo, hi]`.
    fn round_within(self, v: f64, row: &GrowthReferenceRow, lo: f64, hi: f64) -> f64 {
        let k = self.units(v);
        let z = lms_zscore(self.value(k), row).unwrap_or(0.0);
        if z < lo {
            self.value(k + 1.0)
        } else if z > hi {
            self.value(k - 1.0)
        } else {
            self.value(k)
        }
    }
}

struct Observed {
    height: f64,
    mode: HeightMode,
    weight: f64,
    muac: f64,
}

fn observe(
    reference: &GrowthReference,
    sex: Sex,
    age_days: i64,
    z: LatentZ,
    rounding: bool,
    clamp: (f64, f64),
) -> Option<Observed> {
    let age = age_days as f64;
    let (lo, hi) = clamp;
    let mode = if age_days < 731 { HeightMode::Recumbent } else { HeightMode::Standing };
    let hrow = reference.lookup(Indicator::Hfa, sex, age).ok()?;
    let mut height = inverse_zscore(z.haz, &hrow).ok()?;
    if rounding {
        height = CM_01.round_within(height, &hrow, lo, hi);
    }
    let wrow = reference.lookup(Indicator::Wfh, sex, height * 10.0).ok()?;
    let mut weight = inverse_zscore(z.whz, &wrow).ok()?;
    if rounding {
        weight = KG_01.round_within(weight, &wrow, lo, hi);
    }
    let mrow = reference.lookup(Indicator::Muacfa, sex, age).ok()?;
    let mut muac = inverse_zscore(z.muacz, &mrow).ok()?;
    if rounding {
        muac = MM_1.round_within(muac, &mrow, lo, hi);
    }
    let waz = lms_zscore(weight, &reference.lookup(Indicator::Wfa, sex, age).ok()?).ok()?;
    let (alo, ahi) = PlausibilityLimits::default().waz;
    let valid = (30.0..=140.0).contains(&height) && weight > 0.0 && weight <= 40.0 && muac > 60.0 && muac <= 250.0;
    (valid && waz >= alo && waz <= ahi).then_some(Observed { height, mode, weight, muac })
}

fn jitter(child: &Child, cfg: &SimConfig, rng: &mut ChaCha8Rng) -> crate::geostat::LatLon {
    let (x, y) = cfg.grid.project(child.home);
    let dx: f64 = rng.sample(StandardNormal);
    let dy: f64 = rng.sample(StandardNormal);
    cfg.grid.unproject(x + dx * cfg.noise.gps_m, y + dy * cfg.noise.gps_m)
}

fn entry_seconds(mean: f64, cv: f64, rng: &mut ChaCha8Rng) -> f64 {
    if mean <= 0.0 {
        return 0.0;
    }
    if cv <= 0.0 {
        return mean;
    }
    let s2 = (1.0 + cv * cv).ln();
    let d = LogNormal::new(mean.ln() - s2 / 2.0, s2.sqrt()).expect("finite parameters");
    (d.sample(rng) * 10.0).round() / 10.0
}

/// Visits over `days` days from `cfg.start`, one every visit interval per
/// child while the child is within the reference age range, followed by the
/// fraud plan. Uses the bundled reference.
pub fn simulate_measurements(cfg: &SimConfig, population: &Population, days: u32) -> Simulation {
    simulate_measurements_with(cfg, population, days, &GrowthReference::bundled())
}

pub fn simulate_measurements_with(
    cfg: &SimConfig,
    population: &Population,
    days: u32,
    reference: &GrowthReference,
) -> Simulation {
    let mut rng = stream(cfg.seed, 2);
    let a = cfg.agents;
    let n = cfg.noise;
    let clamp = cfg.latent.clamp;
    let mut raw: Vec<Measurement> = Vec::new();
    for child in population.registry.children() {
        let latent = population.latent[&child.id];
        let arm = population.arms.get(&child.chw_id).copied().unwrap_or(Arm::Control);
        let (p_visit, secs) = match arm {
            Arm::Game => (a.visit_prob_game, a.entry_seconds_game),
            Arm::Control => (a.visit_prob_control, a.entry_seconds_control),
        };
        let mut day = rng.random_range(0..a.visit_interval_days);
        while day < days {
            let visit_day = day;
            day += a.visit_interval_days;
            let noise: [f64; 3] = [rng.sample(StandardNormal), rng.sample(StandardNormal), rng.sample(StandardNormal)];
            let seconds: i64 = rng.random_range(8 * 3600..17 * 3600);
            let visited = rng.random_bool(p_visit);
            let location = jitter(child, cfg, &mut rng);
            let duration = entry_seconds(secs, a.entry_cv, &mut rng);
            if !visited {
                continue;
            }
            let ts = cfg.start + Duration::days(visit_day as i64) + Duration::seconds(seconds);
            let age = (ts.date_naive() - child.birth_date).num_days();
            if age > MAX_AGE_DAYS {
                break;
            }
            let c = |z: f64| z.clamp(clamp.0, clamp.1);
            let noisy = LatentZ {
                haz: c(latent.haz + n.haz_sd * noise[0]),
                whz: c(latent.whz + n.whz_sd * noise[1]),
                muacz: c(latent.muacz + n.muacz_sd * noise[2]),
            };
            let sex = child.sex;
            let Some(o) = observe(reference, sex, age, noisy, cfg.rounding, clamp)
                .or_else(|| observe(reference, sex, age, latent, cfg.rounding, clamp))
            else {
                continue;
            };
            raw.push(Measurement {
                id: String::new(),
                child_id: child.id.clone(),
                chw_id: child.chw_id.clone(),
                timestamp: ts,
                location,
                weight: Some(o.weight),
                height: Some(o.height),
                height_mode: o.mode,
                muac: Some(o.muac),
                entry_duration: duration,
            });
        }
    }
    raw.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.child_id.cmp(&b.child_id)));
    for (i, m) in raw.iter_mut().enumerate() {
        m.id = format!("m{:07}", i + 1);
    }
    let truth = plant_fraud(cfg, population, &mut raw, reference);
    raw.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
    Simulation { measurements: raw, truth }
}

fn plant_fraud(
    cfg: &SimConfig,
    population: &Population,
    ms: &mut Vec<Measurement>,
    reference: &GrowthReference,
) -> FraudTruth {
    let plan = cfg.fraud;
    let mut truth = FraudTruth::default();
    if plan.is_empty() {
        return truth;
    }
    let mut rng = stream(cfg.seed, 3);
    let registry = &population.registry;

    let mut chw_ids: Vec<String> = registry.chws().map(|w| w.id.clone()).collect();
    chw_ids.shuffle(&mut rng);
    let digit: BTreeSet<String> = chw_ids.iter().take(plan.digit_chws).cloned().collect();
    for m in ms.iter_mut().filter(|m| digit.contains(&m.chw_id)) {
        m.weight = m.weight.map(|v| HALF.round(v));
        m.height = m.height.map(|v| HALF.round(v));
        m.muac = m.muac.map(|v| MM_5.round(v));
    }
    truth.digit_chws = digit.iter().cloned().collect();

    // one planted record per child, so no plan masks another
    let mut used: BTreeSet<String> = BTreeSet::new();
    let eligible = |m: &Measurement, used: &BTreeSet<String>| !digit.contains(&m.chw_id) && !used.contains(&m.child_id);

    let mut prev: BTreeMap<&str, usize> = BTreeMap::new();
    let mut has_prev = Vec::new();
    for (i, m) in ms.iter().enumerate() {
        if let Some(&j) = prev.get(m.child_id.as_str()) {
            has_prev.push((i, j));
        }
        prev.insert(&m.child_id, i);
    }
    has_prev.shuffle(&mut rng);
    for (i, j) in has_prev {
        if truth.height_drops.len() == plan.height_drops {
            break;
        }
        if !eligible(&ms[i], &used) {
            continue;
        }
        let Some(before) = ms[j].height else { continue };
        let drop: f64 = rng.random_range(1.5..3.0);
        let h = CM_01.round(before - drop);
        if h <= 30.0 {
            continue;
        }
        ms[i].height = Some(h);
        used.insert(ms[i].child_id.clone());
        truth.height_drops.push(ms[i].id.clone());
    }

    let limits = PlausibilityLimits::default();
    let mut order: Vec<usize> = (0..ms.len()).collect();
    order.shuffle(&mut rng);
    for &i in &order {
        if truth.extreme_z.len() == plan.extreme_z {
            break;
        }
        if !eligible(&ms[i], &used) {
            continue;
        }
        let Some(child) = registry.child(&ms[i].child_id) else { continue };
        let Some(h) = ms[i].height else { continue };
        let Ok(row) = reference.lookup(Indicator::Wfh, child.sex, h * 10.0) else { continue };
        let candidates = [limits.whz.0 - 2.0, limits.whz.1 + 2.0];
        let Some(w) = candidates
            .iter()
            .filter_map(|&z| inverse_zscore(z, &row).ok())
            .map(|w| KG_01.round(w))
            .find(|w| *w > 0.0 && *w <= 40.0)
        else {
            continue;
        };
        ms[i].weight = Some(w);
        used.insert(ms[i].child_id.clone());
        truth.extreme_z.push(ms[i].id.clone());
    }

    let size = plan.duplicate_size.max(2);
    let mut next = ms.len() + 1;
    let mut fabricated = Vec::new();
    for &i in &order {
        if truth.duplicate_groups.len() == plan.duplicate_groups {
            break;
        }
        let anchor = ms[i].clone();
        if !eligible(&anchor, &used) {
            continue;
        }
        let mut others: Vec<&Child> =
            registry.children_of(&anchor.chw_id).filter(|c| c.id != anchor.child_id && !used.contains(&c.id)).collect();
        if others.len() < size - 1 {
            continue;
        }
        others.shuffle(&mut rng);
        used.insert(anchor.child_id.clone());
        let mut group = vec![anchor.id.clone()];
        for (k, c) in others.into_iter().take(size - 1).enumerate() {
            used.insert(c.id.clone());
            let id = format!("m{next:07}");
            next += 1;
            group.push(id.clone());
            fabricated.push(Measurement {
                id,
                child_id: c.id.clone(),
                timestamp: anchor.timestamp + Duration::minutes(7 * (k as i64 + 1)),
                location: jitter(c, cfg, &mut rng),
                entry_duration: entry_seconds(20.0, cfg.agents.entry_cv, &mut rng),
                ..anchor.clone()
            });
        }
        truth.duplicate_groups.push(group);
    }
    ms.extend(fabricated);
    truth
}

/// Last timestamp in a stream, or `start` when it is empty.
pub fn stream_end(measurements: &[Measurement], start: DateTime<Utc>) -> DateTime<Utc> {
    measurements.iter().map(|m| m.timestamp).max().unwrap_or(start)
}
