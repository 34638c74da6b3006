#![allow(dead_code)]

use anthroquest::integrity::{Alert, AlertKind, AlertSeverity};
use anthroquest::platform::{sync_batches, AlertFilter, Env, Platform, RecordLog, Role};
use anthroquest::simkit::{generate_population, simulate_measurements, FraudTruth, Population, SimConfig, Simulation};
use anthroquest::Config;

pub fn platform_for(cfg: &SimConfig, pop: &Population, log: RecordLog) -> Platform {
    let config = Config { grid: cfg.grid, ..Config::default() };
    Platform::create(log, pop.registry.clone(), Env::new(config)).unwrap()
}

/// Simulates `days` of visits and pushes them through the sync API.
pub fn simulate_and_ingest(cfg: &SimConfig, days: u32) -> (Platform, Population, Simulation) {
    let pop = generate_population(cfg);
    let sim = simulate_measurements(cfg, &pop, days);
    let p = platform_for(cfg, &pop, RecordLog::in_memory());
    for b in sync_batches(&sim.measurements) {
        p.submit_batch(&Role::Chw(b.chw_id.clone()), &b).unwrap();
    }
    (p, pop, sim)
}

pub fn alerts(p: &Platform) -> Vec<Alert> {
    p.get_alerts(&Role::Supervisor, &AlertFilter::default()).unwrap()
}

/// Planted items with no alert of the rule that should catch them.
pub fn missed(truth: &FraudTruth, alerts: &[Alert]) -> Vec<String> {
    let names =
        |kind: AlertKind, id: &str| alerts.iter().any(|a| a.kind == kind && a.measurement_ids.iter().any(|m| m == id));
    let mut out = Vec::new();
    for w in &truth.digit_chws {
        if !alerts.iter().any(|a| a.kind == AlertKind::DigitPreference && a.chw_id == *w) {
            out.push(format!("digits {w}"));
        }
    }
    for g in &truth.duplicate_groups {
        let hit = alerts.iter().any(|a| {
            a.kind == AlertKind::Duplicate
                && a.severity >= AlertSeverity::Warn
                && g.iter().all(|id| a.measurement_ids.contains(id))
        });
        if !hit {
            out.push(format!("duplicate {g:?}"));
        }
    }
    for id in &truth.height_drops {
        if !names(AlertKind::Velocity, id) {
            out.push(format!("height drop {id}"));
        }
    }
    for id in &truth.extreme_z {
        let hit = alerts.iter().any(|a| {
            a.kind == AlertKind::ExtremeZ && a.severity == AlertSeverity::Block && a.measurement_ids.contains(id)
        });
        if !hit {
            out.push(format!("extreme z {id}"));
        }
    }
    out
}

pub fn planted_count(truth: &FraudTruth) -> usize {
    truth.digit_chws.len() + truth.duplicate_groups.len() + truth.height_drops.len() + truth.extreme_z.len()
}
