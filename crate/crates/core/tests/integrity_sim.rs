mod common;

use std::collections::BTreeSet;

use anthroquest::integrity::{AlertKind, AlertSeverity};
use anthroquest::simkit::{FraudPlan, SimConfig};
use common::{alerts, missed, planted_count, simulate_and_ingest};

fn base(seed: u64) -> SimConfig {
    SimConfig { seed, n_children: 800, n_chws: 8, ..SimConfig::default() }
}

#[test]
fn clean_data_never_blocks() {
    for seed in 1..=3 {
        let (p, _, sim) = simulate_and_ingest(&base(seed), 180);
        assert!(sim.truth.measurement_ids().is_empty());
        let blocks: Vec<_> = alerts(&p).into_iter().filter(|a| a.severity == AlertSeverity::Block).collect();
        assert!(blocks.is_empty(), "seed {seed}: {blocks:?}");
    }
}

#[test]
fn every_planted_violation_is_flagged() {
    for seed in 1..=3 {
        let cfg = SimConfig {
            fraud: FraudPlan { digit_chws: 2, duplicate_groups: 8, duplicate_size: 3, height_drops: 8, extreme_z: 8 },
            ..base(seed)
        };
        let (p, _, sim) = simulate_and_ingest(&cfg, 180);
        assert_eq!(planted_count(&sim.truth), 26);
        let m = missed(&sim.truth, &alerts(&p));
        assert!(m.is_empty(), "seed {seed}: {m:?}");
    }
}

#[test]
fn fifty_planted_duplicates_fifty_flagged() {
    let cfg = SimConfig {
        n_children: 1500,
        n_chws: 10,
        fraud: FraudPlan { duplicate_groups: 50, duplicate_size: 3, ..FraudPlan::default() },
        ..base(7)
    };
    let (p, _, sim) = simulate_and_ingest(&cfg, 90);
    let flagged: Vec<_> = alerts(&p)
        .into_iter()
        .filter(|a| a.kind == AlertKind::Duplicate && a.severity >= AlertSeverity::Warn)
        .collect();
    assert_eq!(flagged.len(), 50);
    let planted: BTreeSet<Vec<String>> = sim.truth.duplicate_groups.iter().cloned().collect();
    let found: BTreeSet<Vec<String>> = flagged.iter().map(|a| a.measurement_ids.clone()).collect();
    assert_eq!(planted, found);
}

#[test]
fn no_plan_no_planted_alerts() {
    let (p, _, sim) = simulate_and_ingest(&base(11), 120);
    assert_eq!(planted_count(&sim.truth), 0);
    let a = alerts(&p);
    assert!(a.iter().all(|a| a.kind != AlertKind::ExtremeZ && a.kind != AlertKind::Duplicate), "{a:?}");
}
