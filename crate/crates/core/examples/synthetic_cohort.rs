//! A synthetic district end to end: cohort, visits with planted fraud,
//! ingestion, screening and hotspot recovery.

use anthroquest::geostat::HotspotClass;
use anthroquest::platform::{sync_batches, Env, Platform, RecordLog, Role};
use anthroquest::simkit::{generate_population, planted_cells, simulate_measurements, FraudPlan, SimConfig};
use anthroquest::Config;

fn main() {
    let cfg = SimConfig {
        fraud: FraudPlan { digit_chws: 1, duplicate_groups: 3, duplicate_size: 3, height_drops: 4, extreme_z: 4 },
        ..SimConfig::default()
    };
    let pop = generate_population(&cfg);
    let sim = simulate_measurements(&cfg, &pop, 90);
    println!("{} children, {} CHWs, {} visits", pop.latent.len(), pop.arms.len(), sim.measurements.len());

    let p = Platform::create(
        RecordLog::in_memory(),
        pop.registry.clone(),
        Env::new(Config { grid: cfg.grid, ..Config::default() }),
    )
    .unwrap();
    for b in sync_batches(&sim.measurements) {
        p.submit_batch(&Role::Chw(b.chw_id.clone()), &b).unwrap();
    }
    let alerts = p.get_alerts(&Role::Supervisor, &Default::default()).unwrap();
    let mut by_kind = std::collections::BTreeMap::new();
    for a in &alerts {
        *by_kind.entry(a.kind).or_insert(0) += 1;
    }
    println!("alerts by kind: {by_kind:?}");
    println!(
        "planted: {} digit CHWs, {} duplicate groups, {} height drops, {} extreme values",
        sim.truth.digit_chws.len(),
        sim.truth.duplicate_groups.len(),
        sim.truth.height_drops.len(),
        sim.truth.extreme_z.len()
    );

    let at = p.with_store(|s| s.latest_timestamp()).unwrap();
    let layers = p.recompute_layers(at).unwrap();
    let hot: Vec<usize> = layers.hotspots[&anthroquest::Indicator::Wfh]
        .class
        .iter()
        .enumerate()
        .filter(|(_, c)| matches!(c, Some(HotspotClass::Hot95 | HotspotClass::Hot99)))
        .map(|(i, _)| i)
        .collect();
    let planted = planted_cells(&cfg);
    let both = hot.iter().filter(|c| planted.contains(c)).count();
    println!("{} hot cells, {} planted, {both} in both", hot.len(), planted.len());
}
