//! Offline batches synced to a file-backed store, resent, and the store
//! rebuilt from its log after a restart.

use anthroquest::platform::{sync_batches, Env, Platform, Role};
use anthroquest::simkit::{generate_population, simulate_measurements, SimConfig};
use anthroquest::Config;

fn main() {
    let cfg = SimConfig { n_children: 300, n_chws: 4, ..SimConfig::default() };
    let pop = generate_population(&cfg);
    let sim = simulate_measurements(&cfg, &pop, 60);
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("store.log");
    let env = || Env::new(Config { grid: cfg.grid, ..Config::default() });

    let p = Platform::create_file(&path, pop.registry.clone(), env()).unwrap();
    let batches = sync_batches(&sim.measurements);
    for b in &batches {
        p.submit_batch(&Role::Chw(b.chw_id.clone()), b).unwrap();
    }
    let size = std::fs::metadata(&path).unwrap().len();
    println!("{} batches, {} measurements, log {size} bytes", batches.len(), sim.measurements.len());

    // the phone lost its acknowledgements and sends everything again
    let resent =
        batches.iter().map(|b| p.submit_batch(&Role::Chw(b.chw_id.clone()), b).unwrap()).flat_map(|r| r.outcomes);
    let accepted = resent.filter(|o| o.is_accepted()).count();
    println!("resend: {accepted} accepted, log still {} bytes", std::fs::metadata(&path).unwrap().len());

    let before = p.with_store(|s| s.clone());
    drop(p);
    let q = Platform::open(&path, env()).unwrap();
    println!("rebuilt from log: identical = {}", q.with_store(|s| s.clone()) == before);
    for e in q.get_efficiency(&Role::Supervisor, None, cfg.start, cfg.start + chrono::Duration::days(60)).unwrap() {
        println!("  {} submissions {:>3} composite {:.1}", e.chw_id, e.submissions, e.composite);
    }
}
