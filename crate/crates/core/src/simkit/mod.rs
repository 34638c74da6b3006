//! Synthetic cohorts and trials.
//!
//! A population of households is scattered over the grid with a latent
//! z-score field that dips around configured bumps. Visits turn latent z
//! into raw weight, height and MUAC through the inverse LMS transform, and a
//! fraud plan can plant records that the integrity rules must catch. The
//! trial generator draws knowledge-test scores per arm and phase. Every
//! output is a pure function of the config, seed included.

mod config;
mod measurements;
mod population;
mod trial;

use std::path::Path;

pub use config::{AgentParams, Bump, FraudPlan, LatentParams, NoiseParams, ScoreParams, SimConfig, TrialParams};
pub use measurements::{
    simulate_measurements, simulate_measurements_with, stream_end, FraudTruth, Simulation, MAX_AGE_DAYS,
};
pub use population::{
    generate_population, generate_population_with, planted_cells, severity_at, severity_field, Arm, LatentZ,
    Population, ENROL_AGE_DAYS,
};
pub use trial::simulate_trial;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::analytics::TrialRecord;
use crate::io::write_csv;
use crate::platform::{ChildRow, ChwRow, MeasurementRow};

// Independent streams keep e.g. the trial unchanged when the population size changes.
fn stream(seed: u64, id: u64) -> ChaCha8Rng {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(id);
    rng
}

/// Writes `children.csv`, `chws.csv`, `measurements.csv`, `trial.csv` and
/// `truth.json` into `dir`.
pub fn write_dataset(
    dir: &Path,
    population: &Population,
    sim: &Simulation,
    trial: &[TrialRecord],
) -> std::io::Result<()> {
    std::fs::create_dir_all(dir)?;
    let file = |name: &str| std::fs::File::create(dir.join(name)).map(std::io::BufWriter::new);
    let children: Vec<ChildRow> = population.registry.children().map(ChildRow::from).collect();
    write_csv(file("children.csv")?, &children)?;
    let chws: Vec<ChwRow> = population.registry.chws().map(ChwRow::from).collect();
    write_csv(file("chws.csv")?, &chws)?;
    let ms: Vec<MeasurementRow> = sim.measurements.iter().map(MeasurementRow::from).collect();
    write_csv(file("measurements.csv")?, &ms)?;
    write_csv(file("trial.csv")?, trial)?;
    let truth = serde_json::to_string_pretty(&sim.truth).map_err(std::io::Error::other)?;
    std::fs::write(dir.join("truth.json"), truth + "\n")
}
