use std::net::SocketAddr;
use std::path::PathBuf;

use chrono::{DateTime, Utc};
use clap::{Args, Parser, Subcommand, ValueEnum};

use crate::analytics::Tails;
use crate::anthro::{Indicator, Sex};
use crate::platform::LayerKind;

#[derive(Debug, Parser)]
#[command(
    name = "anthroquest",
    version,
    about = "Child-growth surveillance: z-scores, hotspot maps, quests, screening and trial statistics"
)]
pub struct Cli {
    /// key = value config; for `simulate` this is the simulation config.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Append registry and measurement files to a store log.
    Ingest(IngestArgs),
    /// z-scores for one measurement or a CSV of rows.
    Zscore(MeasureArgs),
    /// Malnutrition classification for one measurement or a CSV of rows.
    Classify(MeasureArgs),
    /// Gi* hotspot or density layer as GeoJSON.
    Hotspot(HotspotArgs),
    /// Coverage and staleness layer.
    Coverage(CoverageArgs),
    /// Quests for one CHW.
    Quests(QuestArgs),
    /// Integrity alerts as CSV.
    Screen(ScreenArgs),
    /// CHW efficiency scores as CSV.
    Efficiency(EfficiencyArgs),
    /// Summary and t-test report of a pre/post/delayed trial.
    TrialStats(TrialArgs),
    /// Sample size per group for a two-sample t-test.
    Power(PowerArgs),
    /// Synthetic cohort, measurement stream and trial scores.
    Simulate(SimulateArgs),
    /// Run the HTTP service until interrupted.
    Serve(ServeArgs),
}

/// Where the store comes from: a log, or registry and measurement files
/// loaded into memory.
#[derive(Debug, Clone, Args, Default)]
pub struct StoreArgs {
    #[arg(long)]
    pub log: Option<PathBuf>,
    #[arg(long)]
    pub children: Option<PathBuf>,
    #[arg(long)]
    pub chws: Option<PathBuf>,
    #[arg(long)]
    pub measurements: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct IngestArgs {
    #[command(flatten)]
    pub store: StoreArgs,
    /// JSON report of every sync outcome.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    /// The position expected at the child's age.
    Auto,
    Standing,
    Recumbent,
}

#[derive(Debug, Args)]
pub struct MeasureArgs {
    /// CSV `id,sex,age_days,weight,height,height_mode,muac`; empty cells are absent values.
    #[arg(long)]
    pub input: Option<PathBuf>,
    #[arg(long)]
    pub sex: Option<Sex>,
    #[arg(long)]
    pub age_days: Option<i64>,
    /// kg
    #[arg(long)]
    pub weight: Option<f64>,
    /// cm
    #[arg(long)]
    pub height: Option<f64>,
    #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
    pub mode: ModeArg,
    /// mm
    #[arg(long)]
    pub muac: Option<f64>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MapFormat {
    Geojson,
    Matrix,
}

#[derive(Debug, Args)]
pub struct HotspotArgs {
    /// Whitespace-separated value matrix, one grid row per line; `NA` for empty cells.
    #[arg(long)]
    pub values: Option<PathBuf>,
    #[command(flatten)]
    pub store: StoreArgs,
    #[arg(long, default_value = "WFH")]
    pub indicator: Indicator,
    #[arg(long, default_value = "gistar")]
    pub layer: LayerKind,
    #[arg(long)]
    pub radius: Option<usize>,
    /// Benjamini-Hochberg adjusted p-values.
    #[arg(long)]
    pub fdr: bool,
    #[arg(long)]
    pub at: Option<DateTime<Utc>>,
    #[arg(long, value_enum, default_value_t = MapFormat::Geojson)]
    pub format: MapFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct CoverageArgs {
    #[command(flatten)]
    pub store: StoreArgs,
    #[arg(long)]
    pub at: Option<DateTime<Utc>>,
    #[arg(long, value_enum, default_value_t = MapFormat::Geojson)]
    pub format: MapFormat,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct QuestArgs {
    #[command(flatten)]
    pub store: StoreArgs,
    #[arg(long)]
    pub chw: String,
    #[arg(long)]
    pub max: Option<usize>,
    #[arg(long)]
    pub at: Option<DateTime<Utc>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct ScreenArgs {
    #[command(flatten)]
    pub store: StoreArgs,
    #[arg(long)]
    pub chw: Option<String>,
    /// info, warn or block
    #[arg(long)]
    pub min_severity: Option<String>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct EfficiencyArgs {
    #[command(flatten)]
    pub store: StoreArgs,
    #[arg(long)]
    pub chw: Option<String>,
    #[arg(long)]
    pub from: Option<DateTime<Utc>>,
    #[arg(long)]
    pub to: Option<DateTime<Utc>>,
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct TrialArgs {
    /// CSV `chw_id,group,phase,score`.
    #[arg(long)]
    pub input: PathBuf,
    /// Machine-readable statistics.
    #[arg(long)]
    pub out: Option<PathBuf>,
}

#[derive(Debug, Args)]
pub struct PowerArgs {
    /// Standardised effect size.
    #[arg(long)]
    pub d: f64,
    #[arg(long, default_value_t = 0.05)]
    pub alpha: f64,
    #[arg(long, default_value_t = 0.8)]
    pub power: f64,
    #[arg(long, default_value = "two")]
    pub tails: Tails,
    /// n2 / n1.
    #[arg(long, default_value_t = 1.0)]
    pub ratio: f64,
}

#[derive(Debug, Args)]
pub struct SimulateArgs {
    #[arg(long)]
    pub out: PathBuf,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, default_value_t = 180)]
    pub days: u32,
}

#[derive(Debug, Args)]
pub struct ServeArgs {
    #[command(flatten)]
    pub store: StoreArgs,
    #[arg(long, default_value = "127.0.0.1:8080")]
    pub addr: SocketAddr,
    /// Seconds between layer recomputes.
    #[arg(long, default_value_t = 300)]
    pub refresh_secs: u64,
}
