use chrono::{DateTime, TimeZone, Utc};

use crate::analytics::{Group, Phase};
use crate::config::{for_each_entry, Entry};
use crate::geostat::{GridSpec, LatLon};
use crate::io::ParseError;

/// A Gaussian dip in the z-score field, in cell units.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Bump {
    pub row: f64,
    pub col: f64,
    pub sigma_cells: f64,
    /// Subtracted from the latent z at the centre.
    pub depth: f64,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LatentParams {
    pub haz_mean: f64,
    pub whz_mean: f64,
    pub muacz_mean: f64,
    pub sd: f64,
    /// Correlation of the MUAC z with the weight-for-height z.
    pub muac_whz_corr: f64,
    pub clamp: (f64, f64),
}

/// Per-visit measurement noise, in z units, plus GPS scatter in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NoiseParams {
    pub haz_sd: f64,
    pub whz_sd: f64,
    pub muacz_sd: f64,
    pub gps_m: f64,
}

/// How CHWs in the game and non-game arms behave.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AgentParams {
    pub visit_interval_days: u32,
    pub game_fraction: f64,
    pub visit_prob_game: f64,
    pub visit_prob_control: f64,
    pub entry_seconds_game: f64,
    pub entry_seconds_control: f64,
    /// Coefficient of variation of entry durations.
    pub entry_cv: f64,
}

/// Counts of rule-violating records to plant.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct FraudPlan {
    /// CHWs whose values all end in 0 or 5.
    pub digit_chws: usize,
    pub duplicate_groups: usize,
    /// Children sharing each copied tuple.
    pub duplicate_size: usize,
    pub height_drops: usize,
    pub extreme_z: usize,
}

impl FraudPlan {
    pub fn is_empty(&self) -> bool {
        self.digit_chws == 0 && self.duplicate_groups == 0 && self.height_drops == 0 && self.extreme_z == 0
    }
}

/// Score distribution for one group and phase.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScoreParams {
    pub mean: f64,
    pub sd: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct TrialParams {
    pub n_per_arm: usize,
    /// Within-CHW correlation across phases.
    pub rho: f64,
    /// Indexed `[group][phase]` in `Group::ALL` and `Phase::ALL` order.
    pub scores: [[ScoreParams; 3]; 2],
}

impl TrialParams {
    pub fn score(&self, group: Group, phase: Phase) -> ScoreParams {
        self.scores[group_index(group)][phase_index(phase)]
    }
}

fn group_index(g: Group) -> usize {
    Group::ALL.iter().position(|x| *x == g).expect("group")
}

fn phase_index(p: Phase) -> usize {
    Phase::ALL.iter().position(|x| *x == p).expect("phase")
}

impl Default for TrialParams {
    fn default() -> Self {
        let s = |mean, sd| ScoreParams { mean, sd };
        Self {
            n_per_arm: 94,
            rho: 0.5,
            scores: [
                [s(51.46, 9.21), s(54.84, 14.96), s(52.58, 13.59)],
                [s(49.04, 10.57), s(73.9, 14.28), s(69.14, 16.63)],
            ],
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SimConfig {
    pub seed: u64,
    pub n_children: usize,
    pub n_chws: usize,
    pub n_teams: usize,
    pub grid: GridSpec,
    pub start: DateTime<Utc>,
    pub bumps: Vec<Bump>,
    pub latent: LatentParams,
    pub noise: NoiseParams,
    /// Round to instrument precision: 0.1 kg, 0.1 cm, 1 mm.
    pub rounding: bool,
    pub agents: AgentParams,
    pub fraud: FraudPlan,
    pub trial: TrialParams,
}

impl Default for SimConfig {
    fn default() -> Self {
        Self {
            seed: 1,
            n_children: 3000,
            n_chws: 30,
            n_teams: 5,
            grid: GridSpec { origin: LatLon::new(18.45, 73.78), cell_size: 250.0, rows: 20, cols: 20 },
            start: Utc.with_ymd_and_hms(2024, 1, 1, 0, 0, 0).unwrap(),
            bumps: vec![
                Bump { row: 5.0, col: 5.0, sigma_cells: 2.0, depth: 1.5 },
                Bump { row: 13.0, col: 14.0, sigma_cells: 2.0, depth: 1.5 },
            ],
            latent: LatentParams {
                haz_mean: -1.2,
                whz_mean: -0.5,
                muacz_mean: -0.4,
                sd: 1.0,
                muac_whz_corr: 0.6,
                clamp: (-5.0, 4.0),
            },
            noise: NoiseParams { haz_sd: 0.1, whz_sd: 0.15, muacz_sd: 0.15, gps_m: 15.0 },
            rounding: true,
            agents: AgentParams {
                visit_interval_days: 30,
                game_fraction: 0.5,
                visit_prob_game: 0.95,
                visit_prob_control: 0.8,
                entry_seconds_game: 120.0,
                entry_seconds_control: 180.0,
                entry_cv: 0.3,
            },
            fraud: FraudPlan { duplicate_size: 3, ..FraudPlan::default() },
            trial: TrialParams::default(),
        }
    }
}

fn parse_bumps(e: &Entry) -> Result<Vec<Bump>, ParseError> {
    let mut out = Vec::new();
    for part in e.value.split(';').map(str::trim).filter(|p| !p.is_empty()) {
        let v: Vec<f64> = part
            .split(':')
            .map(|x| x.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| e.err(format!("bad bump {part:?}, expected row:col:sigma:depth")))?;
        let [row, col, sigma_cells, depth] = v[..] else {
            return Err(e.err(format!("bad bump {part:?}, expected row:col:sigma:depth")));
        };
        if !(sigma_cells > 0.0) {
            return Err(e.err("bump sigma must be positive"));
        }
        out.push(Bump { row, col, sigma_cells, depth });
    }
    Ok(out)
}

fn probability(e: &Entry) -> Result<f64, ParseError> {
    let v = e.float()?;
    if !(0.0..=1.0).contains(&v) {
        return Err(e.err("expected a value in [0, 1]"));
    }
    Ok(v)
}

fn non_negative(e: &Entry) -> Result<f64, ParseError> {
    let v = e.float()?;
    if v < 0.0 {
        return Err(e.err("must not be negative"));
    }
    Ok(v)
}

impl SimConfig {
    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut cfg = SimConfig::default();
        for_each_entry(text, |key, e| cfg.apply(key, e))?;
        cfg.grid.check().map_err(|err| ParseError::new(0, 0, err.to_string()))?;
        if cfg.n_chws == 0 && cfg.n_children > 0 {
            return Err(ParseError::new(0, 0, "children need at least one CHW"));
        }
        if cfg.n_teams == 0 {
            return Err(ParseError::new(0, 0, "teams must be at least 1"));
        }
        if cfg.fraud.duplicate_size < 2 {
            return Err(ParseError::new(0, 0, "fraud.duplicate_size must be at least 2"));
        }
        if cfg.latent.clamp.0 >= cfg.latent.clamp.1 {
            return Err(ParseError::new(0, 0, "latent.clamp_min must be below latent.clamp_max"));
        }
        Ok(cfg)
    }

    pub fn load(path: &std::path::Path) -> Result<Self, crate::config::ConfigError> {
        use crate::config::ConfigError;
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e.to_string()))?;
        Self::parse(&text).map_err(ConfigError::Parse)
    }

    fn apply(&mut self, key: &str, e: &Entry) -> Result<(), ParseError> {
        match key {
            "seed" => self.seed = e.parse("an integer seed")?,
            "children" => self.n_children = e.parse("a count")?,
            "chws" => self.n_chws = e.parse("a count")?,
            "teams" => self.n_teams = e.parse("a count")?,
            "grid.origin_lat" => self.grid.origin.lat = e.float()?,
            "grid.origin_lon" => self.grid.origin.lon = e.float()?,
            "grid.cell_size_m" => self.grid.cell_size = e.float()?,
            "grid.rows" => self.grid.rows = e.parse("a count")?,
            "grid.cols" => self.grid.cols = e.parse("a count")?,
            "start" => self.start = e.time()?,
            "bumps" => self.bumps = parse_bumps(e)?,
            "latent.haz_mean" => self.latent.haz_mean = e.float()?,
            "latent.whz_mean" => self.latent.whz_mean = e.float()?,
            "latent.muacz_mean" => self.latent.muacz_mean = e.float()?,
            "latent.sd" => self.latent.sd = non_negative(e)?,
            "latent.muac_whz_corr" => {
                let v = e.float()?;
                if !(-1.0..=1.0).contains(&v) {
                    return Err(e.err("correlation must be in [-1, 1]"));
                }
                self.latent.muac_whz_corr = v;
            }
            "latent.clamp_min" => self.latent.clamp.0 = e.float()?,
            "latent.clamp_max" => self.latent.clamp.1 = e.float()?,
            "noise.haz_sd" => self.noise.haz_sd = non_negative(e)?,
            "noise.whz_sd" => self.noise.whz_sd = non_negative(e)?,
            "noise.muacz_sd" => self.noise.muacz_sd = non_negative(e)?,
            "noise.gps_m" => self.noise.gps_m = non_negative(e)?,
            "rounding" => self.rounding = e.boolean()?,
            "agent.visit_interval_days" => {
                self.agents.visit_interval_days = e.parse("a count")?;
                if self.agents.visit_interval_days == 0 {
                    return Err(e.err("interval must be at least one day"));
                }
            }
            "agent.game_fraction" => self.agents.game_fraction = probability(e)?,
            "agent.visit_prob_game" => self.agents.visit_prob_game = probability(e)?,
            "agent.visit_prob_control" => self.agents.visit_prob_control = probability(e)?,
            "agent.entry_seconds_game" => self.agents.entry_seconds_game = non_negative(e)?,
            "agent.entry_seconds_control" => self.agents.entry_seconds_control = non_negative(e)?,
            "agent.entry_cv" => self.agents.entry_cv = non_negative(e)?,
            "fraud.digit_chws" => self.fraud.digit_chws = e.parse("a count")?,
            "fraud.duplicate_groups" => self.fraud.duplicate_groups = e.parse("a count")?,
            "fraud.duplicate_size" => self.fraud.duplicate_size = e.parse("a count")?,
            "fraud.height_drops" => self.fraud.height_drops = e.parse("a count")?,
            "fraud.extreme_z" => self.fraud.extreme_z = e.parse("a count")?,
            "trial.n_per_arm" => self.trial.n_per_arm = e.parse("a count")?,
            "trial.rho" => self.trial.rho = probability(e)?,
            _ => {
                if let Some(rest) = key.strip_prefix("trial.") {
                    return self.apply_score(rest, e);
                }
                return Err(ParseError::new(e.line, 1, format!("unknown key {key}")));
            }
        }
        Ok(())
    }

    // trial.<cg|ig>.<baseline|post|delayed>.<mean|sd>
    fn apply_score(&mut self, rest: &str, e: &Entry) -> Result<(), ParseError> {
        let unknown = || ParseError::new(e.line, 1, format!("unknown key trial.{rest}"));
        let parts: Vec<&str> = rest.split('.').collect();
        let [g, p, field] = parts[..] else { return Err(unknown()) };
        let group = Group::ALL.into_iter().find(|x| x.as_str().eq_ignore_ascii_case(g)).ok_or_else(unknown)?;
        let phase = Phase::ALL.into_iter().find(|x| x.as_str() == p).ok_or_else(unknown)?;
        let slot = &mut self.trial.scores[group_index(group)][phase_index(phase)];
        match field {
            "mean" => slot.mean = e.float()?,
            "sd" => slot.sd = non_negative(e)?,
            _ => return Err(unknown()),
        }
        Ok(())
    }
}
