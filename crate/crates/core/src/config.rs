//! Plain-text `key = value` configuration shared by the CLI, the server and
//! the simulator.
//!
//! ```text
//! # grid
//! grid.origin_lat = 18.45
//! grid.cell_size_m = 250
//! reward.uncharted_bonus = 3
//! campaign.monsoon.start = 2024-07-01T00:00:00Z
//! token.s3cret = supervisor
//! ```
//!
//! Unknown keys are errors so that typos do not silently fall back to
//! defaults.

use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use chrono::{DateTime, Utc};

use crate::analytics::EfficiencyWeights;
use crate::anthro::{AssessSettings, PlausibilityLimits};
use crate::game::{Campaign, RewardRules};
use crate::geostat::{GridSpec, LatLon};
use crate::integrity::IntegrityLimits;
use crate::io::ParseError;
use crate::platform::Role;

#[derive(Debug, Clone, PartialEq)]
pub struct Config {
    pub grid: GridSpec,
    pub kde_bandwidth_m: f64,
    pub gistar_radius: usize,
    pub gistar_fdr: bool,
    pub coverage_window_days: f64,
    pub max_quests: usize,
    pub reward: RewardRules,
    pub assess: AssessSettings,
    pub integrity: IntegrityLimits,
    pub efficiency: EfficiencyWeights,
    pub campaigns: Vec<Campaign>,
    pub tokens: BTreeMap<String, Role>,
    pub reference_path: Option<PathBuf>,
    pub cutoffs_path: Option<PathBuf>,
}

impl Default for Config {
    fn default() -> Self {
        Self {
            grid: GridSpec { origin: LatLon::new(18.45, 73.78), cell_size: 250.0, rows: 40, cols: 40 },
            kde_bandwidth_m: 500.0,
            gistar_radius: 1,
            gistar_fdr: false,
            coverage_window_days: 90.0,
            max_quests: 5,
            reward: RewardRules::default(),
            assess: AssessSettings::default(),
            integrity: IntegrityLimits::default(),
            efficiency: EfficiencyWeights::default(),
            campaigns: Vec::new(),
            tokens: BTreeMap::new(),
            reference_path: None,
            cutoffs_path: None,
        }
    }
}

pub(crate) struct Entry<'a> {
    pub line: u64,
    pub column: u64,
    pub value: &'a str,
}

/// Calls `f` for every `key = value` line, skipping blanks and `#` comments
/// and rejecting repeated keys.
pub(crate) fn for_each_entry(
    text: &str,
    mut f: impl FnMut(&str, &Entry) -> Result<(), ParseError>,
) -> Result<(), ParseError> {
    let mut seen = BTreeSet::new();
    for (i, raw) in text.lines().enumerate() {
        let line = i as u64 + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let Some(eq) = raw.find('=') else {
            return Err(ParseError::new(line, 1, "expected key = value"));
        };
        let key = raw[..eq].trim();
        let after = &raw[eq + 1..];
        let value = after.trim();
        let column = (eq + 2 + (after.len() - after.trim_start().len())) as u64;
        if key.is_empty() {
            return Err(ParseError::new(line, 1, "empty key"));
        }
        if !seen.insert(key.to_string()) {
            return Err(ParseError::new(line, 1, format!("duplicate key {key}")));
        }
        f(key, &Entry { line, column, value })?;
    }
    Ok(())
}

impl Entry<'_> {
    pub(crate) fn err(&self, msg: impl Into<String>) -> ParseError {
        ParseError::new(self.line, self.column, msg)
    }

    pub(crate) fn parse<T: FromStr>(&self, what: &str) -> Result<T, ParseError> {
        self.value.parse().map_err(|_| self.err(format!("expected {what}, got {:?}", self.value)))
    }

    pub(crate) fn float(&self) -> Result<f64, ParseError> {
        let v: f64 = self.parse("a number")?;
        if !v.is_finite() {
            return Err(self.err("number must be finite"));
        }
        Ok(v)
    }

    pub(crate) fn boolean(&self) -> Result<bool, ParseError> {
        match self.value.to_ascii_lowercase().as_str() {
            "true" | "yes" | "on" | "1" => Ok(true),
            "false" | "no" | "off" | "0" => Ok(false),
            _ => Err(self.err(format!("expected a boolean, got {:?}", self.value))),
        }
    }

    pub(crate) fn time(&self) -> Result<DateTime<Utc>, ParseError> {
        self.parse("an RFC 3339 timestamp")
    }
}

#[derive(Default)]
struct CampaignDraft {
    line: u64,
    name: Option<String>,
    start: Option<DateTime<Utc>>,
    end: Option<DateTime<Utc>>,
    multiplier: Option<f64>,
    stage: Option<u32>,
}

impl Config {
    pub fn load(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|e| ConfigError::Io(path.to_path_buf(), e.to_string()))?;
        let mut cfg = Self::parse(&text).map_err(ConfigError::Parse)?;
        // relative data paths resolve against the config file
        let base = path.parent().unwrap_or(Path::new("."));
        for p in [&mut cfg.reference_path, &mut cfg.cutoffs_path].into_iter().flatten() {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        }
        Ok(cfg)
    }

    pub fn parse(text: &str) -> Result<Self, ParseError> {
        let mut cfg = Config::default();
        let mut campaigns: BTreeMap<String, CampaignDraft> = BTreeMap::new();
        for_each_entry(text, |key, e| cfg.apply(key, e, &mut campaigns))?;
        for (id, d) in campaigns {
            let missing = |f: &str| ParseError::new(d.line, 1, format!("campaign {id} is missing {f}"));
            let c = Campaign {
                name: d.name.unwrap_or_else(|| id.clone()),
                start: d.start.ok_or_else(|| missing("start"))?,
                end: d.end.ok_or_else(|| missing("end"))?,
                multiplier: d.multiplier.unwrap_or(1.0),
                narrative_stage: d.stage.unwrap_or(0),
                id,
            };
            c.validate().map_err(|err| ParseError::new(d.line, 1, err.to_string()))?;
            cfg.campaigns.push(c);
        }
        cfg.assess.limits = cfg.integrity.plausibility;
        cfg.grid.check().map_err(|err| ParseError::new(0, 0, err.to_string()))?;
        cfg.efficiency.validate().map_err(|err| ParseError::new(0, 0, err.to_string()))?;
        if !(cfg.kde_bandwidth_m > 0.0) {
            return Err(ParseError::new(0, 0, "kde.bandwidth_m must be positive"));
        }
        if cfg.max_quests == 0 {
            return Err(ParseError::new(0, 0, "quests.max must be at least 1"));
        }
        Ok(cfg)
    }

    fn apply(
        &mut self,
        key: &str,
        e: &Entry,
        campaigns: &mut BTreeMap<String, CampaignDraft>,
    ) -> Result<(), ParseError> {
        let pl: &mut PlausibilityLimits = &mut self.integrity.plausibility;
        match key {
            "grid.origin_lat" => self.grid.origin.lat = e.float()?,
            "grid.origin_lon" => self.grid.origin.lon = e.float()?,
            "grid.cell_size_m" => self.grid.cell_size = e.float()?,
            "grid.rows" => self.grid.rows = e.parse("a count")?,
            "grid.cols" => self.grid.cols = e.parse("a count")?,
            "kde.bandwidth_m" => self.kde_bandwidth_m = e.float()?,
            "gistar.radius" => self.gistar_radius = e.parse("a count")?,
            "gistar.fdr" => self.gistar_fdr = e.boolean()?,
            "coverage.window_days" => self.coverage_window_days = e.float()?,
            "quests.max" => self.max_quests = e.parse("a count")?,
            "quests.ttl_days" => self.reward.quest_ttl_days = e.float()?,
            "reward.base_points" => self.reward.base_points = e.float()?,
            "reward.uncharted_bonus" => self.reward.uncharted_bonus = e.float()?,
            "reward.stale_bonus" => self.reward.stale_bonus = e.float()?,
            "reward.stale_after_days" => self.reward.stale_after_days = e.float()?,
            "reward.streak_step" => self.reward.streak_step = e.float()?,
            "reward.streak_cap_days" => self.reward.streak_cap_days = e.parse("a count")?,
            "reward.uncharted_badge_cells" => self.reward.uncharted_badge_cells = e.parse("a count")?,
            "reward.streak_badge_days" => self.reward.streak_badge_days = e.parse("a count")?,
            "reward.utc_offset_minutes" => self.reward.utc_offset_minutes = e.parse("an integer")?,
            "reward.point_badges" => self.reward.point_badges = parse_badges(e)?,
            "assess.recumbent_below_days" => self.assess.recumbent_below_days = e.parse("an integer")?,
            "assess.position_offset_cm" => self.assess.position_offset_cm = e.float()?,
            "plausibility.waz_min" => pl.waz.0 = e.float()?,
            "plausibility.waz_max" => pl.waz.1 = e.float()?,
            "plausibility.haz_min" => pl.haz.0 = e.float()?,
            "plausibility.haz_max" => pl.haz.1 = e.float()?,
            "plausibility.whz_min" => pl.whz.0 = e.float()?,
            "plausibility.whz_max" => pl.whz.1 = e.float()?,
            "plausibility.muacz_min" => pl.muacz.get_or_insert((f64::NEG_INFINITY, f64::INFINITY)).0 = e.float()?,
            "plausibility.muacz_max" => pl.muacz.get_or_insert((f64::NEG_INFINITY, f64::INFINITY)).1 = e.float()?,
            "integrity.max_height_drop_cm" => self.integrity.max_height_drop_cm = e.float()?,
            "integrity.max_weight_rate_kg_per_day" => self.integrity.max_weight_rate_kg_per_day = e.float()?,
            "integrity.max_home_distance_m" => self.integrity.max_home_distance_m = e.float()?,
            "integrity.digit_chi2_critical" => self.integrity.digit_chi2_critical = e.float()?,
            "integrity.digit_min_values" => self.integrity.digit_min_values = e.parse("a count")?,
            "integrity.duplicate_window_days" => self.integrity.duplicate_window_days = e.float()?,
            "integrity.duplicate_warn_size" => self.integrity.duplicate_warn_size = e.parse("a count")?,
            "efficiency.w_accuracy" => self.efficiency.accuracy = e.float()?,
            "efficiency.w_speed" => self.efficiency.speed = e.float()?,
            "efficiency.w_coverage" => self.efficiency.coverage = e.float()?,
            "efficiency.target_rate" => self.efficiency.target_rate = e.float()?,
            "efficiency.scale" => self.efficiency.scale = e.float()?,
            "reference.path" => self.reference_path = Some(PathBuf::from(e.value)),
            "cutoffs.path" => self.cutoffs_path = Some(PathBuf::from(e.value)),
            _ => {
                if let Some(rest) = key.strip_prefix("campaign.") {
                    let Some((id, field)) = rest.rsplit_once('.') else {
                        return Err(ParseError::new(e.line, 1, format!("expected campaign.<id>.<field>, got {key}")));
                    };
                    let d = campaigns
                        .entry(id.to_string())
                        .or_insert_with(|| CampaignDraft { line: e.line, ..Default::default() });
                    match field {
                        "name" => d.name = Some(e.value.to_string()),
                        "start" => d.start = Some(e.time()?),
                        "end" => d.end = Some(e.time()?),
                        "multiplier" => d.multiplier = Some(e.float()?),
                        "stage" => d.stage = Some(e.parse("an integer")?),
                        _ => return Err(ParseError::new(e.line, 1, format!("unknown campaign field {field}"))),
                    }
                } else if let Some(tok) = key.strip_prefix("token.") {
                    let role = match e.value.split_once(':') {
                        Some(("chw", id)) if !id.trim().is_empty() => Role::Chw(id.trim().to_string()),
                        None if e.value == "supervisor" => Role::Supervisor,
                        _ => return Err(e.err("expected chw:<id> or supervisor")),
                    };
                    self.tokens.insert(tok.to_string(), role);
                } else {
                    return Err(ParseError::new(e.line, 1, format!("unknown key {key}")));
                }
            }
        }
        Ok(())
    }
}

/// `100:Century, 500:Five Hundred`
fn parse_badges(e: &Entry) -> Result<Vec<(i64, String)>, ParseError> {
    let mut out = Vec::new();
    for part in e.value.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (pts, name) = part.split_once(':').ok_or_else(|| e.err(format!("badge {part:?} is not points:name")))?;
        let pts: i64 = pts.trim().parse().map_err(|_| e.err(format!("badge threshold {pts:?} is not an integer")))?;
        out.push((pts, name.trim().to_string()));
    }
    out.sort();
    Ok(out)
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {0}: {1}")]
    Io(PathBuf, String),
    #[error("config {0}")]
    Parse(ParseError),
    #[error("{0}: {1}")]
    Table(PathBuf, ParseError),
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_is_default() {
        assert_eq!(Config::parse("").unwrap(), Config::default());
        assert_eq!(Config::parse("# nothing\n\n   \n").unwrap(), Config::default());
    }

    #[test]
    fn overrides_and_campaigns() {
        let text = "\
grid.rows = 10
grid.cols=12
gistar.fdr = yes
reward.uncharted_bonus = 4
reward.point_badges = 500:Big, 50:Small
plausibility.muacz_min = -5
campaign.monsoon.start = 2024-07-01T00:00:00Z
campaign.monsoon.end = 2024-08-01T00:00:00Z
campaign.monsoon.multiplier = 1.5
campaign.monsoon.stage = 2
token.abc = chw:w7
token.boss = supervisor
";
        let c = Config::parse(text).unwrap();
        assert_eq!((c.grid.rows, c.grid.cols), (10, 12));
        assert!(c.gistar_fdr);
        assert_eq!(c.reward.uncharted_bonus, 4.0);
        assert_eq!(c.reward.point_badges, vec![(50, "Small".into()), (500, "Big".into())]);
        assert_eq!(c.integrity.plausibility.muacz, Some((-5.0, f64::INFINITY)));
        assert_eq!(c.campaigns.len(), 1);
        assert_eq!(c.campaigns[0].multiplier, 1.5);
        assert_eq!(c.campaigns[0].name, "monsoon");
        assert_eq!(c.tokens["abc"], Role::Chw("w7".into()));
        assert_eq!(c.tokens["boss"], Role::Supervisor);
    }

    #[test]
    fn errors_have_positions() {
        let e = Config::parse("grid.rows = 4\ngrid.cell_size_m = big\n").unwrap_err();
        assert_eq!((e.line, e.column), (2, 20));
        let e = Config::parse("no equals sign\n").unwrap_err();
        assert_eq!((e.line, e.column), (1, 1));
        let e = Config::parse("grid.rowz = 4\n").unwrap_err();
        assert!(e.message.contains("unknown key"));
        let e = Config::parse("grid.rows = 4\ngrid.rows = 5\n").unwrap_err();
        assert_eq!(e.line, 2);
        assert!(Config::parse("campaign.x.start = 2024-07-01T00:00:00Z\n").is_err());
        assert!(Config::parse("token.t = admin\n").is_err());
        assert!(Config::parse("grid.rows = 0\n").is_err());
    }
}
