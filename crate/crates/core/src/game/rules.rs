use serde::{Deserialize, Serialize};

/// Reward constants. The defaults are a starting schedule, overridable from
/// the configuration file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RewardRules {
    pub base_points: f64,
    pub uncharted_bonus: f64,
    pub stale_bonus: f64,
    /// A cell is stale once its last measurement is strictly older than this.
    pub stale_after_days: f64,
    pub streak_step: f64,
    pub streak_cap_days: u32,
    /// Point totals that each earn one badge, ascending.
    pub point_badges: Vec<(i64, String)>,
    pub uncharted_badge_cells: usize,
    pub streak_badge_days: u32,
    pub quest_ttl_days: f64,
    /// Offset from UTC (minutes) used to turn timestamps into activity dates.
    pub utc_offset_minutes: i32,
}

impl Default for RewardRules {
    fn default() -> Self {
        Self {
            base_points: 10.0,
            uncharted_bonus: 3.0,
            stale_bonus: 2.0,
            stale_after_days: 30.0,
            streak_step: 0.1,
            streak_cap_days: 10,
            point_badges: vec![(100, "Century".into()), (500, "Five Hundred".into()), (2000, "Two Thousand".into())],
            uncharted_badge_cells: 10,
            streak_badge_days: 7,
            quest_ttl_days: 7.0,
            utc_offset_minutes: 0,
        }
    }
}

impl RewardRules {
    pub fn streak_multiplier(&self, streak_days: u32) -> f64 {
        1.0 + self.streak_step * f64::from(streak_days.min(self.streak_cap_days))
    }

    pub fn activity_date(&self, at: chrono::DateTime<chrono::Utc>) -> chrono::NaiveDate {
        (at + chrono::Duration::minutes(i64::from(self.utc_offset_minutes))).date_naive()
    }
}
