use std::collections::BTreeSet;

use chrono::NaiveDate;
use serde::{Deserialize, Serialize};

use super::{CellKind, GameError, RewardRules, ScoreEvent};

#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(transparent)]
pub struct Badge(pub String);

pub const PATHFINDER: &str = "Pathfinder";
pub const WEEK_STREAK: &str = "Week Streak";

/// A CHW's game state. Points, streaks and badges are all derivable from
/// `history`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GameState {
    pub chw_id: String,
    pub team_id: Option<String>,
    pub points: i64,
    pub streak_days: u32,
    pub best_streak: u32,
    pub last_active: Option<NaiveDate>,
    pub badges: BTreeSet<Badge>,
    /// Distinct cells first charted by this CHW.
    pub charted: BTreeSet<usize>,
    pub history: Vec<ScoreEvent>,
}

impl GameState {
    pub fn new(chw_id: impl Into<String>, team_id: Option<String>) -> Self {
        Self {
            chw_id: chw_id.into(),
            team_id,
            points: 0,
            streak_days: 0,
            best_streak: 0,
            last_active: None,
            badges: BTreeSet::new(),
            charted: BTreeSet::new(),
            history: Vec::new(),
        }
    }

    /// Streak update that ignores dates earlier than the last active day
    /// (late offline uploads keep the current streak).
    pub fn observe_activity(&mut self, date: NaiveDate) {
        if let Ok(streak) = next_streak(self.streak_days, self.last_active, date) {
            self.streak_days = streak;
            self.last_active = Some(date);
            self.best_streak = self.best_streak.max(streak);
        }
    }

    /// Appends a score event and returns any badges it unlocked.
    pub fn record(&mut self, event: ScoreEvent, rules: &RewardRules) -> Vec<Badge> {
        self.observe_activity(event.activity_date);
        self.points += event.amount;
        if let (CellKind::Uncharted, Some(c)) = (event.cell_kind, event.cell) {
            self.charted.insert(c);
        }
        self.history.push(event);
        award_badges(self, rules)
    }

    /// Badges `record(event)` would unlock, without copying the ledger.
    pub fn preview_badges(&self, event: &ScoreEvent, rules: &RewardRules) -> Vec<Badge> {
        let mut probe = self.summary();
        probe.record(event.clone(), rules)
    }

    /// Everything except the ledger; cheap to clone for previews.
    pub fn summary(&self) -> GameState {
        GameState {
            chw_id: self.chw_id.clone(),
            team_id: self.team_id.clone(),
            points: self.points,
            streak_days: self.streak_days,
            best_streak: self.best_streak,
            last_active: self.last_active,
            badges: self.badges.clone(),
            charted: self.charted.clone(),
            history: Vec::new(),
        }
    }

    /// Rebuilds a state from its ledger.
    pub fn replay<'a, I>(chw_id: &str, team_id: Option<String>, events: I, rules: &RewardRules) -> Self
    where
        I: IntoIterator<Item = &'a ScoreEvent>,
    {
        let mut s = Self::new(chw_id, team_id);
        for ev in events {
            s.record(ev.clone(), rules);
        }
        s
    }

    /// Distinct cells first charted by this CHW.
    pub fn uncharted_cells(&self) -> usize {
        self.charted.len()
    }

    pub fn points_between(&self, from: chrono::DateTime<chrono::Utc>, to: chrono::DateTime<chrono::Utc>) -> i64 {
        self.history.iter().filter(|e| e.timestamp >= from && e.timestamp < to).map(|e| e.amount).sum()
    }
}

/// Consecutive-day streak: next day increments, a gap of two or more days
/// restarts at 1, the same day is a no-op.
pub fn update_streak(state: &GameState, activity_date: NaiveDate) -> Result<GameState, GameError> {
    let mut next = state.clone();
    next.streak_days = next_streak(state.streak_days, state.last_active, activity_date)?;
    next.last_active = Some(activity_date);
    next.best_streak = next.best_streak.max(next.streak_days);
    Ok(next)
}

fn next_streak(streak: u32, last_active: Option<NaiveDate>, date: NaiveDate) -> Result<u32, GameError> {
    match last_active {
        Some(last) if date < last => {
            Err(GameError::ContractViolation(format!("activity date {date} precedes last active day {last}")))
        }
        Some(last) if date == last => Ok(streak),
        Some(last) if (date - last).num_days() == 1 => Ok(streak + 1),
        _ => Ok(1),
    }
}

/// Awards threshold badges not yet held; idempotent.
pub fn award_badges(state: &mut GameState, rules: &RewardRules) -> Vec<Badge> {
    let mut earned = Vec::new();
    let mut grant = |state: &mut GameState, name: &str| {
        let badge = Badge(name.to_string());
        if state.badges.insert(badge.clone()) {
            earned.push(badge);
        }
    };
    for (threshold, name) in &rules.point_badges {
        if state.points >= *threshold {
            grant(state, name);
        }
    }
    if rules.uncharted_badge_cells > 0 && state.uncharted_cells() >= rules.uncharted_badge_cells {
        grant(state, PATHFINDER);
    }
    if rules.streak_badge_days > 0 && state.best_streak >= rules.streak_badge_days {
        grant(state, WEEK_STREAK);
    }
    earned
}

#[cfg(test)]
mod tests {
    use super::*;
    use chrono::{Duration, TimeZone, Utc};

    fn d(day: u32) -> NaiveDate {
        NaiveDate::from_ymd_opt(2024, 3, 1).unwrap() + Duration::days(day as i64)
    }

    fn event(day: u32, amount: i64, kind: CellKind, cell: usize) -> ScoreEvent {
        ScoreEvent {
            measurement_id: format!("m{day}-{cell}"),
            chw_id: "w1".into(),
            timestamp: Utc.from_utc_datetime(&d(day).and_hms_opt(10, 0, 0).unwrap()),
            activity_date: d(day),
            cell: Some(cell),
            cell_kind: kind,
            base: 10.0,
            cell_bonus: 1.0,
            streak_days: 0,
            streak_multiplier: 1.0,
            campaign_multiplier: 1.0,
            campaign_id: None,
            amount,
        }
    }

    #[test]
    fn streak_rules() {
        let mut s = GameState::new("w1", None);
        s.streak_days = 4;
        s.last_active = Some(d(10));
        assert_eq!(update_streak(&s, d(11)).unwrap().streak_days, 5);
        assert_eq!(update_streak(&s, d(10)).unwrap().streak_days, 4);
        assert_eq!(update_streak(&s, d(13)).unwrap().streak_days, 1);
        assert_eq!(update_streak(&s, d(12)).unwrap().streak_days, 1);
        assert!(matches!(update_streak(&s, d(9)), Err(GameError::ContractViolation(_))));
        assert_eq!(update_streak(&GameState::new("w", None), d(0)).unwrap().streak_days, 1);
    }

    #[test]
    fn thirty_day_pattern_matches_replay_oracle() {
        // active days chosen with gaps of 1, 2 and 3 days
        let pattern = [0u32, 1, 2, 3, 5, 6, 6, 7, 10, 11, 12, 13, 14, 15, 16, 17, 20, 22, 23, 24, 29];
        let mut s = GameState::new("w1", None);
        let mut oracle_streak = 0u32;
        let mut prev: Option<u32> = None;
        for &day in &pattern {
            s = update_streak(&s, d(day)).unwrap();
            oracle_streak = match prev {
                Some(p) if p == day => oracle_streak,
                Some(p) if day == p + 1 => oracle_streak + 1,
                _ => 1,
            };
            prev = Some(day);
            assert_eq!(s.streak_days, oracle_streak, "day {day}");
        }
        assert_eq!(s.best_streak, 8);
    }

    #[test]
    fn century_badge_once() {
        let rules = RewardRules::default();
        let mut s = GameState::new("w1", None);
        assert!(s.record(event(0, 99, CellKind::Fresh, 0), &rules).is_empty());
        let got = s.record(event(0, 1, CellKind::Fresh, 0), &rules);
        assert_eq!(got, vec![Badge("Century".into())]);
        assert!(s.record(event(0, 10, CellKind::Fresh, 0), &rules).is_empty());
        assert!(award_badges(&mut s, &rules).is_empty());
    }

    #[test]
    fn pathfinder_and_streak_badges() {
        let rules = RewardRules::default();
        let mut s = GameState::new("w1", None);
        for day in 0..10 {
            s.record(event(day, 30, CellKind::Uncharted, day as usize), &rules);
        }
        assert!(s.badges.contains(&Badge(PATHFINDER.into())));
        assert!(s.badges.contains(&Badge(WEEK_STREAK.into())));
        assert!(s.badges.contains(&Badge("Century".into())));
        assert_eq!(s.points, 300);
    }

    #[test]
    fn replay_reproduces_state() {
        let rules = RewardRules::default();
        let mut live = GameState::new("w1", Some("t1".into()));
        let days = [0u32, 1, 2, 2, 4, 5, 6, 7, 8, 9, 10, 3, 11, 12];
        for (i, &day) in days.iter().enumerate() {
            let kind = [CellKind::Fresh, CellKind::Stale, CellKind::Uncharted][i % 3];
            live.record(event(day, 10 + i as i64 * 7, kind, i), &rules);
        }
        let rebuilt = GameState::replay("w1", Some("t1".into()), &live.history, &rules);
        assert_eq!(rebuilt, live);
        assert_eq!(live.points, live.history.iter().map(|e| e.amount).sum::<i64>());
    }
}
