use std::collections::BTreeMap;

use chrono::{DateTime, Utc};
use serde::{Deserialize, Serialize};

use super::GameState;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct LeaderboardMember {
    pub chw_id: String,
    pub team_id: Option<String>,
    pub opted_out: bool,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct BoardEntry {
    pub rank: usize,
    pub id: String,
    pub points: i64,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Leaderboard {
    pub from: DateTime<Utc>,
    pub to: DateTime<Utc>,
    pub individuals: Vec<BoardEntry>,
    pub teams: Vec<BoardEntry>,
}

fn ranked(mut rows: Vec<(String, i64)>) -> Vec<BoardEntry> {
    rows.sort_by(|a, b| b.1.cmp(&a.1).then_with(|| a.0.cmp(&b.0)));
    // standard competition ranking: equal points share a rank
    let mut out = Vec::with_capacity(rows.len());
    for (i, (id, points)) in rows.into_iter().enumerate() {
        let rank = match out.last() {
            Some(BoardEntry { rank, points: p, .. }) if *p == points => *rank,
            _ => i + 1,
        };
        out.push(BoardEntry { rank, id, points });
    }
    out
}

/// Points earned in `[from, to)` by each member and each team.
///
/// Opted-out CHWs are hidden from the individual board but their points
/// still count toward their team.
pub fn leaderboard(
    states: &BTreeMap<String, GameState>,
    members: &[LeaderboardMember],
    from: DateTime<Utc>,
    to: DateTime<Utc>,
) -> Leaderboard {
    let mut individuals = Vec::new();
    let mut teams: BTreeMap<String, i64> = BTreeMap::new();
    for m in members {
        let pts = states.get(&m.chw_id).map_or(0, |s| s.points_between(from, to));
        if !m.opted_out {
            individuals.push((m.chw_id.clone(), pts));
        }
        if let Some(t) = &m.team_id {
            *teams.entry(t.clone()).or_default() += pts;
        }
    }
    Leaderboard { from, to, individuals: ranked(individuals), teams: ranked(teams.into_iter().collect()) }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::game::{CellKind, ScoreEvent};
    use chrono::Duration;

    fn t0() -> DateTime<Utc> {
        "2024-06-01T00:00:00Z".parse().unwrap()
    }

    fn state(id: &str, amounts: &[(i64, i64)]) -> GameState {
        let mut s = GameState::new(id, None);
        for (i, &(day, amount)) in amounts.iter().enumerate() {
            let ts = t0() + Duration::days(day);
            s.points += amount;
            s.history.push(ScoreEvent {
                measurement_id: format!("{id}-{i}"),
                chw_id: id.into(),
                timestamp: ts,
                activity_date: ts.date_naive(),
                cell: None,
                cell_kind: CellKind::Fresh,
                base: 10.0,
                cell_bonus: 1.0,
                streak_days: 0,
                streak_multiplier: 1.0,
                campaign_multiplier: 1.0,
                campaign_id: None,
                amount,
            });
        }
        s
    }

    fn member(id: &str, team: &str, opted_out: bool) -> LeaderboardMember {
        LeaderboardMember { chw_id: id.into(), team_id: Some(team.into()), opted_out }
    }

    #[test]
    fn window_opt_out_and_ties() {
        let states: BTreeMap<_, _> = [
            ("a", state("a", &[(0, 10), (1, 20), (9, 500)])),
            ("b", state("b", &[(2, 30)])),
            ("c", state("c", &[(3, 45)])),
            ("d", state("d", &[(1, 30)])),
        ]
        .into_iter()
        .map(|(k, v)| (k.to_string(), v))
        .collect();
        let members = vec![
            member("a", "north", false),
            member("b", "north", false),
            member("c", "south", true),
            member("d", "south", false),
            member("e", "south", false),
        ];
        let lb = leaderboard(&states, &members, t0(), t0() + Duration::days(7));
        let ids: Vec<_> = lb.individuals.iter().map(|e| (e.id.as_str(), e.points, e.rank)).collect();
        assert_eq!(ids, vec![("a", 30, 1), ("b", 30, 1), ("d", 30, 1), ("e", 0, 4)]);
        let teams: Vec<_> = lb.teams.iter().map(|e| (e.id.as_str(), e.points)).collect();
        assert_eq!(teams, vec![("south", 75), ("north", 60)]);
    }

    #[test]
    fn sums_match_ledger() {
        let s = state("a", &[(0, 5), (3, 7), (6, 11), (7, 100)]);
        let total: i64 = s.history.iter().filter(|e| e.timestamp < t0() + Duration::days(7)).map(|e| e.amount).sum();
        let states: BTreeMap<_, _> = [("a".to_string(), s)].into_iter().collect();
        let lb = leaderboard(&states, &[member("a", "x", false)], t0(), t0() + Duration::days(7));
        assert_eq!(lb.individuals[0].points, total);
        assert_eq!(lb.teams[0].points, total);
    }
}
