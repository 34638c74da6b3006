//! Points, streaks and badges for one CHW over a fortnight, then a team
//! leaderboard.

use std::collections::BTreeMap;

use anthroquest::game::{leaderboard, score_submission, CellContext, GameState, LeaderboardMember, RewardRules};
use anthroquest::integrity::Screening;
use anthroquest::{HeightMode, LatLon, Measurement};
use chrono::{DateTime, Duration, Utc};

fn main() {
    let rules = RewardRules::default();
    let t0: DateTime<Utc> = "2024-05-01T09:00:00Z".parse().unwrap();
    let mut states = BTreeMap::new();
    for (chw, team, days) in [("w1", "t1", 14), ("w2", "t1", 5), ("w3", "t2", 9)] {
        let mut s = GameState::new(chw, Some(team.into()));
        let mut last_seen: BTreeMap<usize, DateTime<Utc>> = BTreeMap::new();
        for d in 0..days {
            let at = t0 + Duration::days(d);
            let cell = (d % 4) as usize;
            let ctx = CellContext::from_last(Some(cell), last_seen.get(&cell).copied(), at, &rules);
            let m = Measurement {
                id: format!("{chw}-{d}"),
                child_id: format!("c{d}"),
                chw_id: chw.into(),
                timestamp: at,
                location: LatLon::new(18.5, 73.8),
                weight: Some(11.0),
                height: Some(84.0),
                height_mode: HeightMode::Standing,
                muac: Some(140.0),
                entry_duration: 90.0,
            };
            s.observe_activity(rules.activity_date(at));
            let ev = score_submission(&m, &Screening::default(), &ctx, &s, &[], &rules).unwrap();
            let (amount, kind) = (ev.amount, ev.cell_kind);
            for b in s.record(ev, &rules) {
                println!("{chw} day {d}: badge {}", b.0);
            }
            if chw == "w1" {
                println!("{chw} day {d}: {amount} points ({kind:?}, streak {})", s.streak_days);
            }
            last_seen.insert(cell, at);
        }
        states.insert(chw.to_string(), s);
    }
    let members: Vec<LeaderboardMember> = states
        .values()
        .map(|s| LeaderboardMember { chw_id: s.chw_id.clone(), team_id: s.team_id.clone(), opted_out: false })
        .collect();
    let board = leaderboard(&states, &members, t0, t0 + Duration::days(30));
    for e in &board.individuals {
        println!("#{} {} {}", e.rank, e.id, e.points);
    }
    for e in &board.teams {
        println!("team #{} {} {}", e.rank, e.id, e.points);
    }
}
