use std::cmp::Ordering;

use chrono::{DateTime, Duration, Utc};
use serde::{Deserialize, Serialize};

use super::{campaign_multiplier, Campaign, GameError, RewardRules};
use crate::geostat::{haversine_m, CoverageCell, CoverageStatus, GridSpec, LatLon};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum QuestKind {
    Campaign,
    Stale,
    Uncharted,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Quest {
    pub id: String,
    pub chw_id: String,
    pub target_cell: usize,
    pub kind: QuestKind,
    pub bonus_multiplier: f64,
    pub distance_m: f64,
    pub generated_at: DateTime<Utc>,
    pub expires_at: DateTime<Utc>,
}

struct Candidate {
    cell: usize,
    kind: QuestKind,
    priority: f64,
    distance: f64,
}

/// Ranks cells worth visiting for a CHW living at `home`.
///
/// Uncharted populated cells come first, then stale ones ranked by
/// `staleness / stale_after * (1 + km from home)`. While a campaign runs,
/// remaining slots go to cells with children not yet measured in the window.
/// Ties favour the more distant cell, then the lower index.
#[allow(clippy::too_many_arguments)]
pub fn generate_quests(
    coverage: &[CoverageCell],
    spec: &GridSpec,
    chw_id: &str,
    home: LatLon,
    max_quests: usize,
    now: DateTime<Utc>,
    campaigns: &[Campaign],
    rules: &RewardRules,
) -> Result<Vec<Quest>, GameError> {
    if max_quests == 0 {
        return Err(GameError::ContractViolation("max_quests must be at least 1".into()));
    }
    let (camp_mult, _) = campaign_multiplier(campaigns, now);
    let campaign_on = campaigns.iter().any(|c| c.is_active(now));
    let mut candidates: Vec<Candidate> = coverage
        .iter()
        .filter(|c| c.cell < spec.len())
        .filter_map(|c| {
            let distance = haversine_m(home, spec.centroid(c.cell));
            let weight = 1.0 + distance / 1000.0;
            match c.status {
                CoverageStatus::Empty => None,
                CoverageStatus::Uncharted => {
                    Some(Candidate { cell: c.cell, kind: QuestKind::Uncharted, priority: f64::INFINITY, distance })
                }
                CoverageStatus::Measured => {
                    let staleness = c.staleness.unwrap_or(0.0);
                    if staleness > rules.stale_after_days {
                        let score = staleness / rules.stale_after_days.max(f64::MIN_POSITIVE);
                        Some(Candidate { cell: c.cell, kind: QuestKind::Stale, priority: score * weight, distance })
                    } else if campaign_on && c.n_measured_window < c.n_children_known {
                        let gap = 1.0 - c.n_measured_window as f64 / c.n_children_known as f64;
                        Some(Candidate { cell: c.cell, kind: QuestKind::Campaign, priority: gap * weight, distance })
                    } else {
                        None
                    }
                }
            }
        })
        .collect();
    candidates.sort_by(|a, b| {
        b.kind
            .cmp(&a.kind)
            .then_with(|| b.priority.partial_cmp(&a.priority).unwrap_or(Ordering::Equal))
            .then_with(|| b.distance.partial_cmp(&a.distance).unwrap_or(Ordering::Equal))
            .then_with(|| a.cell.cmp(&b.cell))
    });
    let ttl = Duration::milliseconds((rules.quest_ttl_days * 86_400_000.0).max(1.0) as i64);
    Ok(candidates
        .into_iter()
        .take(max_quests)
        .map(|c| {
            let bonus = match c.kind {
                QuestKind::Uncharted => rules.uncharted_bonus,
                QuestKind::Stale => rules.stale_bonus,
                QuestKind::Campaign => 1.0,
            };
            Quest {
                id: format!("q-{chw_id}-{}-{}", c.cell, now.timestamp()),
                chw_id: chw_id.to_string(),
                target_cell: c.cell,
                kind: c.kind,
                bonus_multiplier: (bonus * camp_mult).max(1.0),
                distance_m: c.distance,
                generated_at: now,
                expires_at: now + ttl,
            }
        })
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn spec() -> GridSpec {
        GridSpec::new(LatLon::new(18.5, 73.8), 250.0, 4, 5).unwrap()
    }

    fn now() -> DateTime<Utc> {
        "2024-09-01T06:00:00Z".parse().unwrap()
    }

    fn cell(i: usize, status: CoverageStatus, staleness: Option<f64>) -> CoverageCell {
        CoverageCell {
            cell: i,
            n_children_known: if status == CoverageStatus::Empty { 0 } else { 3 },
            n_measured_window: if matches!(staleness, Some(s) if s <= 30.0) { 3 } else { 0 },
            last_measurement: staleness.map(|s| now() - Duration::hours((s * 24.0) as i64)),
            staleness,
            status,
        }
    }

    #[test]
    fn all_fresh_no_quests() {
        let cov: Vec<_> = (0..20).map(|i| cell(i, CoverageStatus::Measured, Some(3.0))).collect();
        let q =
            generate_quests(&cov, &spec(), "w1", spec().centroid(0), 5, now(), &[], &RewardRules::default()).unwrap();
        assert!(q.is_empty());
    }

    #[test]
    fn single_uncharted_cell() {
        let mut cov: Vec<_> = (0..20).map(|i| cell(i, CoverageStatus::Measured, Some(3.0))).collect();
        cov[13] = cell(13, CoverageStatus::Uncharted, None);
        let q =
            generate_quests(&cov, &spec(), "w1", spec().centroid(0), 5, now(), &[], &RewardRules::default()).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].target_cell, 13);
        assert_eq!(q[0].kind, QuestKind::Uncharted);
        assert_eq!(q[0].bonus_multiplier, 3.0);
        assert!(q[0].expires_at > q[0].generated_at);
    }

    #[test]
    fn zero_max_is_contract_violation() {
        assert!(
            generate_quests(&[], &spec(), "w1", spec().centroid(0), 0, now(), &[], &RewardRules::default()).is_err()
        );
        assert!(generate_quests(&[], &spec(), "w1", spec().centroid(0), 1, now(), &[], &RewardRules::default())
            .unwrap()
            .is_empty());
    }

    /// Oracle: score every cell independently and sort by (rank, distance, index).
    #[test]
    fn mixed_grid_matches_exhaustive_ranking() {
        let s = spec();
        let rules = RewardRules::default();
        for seed in 0..25 {
            let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(seed);
            let cov: Vec<CoverageCell> = (0..20)
                .map(|i| match rng.random_range(0..4) {
                    0 => cell(i, CoverageStatus::Empty, None),
                    1 => cell(i, CoverageStatus::Uncharted, None),
                    _ => cell(i, CoverageStatus::Measured, Some(rng.random_range(0..90) as f64)),
                })
                .collect();
            let home = s.centroid(rng.random_range(0..20));
            let got = generate_quests(&cov, &s, "w1", home, 5, now(), &[], &rules).unwrap();

            let mut all: Vec<(f64, f64, f64, usize)> = Vec::new();
            for c in &cov {
                let dist = haversine_m(home, s.centroid(c.cell));
                let rank = match (c.status, c.staleness) {
                    (CoverageStatus::Uncharted, _) => (2.0, f64::INFINITY),
                    (CoverageStatus::Measured, Some(st)) if st > 30.0 => (1.0, st / 30.0 * (1.0 + dist / 1000.0)),
                    _ => continue,
                };
                all.push((rank.0, rank.1, dist, c.cell));
            }
            all.sort_by(|a, b| {
                b.0.partial_cmp(&a.0)
                    .unwrap()
                    .then(b.1.partial_cmp(&a.1).unwrap())
                    .then(b.2.partial_cmp(&a.2).unwrap())
                    .then(a.3.cmp(&b.3))
            });
            let want: Vec<usize> = all.iter().take(5).map(|x| x.3).collect();
            let got_cells: Vec<usize> = got.iter().map(|q| q.target_cell).collect();
            assert_eq!(got_cells, want, "seed {seed}");
            for q in &got {
                assert!(q.target_cell < s.len());
                if q.kind == QuestKind::Uncharted {
                    assert!(cov[q.target_cell].is_uncharted());
                }
            }
        }
    }

    #[test]
    fn ties_prefer_distant_cells() {
        let s = spec();
        let cov: Vec<_> = (0..20).map(|i| cell(i, CoverageStatus::Uncharted, None)).collect();
        let q = generate_quests(&cov, &s, "w1", s.centroid(0), 3, now(), &[], &RewardRules::default()).unwrap();
        // the far corner of a 4x5 grid from cell 0 is cell 19
        assert_eq!(q[0].target_cell, 19);
    }

    #[test]
    fn campaign_fills_remaining_slots() {
        let s = spec();
        let mut cov: Vec<_> = (0..20).map(|i| cell(i, CoverageStatus::Measured, Some(3.0))).collect();
        cov[7].n_measured_window = 1;
        let camp = Campaign {
            id: "c".into(),
            name: "Poshan month".into(),
            start: now() - Duration::days(1),
            end: now() + Duration::days(1),
            multiplier: 1.5,
            narrative_stage: 2,
        };
        let q = generate_quests(&cov, &s, "w1", s.centroid(0), 5, now(), &[camp], &RewardRules::default()).unwrap();
        assert_eq!(q.len(), 1);
        assert_eq!(q[0].kind, QuestKind::Campaign);
        assert_eq!(q[0].target_cell, 7);
        assert_eq!(q[0].bonus_multiplier, 1.5);
    }
}
