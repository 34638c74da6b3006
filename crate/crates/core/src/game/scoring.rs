use chrono::{DateTime, NaiveDate, Utc};
use serde::{Deserialize, Serialize};

use super::{GameError, GameState, RewardRules};
use crate::anthro::Measurement;
use crate::integrity::Screening;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CellKind {
    Fresh,
    Stale,
    Uncharted,
}

/// State of the submission's grid cell just before the submission.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellContext {
    pub cell: Option<usize>,
    pub kind: CellKind,
    pub staleness_days: Option<f64>,
}

impl CellContext {
    /// Classifies a cell from its previous measurement time.
    pub fn from_last(cell: Option<usize>, last: Option<DateTime<Utc>>, at: DateTime<Utc>, rules: &RewardRules) -> Self {
        match last {
            None => Self { cell, kind: CellKind::Uncharted, staleness_days: None },
            Some(t) => {
                let days = ((at - t).num_milliseconds() as f64 / 86_400_000.0).max(0.0);
                let kind = if days > rules.stale_after_days { CellKind::Stale } else { CellKind::Fresh };
                Self { cell, kind, staleness_days: Some(days) }
            }
        }
    }

    pub fn fresh(cell: Option<usize>) -> Self {
        Self { cell, kind: CellKind::Fresh, staleness_days: Some(0.0) }
    }
}

/// A seasonal campaign or storyline stage with a point multiplier.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Campaign {
    pub id: String,
    pub name: String,
    pub start: DateTime<Utc>,
    pub end: DateTime<Utc>,
    pub multiplier: f64,
    pub narrative_stage: u32,
}

impl Campaign {
    pub fn validate(&self) -> Result<(), GameError> {
        if self.end <= self.start {
            return Err(GameError::ContractViolation(format!("campaign {} ends before it starts", self.id)));
        }
        if !(self.multiplier >= 1.0) {
            return Err(GameError::ContractViolation(format!("campaign {} multiplier below 1", self.id)));
        }
        Ok(())
    }

    pub fn is_active(&self, at: DateTime<Utc>) -> bool {
        self.start <= at && at < self.end
    }
}

/// The largest multiplier among campaigns active at `at` (1 when none), and its id.
pub fn campaign_multiplier(campaigns: &[Campaign], at: DateTime<Utc>) -> (f64, Option<String>) {
    campaigns.iter().filter(|c| c.is_active(at)).fold((1.0, None), |(best, id), c| {
        if c.multiplier > best {
            (c.multiplier, Some(c.id.clone()))
        } else {
            (best, id)
        }
    })
}

/// One ledger entry.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreEvent {
    pub measurement_id: String,
    pub chw_id: String,
    pub timestamp: DateTime<Utc>,
    pub activity_date: NaiveDate,
    pub cell: Option<usize>,
    pub cell_kind: CellKind,
    pub base: f64,
    pub cell_bonus: f64,
    pub streak_days: u32,
    pub streak_multiplier: f64,
    pub campaign_multiplier: f64,
    pub campaign_id: Option<String>,
    pub amount: i64,
}

/// Scores a screened submission against a snapshot of the CHW's state.
///
/// `points = base * cell_bonus * (1 + step * min(streak, cap)) * campaign`,
/// rounded to whole points. The streak is read from `state` as given.
pub fn score_submission(
    m: &Measurement,
    screening: &Screening,
    ctx: &CellContext,
    state: &GameState,
    campaigns: &[Campaign],
    rules: &RewardRules,
) -> Result<ScoreEvent, GameError> {
    m.validate().map_err(|e| GameError::ContractViolation(format!("unvalidated measurement {}: {e}", m.id)))?;
    if screening.blocks() {
        return Err(GameError::ContractViolation(format!("measurement {} is blocked by screening", m.id)));
    }
    if m.chw_id != state.chw_id {
        return Err(GameError::ContractViolation(format!(
            "measurement {} belongs to {}, state to {}",
            m.id, m.chw_id, state.chw_id
        )));
    }
    let cell_bonus = match ctx.kind {
        CellKind::Uncharted => rules.uncharted_bonus,
        CellKind::Stale => rules.stale_bonus,
        CellKind::Fresh => 1.0,
    };
    let streak_multiplier = rules.streak_multiplier(state.streak_days);
    let (campaign_mult, campaign_id) = campaign_multiplier(campaigns, m.timestamp);
    let raw = rules.base_points * cell_bonus * streak_multiplier * campaign_mult;
    Ok(ScoreEvent {
        measurement_id: m.id.clone(),
        chw_id: m.chw_id.clone(),
        timestamp: m.timestamp,
        activity_date: rules.activity_date(m.timestamp),
        cell: ctx.cell,
        cell_kind: ctx.kind,
        base: rules.base_points,
        cell_bonus,
        streak_days: state.streak_days,
        streak_multiplier,
        campaign_multiplier: campaign_mult,
        campaign_id,
        amount: raw.round() as i64,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anthro::HeightMode;
    use crate::geostat::LatLon;
    use crate::integrity::{AlertKind, AlertSeverity, Evidence, Flag};
    use chrono::Duration;

    fn at() -> DateTime<Utc> {
        "2024-07-15T10:00:00Z".parse().unwrap()
    }

    fn m() -> Measurement {
        Measurement {
            id: "m1".into(),
            child_id: "c1".into(),
            chw_id: "w1".into(),
            timestamp: at(),
            location: LatLon::new(19.0, 73.0),
            weight: Some(11.0),
            height: Some(82.0),
            height_mode: HeightMode::Standing,
            muac: Some(138.0),
            entry_duration: 50.0,
        }
    }

    fn state(streak: u32) -> GameState {
        let mut s = GameState::new("w1", None);
        s.streak_days = streak;
        s
    }

    fn campaign(mult: f64) -> Campaign {
        Campaign {
            id: format!("camp{mult}"),
            name: "Monsoon drive".into(),
            start: at() - Duration::days(3),
            end: at() + Duration::days(3),
            multiplier: mult,
            narrative_stage: 1,
        }
    }

    #[test]
    fn base_case_is_ten() {
        let rules = RewardRules::default();
        let ev = score_submission(&m(), &Screening::default(), &CellContext::fresh(Some(0)), &state(0), &[], &rules)
            .unwrap();
        assert_eq!(ev.amount, 10);
    }

    #[test]
    fn uncharted_is_thirty() {
        let rules = RewardRules::default();
        let ctx = CellContext::from_last(Some(4), None, at(), &rules);
        assert_eq!(ctx.kind, CellKind::Uncharted);
        let ev = score_submission(&m(), &Screening::default(), &ctx, &state(0), &[], &rules).unwrap();
        assert_eq!(ev.amount, 30);
    }

    #[test]
    fn stale_streak_campaign_is_forty_five() {
        let rules = RewardRules::default();
        let ctx = CellContext::from_last(Some(4), Some(at() - Duration::days(40)), at(), &rules);
        assert_eq!(ctx.kind, CellKind::Stale);
        // hand evaluation: 10 * 2 * (1 + 0.1 * 5) * 1.5
        let want = 10.0 * 2.0 * (1.0 + 0.1 * 5.0) * 1.5;
        assert_eq!(want, 45.0);
        let ev =
            score_submission(&m(), &Screening::default(), &ctx, &state(5), &[campaign(1.5), campaign(1.2)], &rules)
                .unwrap();
        assert_eq!(ev.amount, 45);
        assert_eq!(ev.campaign_id.as_deref(), Some("camp1.5"));
    }

    #[test]
    fn exactly_thirty_days_is_not_stale() {
        let rules = RewardRules::default();
        let ctx = CellContext::from_last(None, Some(at() - Duration::days(30)), at(), &rules);
        assert_eq!(ctx.kind, CellKind::Fresh);
    }

    #[test]
    fn streak_cap() {
        let rules = RewardRules::default();
        let ev =
            score_submission(&m(), &Screening::default(), &CellContext::fresh(None), &state(25), &[], &rules).unwrap();
        assert_eq!(ev.amount, 20);
    }

    #[test]
    fn blocked_and_invalid_measurements_error() {
        let rules = RewardRules::default();
        let blocked = Screening {
            flags: vec![Flag {
                kind: AlertKind::ExtremeZ,
                severity: AlertSeverity::Block,
                evidence: Evidence::new(6.2, 5.0, ""),
            }],
        };
        let ctx = CellContext::fresh(None);
        assert!(matches!(
            score_submission(&m(), &blocked, &ctx, &state(0), &[], &rules),
            Err(GameError::ContractViolation(_))
        ));
        let mut bad = m();
        bad.weight = Some(55.0);
        assert!(score_submission(&bad, &Screening::default(), &ctx, &state(0), &[], &rules).is_err());
    }

    #[test]
    fn campaign_window_is_half_open() {
        let c = campaign(2.0);
        assert!(c.is_active(c.start));
        assert!(!c.is_active(c.end));
        assert_eq!(campaign_multiplier(std::slice::from_ref(&c), c.end).0, 1.0);
        let mut bad = c;
        bad.end = bad.start;
        assert!(bad.validate().is_err());
    }

    proptest::proptest! {
        #[test]
        fn uncharted_never_pays_less_than_fresh(streak in 0u32..40, mult in 1.0f64..3.0) {
            let rules = RewardRules::default();
            let camps = [campaign(mult)];
            let st = state(streak);
            let fresh = score_submission(&m(), &Screening::default(), &CellContext::fresh(None), &st, &camps, &rules).unwrap();
            let unch = score_submission(&m(), &Screening::default(), &CellContext::from_last(None, None, at(), &rules), &st, &camps, &rules).unwrap();
            proptest::prop_assert!(unch.amount >= fresh.amount);
            let again = score_submission(&m(), &Screening::default(), &CellContext::fresh(None), &st, &camps, &rules).unwrap();
            proptest::prop_assert_eq!(fresh, again);
        }
    }
}
