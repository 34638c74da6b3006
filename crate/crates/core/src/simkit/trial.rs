use rand::Rng;
use rand_distr::StandardNormal;

use super::{stream, SimConfig};
use crate::analytics::{Group, Phase, TrialRecord};

/// Knowledge-test scores for every CHW of both arms in all three phases.
/// Each CHW has a persistent ability term, so phases correlate with `rho`.
pub fn simulate_trial(cfg: &SimConfig) -> Vec<TrialRecord> {
    let t = &cfg.trial;
    let mut rng = stream(cfg.seed, 4);
    let shared = t.rho.sqrt();
    let own = (1.0 - t.rho).sqrt();
    let mut out = Vec::with_capacity(2 * 3 * t.n_per_arm);
    for group in Group::ALL {
        for i in 0..t.n_per_arm {
            let chw_id = format!("{}-{:03}", group.as_str().to_ascii_lowercase(), i + 1);
            let ability: f64 = rng.sample(StandardNormal);
            for phase in Phase::ALL {
                let e: f64 = rng.sample(StandardNormal);
                let p = t.score(group, phase);
                out.push(TrialRecord {
                    chw_id: chw_id.clone(),
                    group,
                    phase,
                    score: p.mean + p.sd * (shared * ability + own * e),
                });
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::analytics::{t_tests, Summary};

    #[test]
    fn reproducible_and_complete() {
        let cfg = SimConfig::default();
        let a = simulate_trial(&cfg);
        assert_eq!(a, simulate_trial(&cfg));
        assert_eq!(a.len(), 94 * 6);
        assert!(t_tests(&a).is_ok());
    }

    #[test]
    fn phases_correlate_as_configured() {
        let mut cfg = SimConfig::default();
        cfg.trial.n_per_arm = 4000;
        cfg.trial.rho = 0.5;
        let recs = simulate_trial(&cfg);
        let get = |g: Group, p: Phase| -> Vec<f64> {
            recs.iter().filter(|r| r.group == g && r.phase == p).map(|r| r.score).collect()
        };
        let a = get(Group::Control, Phase::Baseline);
        let b = get(Group::Control, Phase::Post);
        let (sa, sb) = (Summary::of(&a).unwrap(), Summary::of(&b).unwrap());
        let cov = a.iter().zip(&b).map(|(x, y)| (x - sa.mean) * (y - sb.mean)).sum::<f64>() / (a.len() - 1) as f64;
        let r = cov / (sa.sd.unwrap() * sb.sd.unwrap());
        assert!((r - 0.5).abs() < 0.05, "r = {r}");
        assert!((sb.mean - 54.84).abs() < 3.0 * 14.96 / (4000f64).sqrt());
    }
}
