use std::collections::{BTreeMap, BTreeSet};

use chrono::Duration;
use serde::{Deserialize, Serialize};

use super::AlertSeverity;
use crate::anthro::Measurement;

/// Measurements by one CHW carrying the identical (weight, height, MUAC)
/// tuple for at least two different children.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DuplicateGroup {
    pub chw_id: String,
    /// Time-ordered, ties by id.
    pub measurement_ids: Vec<String>,
    pub child_ids: BTreeSet<String>,
    pub severity: AlertSeverity,
}

impl DuplicateGroup {
    pub fn size(&self) -> usize {
        self.child_ids.len()
    }
}

type Key<'a> = (&'a str, (Option<u64>, Option<u64>, Option<u64>));

/// Groups copies that chain together within `window_days` of each other.
/// Tuples with fewer than two recorded values are not compared.
/// Groups of `warn_size` or more children warn; smaller ones are info.
pub fn find_duplicates(measurements: &[Measurement], window_days: f64, warn_size: usize) -> Vec<DuplicateGroup> {
    let window = Duration::milliseconds((window_days * 86_400_000.0) as i64);
    let mut by_key: BTreeMap<Key, Vec<&Measurement>> = BTreeMap::new();
    for m in measurements {
        let key = m.value_key();
        let present = [key.0, key.1, key.2].iter().filter(|v| v.is_some()).count();
        if present >= 2 {
            by_key.entry((m.chw_id.as_str(), key)).or_default().push(m);
        }
    }
    let mut groups = Vec::new();
    for ((chw, _), mut ms) in by_key {
        if ms.len() < 2 {
            continue;
        }
        ms.sort_by(|a, b| a.timestamp.cmp(&b.timestamp).then_with(|| a.id.cmp(&b.id)));
        let mut start = 0;
        for i in 1..=ms.len() {
            let split = i == ms.len() || ms[i].timestamp - ms[i - 1].timestamp > window;
            if !split {
                continue;
            }
            let run = &ms[start..i];
            let child_ids: BTreeSet<String> = run.iter().map(|m| m.child_id.clone()).collect();
            if child_ids.len() >= 2 {
                let severity = if child_ids.len() >= warn_size { AlertSeverity::Warn } else { AlertSeverity::Info };
                groups.push(DuplicateGroup {
                    chw_id: chw.to_string(),
                    measurement_ids: run.iter().map(|m| m.id.clone()).collect(),
                    child_ids,
                    severity,
                });
            }
            start = i;
        }
    }
    groups.sort_by(|a, b| a.chw_id.cmp(&b.chw_id).then_with(|| a.measurement_ids.cmp(&b.measurement_ids)));
    groups
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anthro::HeightMode;
    use crate::geostat::LatLon;
    use chrono::{DateTime, Utc};
    use rand::{Rng, SeedableRng};

    fn m(id: &str, child: &str, chw: &str, hours: i64, w: f64, h: f64, muac: f64) -> Measurement {
        Measurement {
            id: id.into(),
            child_id: child.into(),
            chw_id: chw.into(),
            timestamp: "2024-02-01T08:00:00Z".parse::<DateTime<Utc>>().unwrap() + Duration::hours(hours),
            location: LatLon::new(0.0, 0.0),
            weight: Some(w),
            height: Some(h),
            height_mode: HeightMode::Standing,
            muac: Some(muac),
            entry_duration: 30.0,
        }
    }

    #[test]
    fn distinct_tuples_no_groups() {
        let ms: Vec<Measurement> = (0..10)
            .map(|i| m(&format!("m{i}"), &format!("c{i}"), "w1", i, 10.0 + i as f64 * 0.1, 80.0, 140.0))
            .collect();
        assert!(find_duplicates(&ms, 1.0, 3).is_empty());
    }

    #[test]
    fn copied_to_four_children() {
        let ms: Vec<Measurement> =
            (0..4).map(|i| m(&format!("m{i}"), &format!("c{i}"), "w1", i, 11.2, 84.5, 139.0)).collect();
        let g = find_duplicates(&ms, 1.0, 3);
        assert_eq!(g.len(), 1);
        assert_eq!(g[0].size(), 4);
        assert_eq!(g[0].severity, AlertSeverity::Warn);
    }

    #[test]
    fn same_child_repeat_is_not_a_copy() {
        let ms = vec![m("a", "c1", "w1", 0, 11.2, 84.5, 139.0), m("b", "c1", "w1", 1, 11.2, 84.5, 139.0)];
        assert!(find_duplicates(&ms, 1.0, 3).is_empty());
    }

    #[test]
    fn different_chws_are_separate() {
        let ms = vec![m("a", "c1", "w1", 0, 11.2, 84.5, 139.0), m("b", "c2", "w2", 1, 11.2, 84.5, 139.0)];
        assert!(find_duplicates(&ms, 1.0, 3).is_empty());
    }

    /// Oracle: union-find over every pair sharing CHW and tuple within the window.
    fn pairwise_groups(ms: &[Measurement], window: Duration) -> BTreeSet<BTreeSet<String>> {
        let mut parent: Vec<usize> = (0..ms.len()).collect();
        fn find(p: &mut Vec<usize>, i: usize) -> usize {
            if p[i] != i {
                let r = find(p, p[i]);
                p[i] = r;
            }
            p[i]
        }
        for i in 0..ms.len() {
            for j in i + 1..ms.len() {
                let (a, b) = (&ms[i], &ms[j]);
                if a.chw_id == b.chw_id && a.value_key() == b.value_key() && (a.timestamp - b.timestamp).abs() <= window
                {
                    let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
                    parent[ri] = rj;
                }
            }
        }
        let mut comps: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
        for i in 0..ms.len() {
            let r = find(&mut parent, i);
            comps.entry(r).or_default().push(i);
        }
        comps
            .into_values()
            .filter(|c| c.iter().map(|&i| &ms[i].child_id).collect::<BTreeSet<_>>().len() >= 2)
            .map(|c| c.iter().map(|&i| ms[i].id.clone()).collect())
            .collect()
    }

    #[test]
    fn planted_copies_recovered() {
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(42);
        let mut ms = Vec::new();
        for i in 0..300 {
            ms.push(m(
                &format!("m{i:03}"),
                &format!("c{}", rng.random_range(0..120)),
                &format!("w{}", rng.random_range(0..5)),
                rng.random_range(0..24 * 60),
                rng.random_range(60..200) as f64 / 10.0 + rng.random_range(0.0..0.001),
                rng.random_range(600..1100) as f64 / 10.0,
                rng.random_range(100..180) as f64,
            ));
        }
        let mut planted = BTreeSet::new();
        for g in 0..6 {
            let src = ms[g * 40].clone();
            let mut ids = BTreeSet::from([src.id.clone()]);
            for k in 0..(2 + g % 3) {
                let mut copy = src.clone();
                copy.id = format!("p{g}-{k}");
                copy.child_id = format!("planted{g}-{k}");
                copy.timestamp = src.timestamp + Duration::minutes(10 * (k as i64 + 1));
                ids.insert(copy.id.clone());
                ms.push(copy);
            }
            planted.insert(ids);
        }
        let window = Duration::days(1);
        let found: BTreeSet<BTreeSet<String>> =
            find_duplicates(&ms, 1.0, 3).into_iter().map(|g| g.measurement_ids.into_iter().collect()).collect();
        assert_eq!(found, pairwise_groups(&ms, window));
        assert_eq!(found, planted);
    }
}
