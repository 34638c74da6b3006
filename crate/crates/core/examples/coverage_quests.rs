//! Coverage and staleness per cell, then the quests a CHW gets from it.

use anthroquest::game::{generate_quests, RewardRules};
use anthroquest::geostat::{coverage_map, ChildLocation, CoverageStatus, GridSpec, LatLon, MeasurementStamp};
use chrono::{DateTime, Duration, Utc};

fn main() {
    let grid = GridSpec::new(LatLon::new(18.45, 73.78), 250.0, 3, 4).unwrap();
    let now: DateTime<Utc> = "2024-08-01T08:00:00Z".parse().unwrap();
    let children: Vec<ChildLocation> = [0, 1, 2, 5, 6, 9, 11]
        .iter()
        .map(|&c| ChildLocation { child_id: format!("c{c}"), home: grid.centroid(c) })
        .collect();
    // c0 and c1 seen last week, c2 two months ago, the rest never
    let stamps: Vec<MeasurementStamp> = [("c0", 7), ("c1", 6), ("c2", 60)]
        .iter()
        .map(|&(id, days)| MeasurementStamp {
            child_id: id.into(),
            location: children.iter().find(|c| c.child_id == id).unwrap().home,
            at: now - Duration::days(days),
        })
        .collect();

    let coverage = coverage_map(&children, &stamps, &grid, 30.0, now);
    for c in coverage.iter().filter(|c| c.status != CoverageStatus::Empty) {
        println!("cell {:>2}: {:?}, staleness {:?}", c.cell, c.status, c.staleness);
    }
    let quests =
        generate_quests(&coverage, &grid, "w1", grid.centroid(0), 3, now, &[], &RewardRules::default()).unwrap();
    for q in &quests {
        println!("quest {}: cell {} {:?} x{} ({:.0} m)", q.id, q.target_cell, q.kind, q.bonus_multiplier, q.distance_m);
    }
}
