//! The integrity rules on hand-made records: a shrinking child, an
//! impossible weight, rounded heights and copied values.

use anthroquest::anthro::{HeightMode, Measurement, ZValues};
use anthroquest::integrity::{digit_preference, find_duplicates, screen_measurement, IntegrityLimits};
use anthroquest::LatLon;
use chrono::{DateTime, Duration, Utc};

fn record(id: &str, child: &str, at: DateTime<Utc>, w: f64, h: f64) -> Measurement {
    Measurement {
        id: id.into(),
        child_id: child.into(),
        chw_id: "w9".into(),
        timestamp: at,
        location: LatLon::new(18.5, 73.8),
        weight: Some(w),
        height: Some(h),
        height_mode: HeightMode::Standing,
        muac: Some(140.0),
        entry_duration: 60.0,
    }
}

fn main() {
    let limits = IntegrityLimits::default();
    let t0: DateTime<Utc> = "2024-04-01T09:00:00Z".parse().unwrap();
    let home = Some(LatLon::new(18.5, 73.8));

    let first = record("a1", "c1", t0, 12.0, 95.0);
    let second = record("a2", "c1", t0 + Duration::days(7), 12.1, 92.0);
    let s = screen_measurement(&second, &[first], home, &ZValues::default(), &limits);
    println!("95 cm then 92 cm: {:?}", s.flags.iter().map(|f| (f.kind, f.severity)).collect::<Vec<_>>());

    let z = ZValues { whz: Some(6.1), ..ZValues::default() };
    let s = screen_measurement(&record("b1", "c2", t0, 30.0, 90.0), &[], home, &z, &limits);
    println!("WHZ +6.1: blocks = {}", s.blocks());

    let rounded: Vec<f64> = (0..20).map(|i| 80.0 + i as f64).collect();
    println!("20 heights ending in .0: {:?}", digit_preference(&rounded, 1, 20, limits.digit_chi2_critical));

    let copies: Vec<Measurement> =
        (0..4).map(|i| record(&format!("d{i}"), &format!("k{i}"), t0 + Duration::minutes(i), 10.4, 81.2)).collect();
    for g in find_duplicates(&copies, 1.0, 3) {
        println!("copied tuple across {:?}: {:?}", g.child_ids, g.severity);
    }
}
