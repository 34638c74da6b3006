//! z-scores and classification for one visit, then the same measurement
//! taken in the wrong position.

use anthroquest::anthro::{
    assess, AssessSettings, ChildProfile, CutoffTable, GrowthReference, HeightMode, Measurement, Sex,
};
use anthroquest::LatLon;
use chrono::NaiveDate;

fn main() {
    let reference = GrowthReference::bundled();
    let cutoffs = CutoffTable::default();
    let settings = AssessSettings::default();
    let child = ChildProfile { sex: Sex::F, birth_date: NaiveDate::from_ymd_opt(2022, 1, 10).unwrap() };

    let visit = Measurement {
        id: "m-001".into(),
        child_id: "c-17".into(),
        chw_id: "w-03".into(),
        timestamp: "2024-03-02T10:30:00Z".parse().unwrap(),
        location: LatLon::new(18.52, 73.85),
        weight: Some(9.1),
        height: Some(81.5),
        height_mode: HeightMode::Standing,
        muac: Some(124.0),
        entry_duration: 140.0,
    };
    let r = assess(&visit, &child, &reference, &cutoffs, &settings);
    println!("standing at 25 months");
    println!("  WAZ {:?}  HAZ {:?}  WHZ {:?}  MUACZ {:?}", r.z.waz, r.z.haz, r.z.whz, r.z.muacz);
    println!("  {:?}", r.classification);

    // lying down past two years: the length is reduced by the position offset
    let lying = Measurement { height_mode: HeightMode::Recumbent, ..visit };
    let r2 = assess(&lying, &child, &reference, &cutoffs, &settings);
    println!("recumbent, same reading");
    println!("  HAZ {:?} (shift {:.3})", r2.z.haz, r2.z.haz.unwrap() - r.z.haz.unwrap());
    if !r2.flags.is_empty() {
        println!("  flags {:?}", r2.flags);
    }
}
