//! Gi* hotspots on a prevalence field with one planted cluster, printed as
//! a class map and written as GeoJSON.

use anthroquest::geostat::geojson::hotspot_geojson;
use anthroquest::geostat::{GridSpec, HotspotClass, HotspotLayer, LatLon};
use rand::{Rng, SeedableRng};

fn main() {
    let grid = GridSpec::new(LatLon::new(18.45, 73.78), 250.0, 12, 12).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
    let values: Vec<Option<f64>> = (0..grid.len())
        .map(|c| {
            let (r, k) = (c / grid.cols, c % grid.cols);
            let near = r.abs_diff(4) <= 1 && k.abs_diff(7) <= 1;
            Some(rng.random_range(0.05..0.15) + if near { 0.25 } else { 0.0 })
        })
        .collect();
    let layer = HotspotLayer::build(grid, values, 1, false, "2024-06-01T00:00:00Z".parse().unwrap()).unwrap();

    for r in (0..grid.rows).rev() {
        let row: String = (0..grid.cols)
            .map(|k| match layer.class[grid.index(r, k)] {
                Some(HotspotClass::Hot99) => '#',
                Some(HotspotClass::Hot95) => '+',
                Some(HotspotClass::Cold95 | HotspotClass::Cold99) => '-',
                _ => '.',
            })
            .collect();
        println!("{row}");
    }
    let path = std::env::temp_dir().join("hotspots.geojson");
    std::fs::write(&path, serde_json::to_string_pretty(&hotspot_geojson(&layer)).unwrap()).unwrap();
    println!("wrote {}", path.display());
}
