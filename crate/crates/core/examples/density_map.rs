//! Epanechnikov kernel density of case locations on a grid.

use anthroquest::geostat::{bin_points, kde_density, write_matrix, GridSpec, LatLon};
use rand::{Rng, SeedableRng};

fn main() {
    let grid = GridSpec::new(LatLon::new(18.45, 73.78), 100.0, 10, 10).unwrap();
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(11);
    let cases: Vec<LatLon> =
        (0..60).map(|_| grid.unproject(rng.random_range(200.0..600.0), rng.random_range(300.0..800.0))).collect();

    let density = kde_density(cases.iter().copied(), &grid, 250.0).unwrap();
    let per_km2: Vec<Option<f64>> = density.iter().map(|d| Some(d * 1e6)).collect();
    println!("cases per km2, bandwidth 250 m:");
    print!("{}", write_matrix(&grid, &per_km2));

    let counts = bin_points(cases.iter().copied(), &grid);
    println!("raw counts per cell sum to {}", counts.counts.iter().sum::<usize>());
}
