use std::f64::consts::PI;

use super::{GeoError, GridSpec, LatLon};

/// Bivariate Epanechnikov kernel `(2/pi)(1 - u^2)` on the unit disc.
pub fn epanechnikov(u: f64) -> f64 {
    if u <= 1.0 {
        (2.0 / PI) * (1.0 - u * u)
    } else {
        0.0
    }
}

/// Kernel density at every cell centroid, in points per square metre:
/// `sum_i K(d(c, p_i) / h) / h^2`.
pub fn kde_density<I>(points: I, spec: &GridSpec, bandwidth: f64) -> Result<Vec<f64>, GeoError>
where
    I: IntoIterator<Item = LatLon>,
{
    if !(bandwidth > 0.0 && bandwidth.is_finite()) {
        return Err(GeoError::Domain(format!("bandwidth must be positive, got {bandwidth}")));
    }
    spec.check()?;
    let mut density = vec![0.0; spec.len()];
    let h2 = bandwidth * bandwidth;
    let size = spec.cell_size;
    for p in points {
        let (px, py) = spec.project(p);
        // centroids within one bandwidth of the point
        let col_lo = (((px - bandwidth) / size - 0.5).ceil().max(0.0)) as usize;
        let row_lo = (((py - bandwidth) / size - 0.5).ceil().max(0.0)) as usize;
        let col_hi = ((px + bandwidth) / size - 0.5).floor();
        let row_hi = ((py + bandwidth) / size - 0.5).floor();
        if col_hi < 0.0 || row_hi < 0.0 {
            continue;
        }
        let col_hi = (col_hi as usize).min(spec.cols - 1);
        let row_hi = (row_hi as usize).min(spec.rows - 1);
        for r in row_lo..=row_hi {
            for c in col_lo..=col_hi {
                let cell = spec.index(r, c);
                let (cx, cy) = spec.centroid_xy(cell);
                let d = ((cx - px).powi(2) + (cy - py).powi(2)).sqrt();
                density[cell] += epanechnikov(d / bandwidth) / h2;
            }
        }
    }
    Ok(density)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn naive(points: &[LatLon], spec: &GridSpec, h: f64) -> Vec<f64> {
        (0..spec.len())
            .map(|cell| {
                let (cx, cy) = spec.centroid_xy(cell);
                points
                    .iter()
                    .map(|p| {
                        let (x, y) = spec.project(*p);
                        let u = ((cx - x).powi(2) + (cy - y).powi(2)).sqrt() / h;
                        if u <= 1.0 {
                            2.0 / PI * (1.0 - u * u) / (h * h)
                        } else {
                            0.0
                        }
                    })
                    .sum()
            })
            .collect()
    }

    #[test]
    fn peak_at_centroid() {
        let spec = GridSpec::new(LatLon::new(10.0, 10.0), 50.0, 5, 5).unwrap();
        let d = kde_density([spec.centroid(12)], &spec, 100.0).unwrap();
        assert!((d[12] - 2.0 / (PI * 100.0 * 100.0)).abs() < 1e-15);
        // corner centroids are ~141 m away
        assert_eq!(d[0], 0.0);
    }

    #[test]
    fn empty_points_all_zero() {
        let spec = GridSpec::new(LatLon::new(10.0, 10.0), 50.0, 3, 3).unwrap();
        let d = kde_density(std::iter::empty(), &spec, 100.0).unwrap();
        assert!(d.iter().all(|&v| v == 0.0));
    }

    #[test]
    fn two_points_match_double_loop() {
        let spec = GridSpec::new(LatLon::new(-3.0, 36.0), 40.0, 5, 5).unwrap();
        let pts = [spec.unproject(37.0, 81.0), spec.unproject(150.5, 122.0)];
        let fast = kde_density(pts, &spec, 90.0).unwrap();
        let slow = naive(&pts, &spec, 90.0);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn points_outside_the_grid_still_contribute() {
        let spec = GridSpec::new(LatLon::new(0.0, 0.0), 40.0, 5, 5).unwrap();
        let pts = [spec.unproject(-30.0, 100.0), spec.unproject(230.0, -20.0)];
        let fast = kde_density(pts, &spec, 90.0).unwrap();
        let slow = naive(&pts, &spec, 90.0);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(fast.iter().any(|&v| v > 0.0));
    }

    #[test]
    fn rejects_bad_bandwidth() {
        let spec = GridSpec::new(LatLon::new(0.0, 0.0), 40.0, 2, 2).unwrap();
        assert!(kde_density(std::iter::empty(), &spec, 0.0).is_err());
    }
}
