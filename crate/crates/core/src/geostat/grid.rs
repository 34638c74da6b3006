use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::GeoError;
use crate::io::ParseError;

/// Mean Earth radius in metres.
const EARTH_RADIUS_M: f64 = 6_371_008.8;
const M_PER_DEG: f64 = EARTH_RADIUS_M * std::f64::consts::PI / 180.0;

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct LatLon {
    pub lat: f64,
    pub lon: f64,
}

impl LatLon {
    pub const fn new(lat: f64, lon: f64) -> Self {
        Self { lat, lon }
    }
}

/// Great-circle distance in metres.
pub fn haversine_m(a: LatLon, b: LatLon) -> f64 {
    let (p1, p2) = (a.lat.to_radians(), b.lat.to_radians());
    let dp = p2 - p1;
    let dl = (b.lon - a.lon).to_radians();
    let h = (dp / 2.0).sin().powi(2) + p1.cos() * p2.cos() * (dl / 2.0).sin().powi(2);
    2.0 * EARTH_RADIUS_M * h.sqrt().min(1.0).asin()
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    /// South-west corner of cell (0, 0).
    pub origin: LatLon,
    pub cell_size: f64,
    pub rows: usize,
    pub cols: usize,
}

impl GridSpec {
    pub fn new(origin: LatLon, cell_size: f64, rows: usize, cols: usize) -> Result<Self, GeoError> {
        let spec = Self { origin, cell_size, rows, cols };
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), GeoError> {
        if !(self.cell_size > 0.0 && self.cell_size.is_finite()) {
            return Err(GeoError::InvalidGrid(format!("cell_size must be positive, got {}", self.cell_size)));
        }
        if self.rows == 0 || self.cols == 0 {
            return Err(GeoError::InvalidGrid("rows and cols must be at least 1".into()));
        }
        if self.origin.lat.abs() >= 90.0 {
            return Err(GeoError::InvalidGrid("origin latitude must be inside (-90, 90)".into()));
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.rows * self.cols
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn cell_area(&self) -> f64 {
        self.cell_size * self.cell_size
    }

    fn cos_lat(&self) -> f64 {
        self.origin.lat.to_radians().cos()
    }

    /// Projects to metres east/north of the origin.
    pub fn project(&self, p: LatLon) -> (f64, f64) {
        let x = (p.lon - self.origin.lon) * M_PER_DEG * self.cos_lat();
        let y = (p.lat - self.origin.lat) * M_PER_DEG;
        (x, y)
    }

    pub fn unproject(&self, x: f64, y: f64) -> LatLon {
        LatLon { lat: self.origin.lat + y / M_PER_DEG, lon: self.origin.lon + x / (M_PER_DEG * self.cos_lat()) }
    }

    pub fn index(&self, row: usize, col: usize) -> usize {
        row * self.cols + col
    }

    pub fn row_col(&self, cell: usize) -> (usize, usize) {
        (cell / self.cols, cell % self.cols)
    }

    /// Cell containing projected point `(x, y)`. A point on a shared edge
    /// belongs to the cell with the larger index; the outer north and east
    /// edges are outside the grid.
    pub fn cell_of_xy(&self, x: f64, y: f64) -> Option<usize> {
        if !(x.is_finite() && y.is_finite()) || x < 0.0 || y < 0.0 {
            return None;
        }
        let col = (x / self.cell_size).floor() as usize;
        let row = (y / self.cell_size).floor() as usize;
        (row < self.rows && col < self.cols).then(|| self.index(row, col))
    }

    pub fn cell_of(&self, p: LatLon) -> Option<usize> {
        let (x, y) = self.project(p);
        self.cell_of_xy(x, y)
    }

    pub fn centroid_xy(&self, cell: usize) -> (f64, f64) {
        let (r, c) = self.row_col(cell);
        ((c as f64 + 0.5) * self.cell_size, (r as f64 + 0.5) * self.cell_size)
    }

    pub fn centroid(&self, cell: usize) -> LatLon {
        let (x, y) = self.centroid_xy(cell);
        self.unproject(x, y)
    }

    /// Closed polygon ring (lon, lat) pairs, counter-clockwise from the south-west corner.
    pub fn ring(&self, cell: usize) -> [[f64; 2]; 5] {
        let (r, c) = self.row_col(cell);
        let (x0, y0) = (c as f64 * self.cell_size, r as f64 * self.cell_size);
        let (x1, y1) = (x0 + self.cell_size, y0 + self.cell_size);
        let pt = |x, y| {
            let p = self.unproject(x, y);
            [p.lon, p.lat]
        };
        let sw = pt(x0, y0);
        [sw, pt(x1, y0), pt(x1, y1), pt(x0, y1), sw]
    }

    /// Chebyshev distance in cells.
    pub fn cell_distance(&self, a: usize, b: usize) -> usize {
        let (ra, ca) = self.row_col(a);
        let (rb, cb) = self.row_col(b);
        ra.abs_diff(rb).max(ca.abs_diff(cb))
    }
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct Binning {
    /// Cell of each input point, in input order; `None` when out of bounds.
    pub assignments: Vec<Option<usize>>,
    pub counts: Vec<usize>,
    pub out_of_bounds: usize,
}

pub fn bin_points<I>(points: I, spec: &GridSpec) -> Binning
where
    I: IntoIterator<Item = LatLon>,
{
    let mut out = Binning { counts: vec![0; spec.len()], ..Default::default() };
    for p in points {
        let cell = spec.cell_of(p);
        match cell {
            Some(c) => out.counts[c] += 1,
            None => out.out_of_bounds += 1,
        }
        out.assignments.push(cell);
    }
    out
}

/// Plain-text matrix dump: one grid row per line, row 0 first, values with
/// six significant digits, `NA` for missing cells.
pub fn write_matrix(spec: &GridSpec, values: &[Option<f64>]) -> String {
    let mut out = String::new();
    for r in 0..spec.rows {
        let line: Vec<String> = (0..spec.cols)
            .map(|c| match values.get(spec.index(r, c)).copied().flatten() {
                Some(v) => crate::fmt::sig6(v),
                None => "NA".to_string(),
            })
            .collect();
        let _ = writeln!(out, "{}", line.join(" "));
    }
    out
}

/// Parses a whitespace-separated matrix; returns `(rows, cols, values)`.
pub fn parse_matrix(text: &str) -> Result<(usize, usize, Vec<Option<f64>>), ParseError> {
    let mut values = Vec::new();
    let mut cols = None;
    let mut rows = 0;
    for (i, line) in text.lines().enumerate() {
        let line = line.trim();
        if line.is_empty() || line.starts_with('#') {
            continue;
        }
        let mut n = 0;
        for (j, tok) in line.split(|c: char| c.is_whitespace() || c == ',').filter(|t| !t.is_empty()).enumerate() {
            let v = if tok.eq_ignore_ascii_case("na") {
                None
            } else {
                Some(tok.parse::<f64>().map_err(|e| ParseError::new(i as u64 + 1, j as u64 + 1, e.to_string()))?)
            };
            values.push(v);
            n += 1;
        }
        match cols {
            None => cols = Some(n),
            Some(c) if c != n => {
                return Err(ParseError::new(i as u64 + 1, 0, format!("expected {c} columns, found {n}")));
            }
            _ => {}
        }
        rows += 1;
    }
    let cols = cols.ok_or_else(|| ParseError::new(0, 0, "empty matrix"))?;
    Ok((rows, cols, values))
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::{Rng, SeedableRng};

    fn spec() -> GridSpec {
        GridSpec::new(LatLon::new(21.0, 79.0), 250.0, 10, 10).unwrap()
    }

    #[test]
    fn centroid_lands_in_its_cell() {
        let s = spec();
        for cell in 0..s.len() {
            assert_eq!(s.cell_of(s.centroid(cell)), Some(cell));
        }
    }

    #[test]
    fn shared_edge_goes_to_larger_index() {
        let s = spec();
        // vertical edge between (0,3) and (0,4)
        assert_eq!(s.cell_of_xy(4.0 * 250.0, 10.0), Some(4));
        // horizontal edge between rows 2 and 3
        assert_eq!(s.cell_of_xy(10.0, 3.0 * 250.0), Some(30));
        // outer edges are outside
        assert_eq!(s.cell_of_xy(2500.0, 10.0), None);
        assert_eq!(s.cell_of_xy(10.0, 2500.0), None);
        assert_eq!(s.cell_of_xy(0.0, 0.0), Some(0));
    }

    #[test]
    fn counts_partition_uniform_points() {
        let s = spec();
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let pts: Vec<LatLon> =
            (0..1000).map(|_| s.unproject(rng.random_range(0.0..2500.0), rng.random_range(0.0..2500.0))).collect();
        let b = bin_points(pts.iter().copied(), &s);
        assert_eq!(b.counts.iter().sum::<usize>() + b.out_of_bounds, 1000);
        // direct recount
        let mut recount = vec![0usize; s.len()];
        for p in &pts {
            let (x, y) = s.project(*p);
            if (0.0..2500.0).contains(&x) && (0.0..2500.0).contains(&y) {
                recount[(y / 250.0) as usize * 10 + (x / 250.0) as usize] += 1;
            }
        }
        assert_eq!(b.counts, recount);
    }

    #[test]
    fn out_of_bounds_counted() {
        let s = spec();
        let b = bin_points([LatLon::new(20.0, 79.0), s.centroid(5)], &s);
        assert_eq!(b.out_of_bounds, 1);
        assert_eq!(b.assignments, vec![None, Some(5)]);
    }

    #[test]
    fn invalid_specs() {
        assert!(GridSpec::new(LatLon::new(0.0, 0.0), 0.0, 1, 1).is_err());
        assert!(GridSpec::new(LatLon::new(0.0, 0.0), 10.0, 0, 1).is_err());
    }

    #[test]
    fn haversine_matches_projection_locally() {
        let s = spec();
        let a = s.unproject(100.0, 100.0);
        let b = s.unproject(1600.0, 900.0);
        let want = (1500.0f64.powi(2) + 800.0f64.powi(2)).sqrt();
        assert!((haversine_m(a, b) - want).abs() / want < 1e-3);
    }

    #[test]
    fn matrix_round_trip() {
        let s = GridSpec::new(LatLon::new(0.0, 0.0), 1.0, 2, 3).unwrap();
        let vals = vec![Some(1.0), None, Some(-0.5), Some(2.0 / 3.0), Some(0.0), Some(1e-7)];
        let text = write_matrix(&s, &vals);
        assert_eq!(text, "1 NA -0.5\n0.666667 0 1e-7\n");
        let (r, c, parsed) = parse_matrix(&text).unwrap();
        assert_eq!((r, c), (2, 3));
        assert_eq!(parsed[1], None);
        assert!(parse_matrix("1 2\n3\n").is_err());
    }
}
