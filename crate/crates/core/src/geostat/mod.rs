//! Spatial grid, kernel density and Getis-Ord Gi* layers, coverage maps.
//!
//! Coordinates are projected with a local equirectangular projection about
//! the grid origin (the south-west corner); cell `(row, col)` has index
//! `row * cols + col`, rows growing northwards.

mod coverage;
pub mod geojson;
mod gistar;
mod grid;
mod kde;

pub use coverage::{coverage_map, ChildLocation, CoverageCell, CoverageStatus, MeasurementStamp};
pub use gistar::{benjamini_hochberg, gi_star, gi_star_masked, GiStar, HotspotClass, HotspotLayer};
pub use grid::{bin_points, haversine_m, parse_matrix, write_matrix, Binning, GridSpec, LatLon};
pub use kde::{epanechnikov, kde_density};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeoError {
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
    #[error("domain error: {0}")]
    Domain(String),
}
