//! Gamified geospatial child-nutrition surveillance.
//!
//! Community health workers (CHWs) submit geotagged anthropometric
//! measurements through a location-based game. This crate holds everything
//! the server side needs:
//!
//! - [`anthro`]: LMS growth-reference z-scores and malnutrition classification.
//! - [`geostat`]: grid binning, kernel density maps, Getis-Ord Gi* hotspots
//!   and coverage/staleness maps, exported as GeoJSON.
//! - [`game`]: submission scoring, spatial quests, campaigns, streaks,
//!   badges and leaderboards.
//! - [`integrity`]: rule-based falsification screening and alerts.
//! - [`analytics`]: CHW efficiency scores and trial statistics (power
//!   analysis, t-tests, Cohen's d, normality checks).
//! - [`platform`]: the append-only store and the HTTP/JSON service.
//! - [`simkit`]: seeded synthetic cohorts, measurement streams and trials.
//!
//! Runnable walkthroughs for each capability live in `examples/`.

pub mod analytics;
pub mod anthro;
pub mod cli;
pub mod config;
pub mod fmt;
pub mod game;
pub mod geostat;
pub mod integrity;
pub mod io;
pub mod platform;
pub mod simkit;

pub use anthro::{
    Classification, GrowthReference, GrowthReferenceRow, HeightMode, Indicator, Measurement, Sex, ZScoreResult,
};
pub use config::Config;
pub use geostat::{GridSpec, LatLon};
