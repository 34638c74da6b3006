//! Growth-reference engine.
//!
//! Raw measurements (weight, height or length, MUAC) are converted into
//! z-scores with the LMS transform against a growth-reference table, then
//! classified against an editable cutoff table. Weight-based indicators use
//! the restricted adjustment beyond |z| > 3.

mod assess;
mod classify;
mod lms;
mod measurement;
mod reference;

pub use assess::{assess, AssessSettings, ChildProfile, PlausibilityLimits, ZFlag, ZScoreResult, ZValues};
pub use classify::{classify, Axis, Classification, Cutoff, CutoffTable, MuacBand, Severity};
pub use lms::{inverse_raw_zscore, inverse_zscore, lms_zscore, raw_zscore};
pub use measurement::{HeightMode, Measurement, ValidationError};
pub use reference::{interpolate_reference, GrowthReference, GrowthReferenceRow, Indicator, Sex};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnthroError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("reference gap: no {indicator} row for sex {sex} at key {key}")]
    ReferenceGap { indicator: Indicator, sex: Sex, key: f64 },
    #[error("invalid reference table: {0}")]
    InvalidTable(String),
    #[error("invalid cutoff table: {0}")]
    InvalidCutoffs(String),
}
