//! Falsification and plausibility screening.
//!
//! Five explainable rule detectors: extreme z-scores, growth velocity,
//! location mismatch, terminal-digit preference and copied value tuples.
//! Only extreme z-scores block scoring; everything else is a warning for a
//! supervisor to resolve.

mod alert;
mod digits;
mod duplicates;
mod screen;

pub use alert::{alerts_to_csv, chw_risk_report, Alert, AlertKind, AlertSeverity, Evidence, RiskSummary};
pub use digits::{digit_preference, terminal_digit, DigitPreference};
pub use duplicates::{find_duplicates, DuplicateGroup};
pub use screen::{screen_measurement, Flag, IntegrityLimits, Screening};
