//! Measuring-efficiency scores and the trial statistics: a-priori power,
//! normality, Welch and paired t-tests, and Cohen's d.

mod effect;
mod efficiency;
mod noncentral;
mod normality;
mod power;
mod trial;
mod ttest;

pub use effect::cohens_d;
pub use efficiency::{efficiency_score, EfficiencyScore, EfficiencyWeights, SubmissionRecord};
pub use noncentral::nct_cdf;
pub use normality::{kurtosis_z, normality_check, skew_z, NormalityCheck, Verdict, MIN_NORMALITY_N};
pub use power::{normal_approx_sample_size, sample_size, t_test_power, PowerParams, SampleSize, Tails, MAX_N};
pub use trial::{
    format_table, stats_csv, t_tests, BetweenGroup, CellSummary, Group, Phase, Summary, TrialRecord, TrialStats,
    WithinGroup,
};
pub use ttest::{paired_t, two_sided_p, welch_t, TTest, TTestKind};

use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum AnalyticsError {
    #[error("domain error: {0}")]
    Domain(String),
    #[error("degenerate input: {0}")]
    Degenerate(String),
    #[error("overflow: {0}")]
    Overflow(String),
}
