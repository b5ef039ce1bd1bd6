//! Statistical procedures: proportion intervals, χ², Mann–Whitney U,
//! Holm–Bonferroni, bootstrap intervals, quartiles and seeded randomness.

mod describe;
mod hypothesis;
mod interval;
mod rng;
pub mod special;

pub use describe::{mean, median, median_quartiles, quantile_sorted, sample_sd, Quartiles};
pub use hypothesis::{
    holm_bonferroni, mann_whitney_u, pearson_chi2, HolmResult, Reference, TestResult,
    MWU_EXACT_MAX,
};
pub use interval::{
    bootstrap_ci, percentile_interval, wilson_ci, IntervalEstimate, Statistic,
    DEFAULT_BOOTSTRAP_RESAMPLES,
};
pub use rng::{RandomSource, StreamRng};
