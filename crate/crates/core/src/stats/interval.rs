use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::describe::{mean, quantile_sorted};
use super::rng::RandomSource;
use super::special::normal_quantile;
use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IntervalEstimate {
    pub point: f64,
    pub lo: f64,
    pub hi: f64,
    pub confidence: f64,
    pub method: String,
}

fn check_confidence(confidence: f64) -> Result<()> {
    if confidence > 0.0 && confidence < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "confidence must lie in (0, 1), got {confidence}"
        )))
    }
}

/// Wilson score interval for a binomial proportion.
pub fn wilson_ci(successes: u64, n: u64, confidence: f64) -> Result<IntervalEstimate> {
    if n == 0 {
        return Err(Error::EmptySample("proportion over zero trials".into()));
    }
    if successes > n {
        return Err(Error::InvalidArgument(format!(
            "successes {successes} exceed trials {n}"
        )));
    }
    check_confidence(confidence)?;
    let z = normal_quantile((1.0 + confidence) / 2.0);
    let nf = n as f64;
    let p = successes as f64 / nf;
    let z2 = z * z;
    let denom = 1.0 + z2 / nf;
    let center = (p + z2 / (2.0 * nf)) / denom;
    let half = z / denom * (p * (1.0 - p) / nf + z2 / (4.0 * nf * nf)).sqrt();
    let lo = if successes == 0 { 0.0 } else { (center - half).clamp(0.0, p) };
    let hi = if successes == n { 1.0 } else { (center + half).clamp(p, 1.0) };
    Ok(IntervalEstimate {
        point: p,
        lo,
        hi,
        confidence,
        method: "wilson".into(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Statistic {
    #[default]
    Mean,
}

impl Statistic {
    fn apply(self, values: &[f64]) -> f64 {
        match self {
            Statistic::Mean => mean(values).unwrap_or(f64::NAN),
        }
    }
}

pub const DEFAULT_BOOTSTRAP_RESAMPLES: usize = 10_000;

/// Percentile interval of `values` from `samples`, which need not be sorted.
pub fn percentile_interval(mut samples: Vec<f64>, confidence: f64) -> (f64, f64) {
    samples.sort_by(f64::total_cmp);
    let alpha = 1.0 - confidence;
    (
        quantile_sorted(&samples, alpha / 2.0),
        quantile_sorted(&samples, 1.0 - alpha / 2.0),
    )
}

/// Percentile bootstrap: `resamples` with-replacement draws of the same
/// size. Resample `b` draws from stream `b` of `rng`.
pub fn bootstrap_ci(
    values: &[f64],
    statistic: Statistic,
    resamples: usize,
    confidence: f64,
    rng: RandomSource,
) -> Result<IntervalEstimate> {
    if values.is_empty() {
        return Err(Error::EmptySample("bootstrap of an empty sample".into()));
    }
    if resamples == 0 {
        return Err(Error::InvalidArgument("resamples must be at least 1".into()));
    }
    check_confidence(confidence)?;
    let n = values.len();
    let stats: Vec<f64> = (0..resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut r = rng.stream(b);
            let draw: Vec<f64> = (0..n).map(|_| values[r.gen_range(0..n)]).collect();
            statistic.apply(&draw)
        })
        .collect();
    let (lo, hi) = percentile_interval(stats, confidence);
    Ok(IntervalEstimate {
        point: statistic.apply(values),
        lo,
        hi,
        confidence,
        method: "percentile-bootstrap".into(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn wilson_known_intervals() {
        let agents = wilson_ci(22, 39, 0.95).unwrap();
        assert!((agents.point - 0.564).abs() < 5e-4);
        assert!((agents.lo - 0.410).abs() < 5e-4);
        assert!((agents.hi - 0.707).abs() < 5e-4);
        let participants = wilson_ci(80, 150, 0.95).unwrap();
        assert!((participants.lo - 0.454).abs() < 5e-4);
        assert!((participants.hi - 0.611).abs() < 5e-4);
    }

    #[test]
    fn wilson_subgroup_rows() {
        for (s, n, lo, hi) in [
            (39, 62, 0.505, 0.738),
            (41, 88, 0.365, 0.569),
            (45, 75, 0.487, 0.703),
            (35, 75, 0.358, 0.578),
        ] {
            let ci = wilson_ci(s, n, 0.95).unwrap();
            assert!((ci.lo - lo).abs() < 5e-4 && (ci.hi - hi).abs() < 5e-4, "{s}/{n}");
        }
    }

    #[test]
    fn wilson_edges() {
        assert_eq!(wilson_ci(0, 10, 0.95).unwrap().lo, 0.0);
        assert_eq!(wilson_ci(10, 10, 0.95).unwrap().hi, 1.0);
        assert_eq!(wilson_ci(0, 0, 0.95).unwrap_err().code(), crate::ErrorCode::EmptySample);
        assert!(wilson_ci(3, 2, 0.95).is_err());
        assert!(wilson_ci(1, 2, 1.0).is_err());
    }

    proptest! {
        #[test]
        fn wilson_bounds_contain_proportion(n in 1u64..500, frac in 0.0f64..=1.0, c in 0.5f64..0.999) {
            let s = ((n as f64) * frac).floor() as u64;
            let ci = wilson_ci(s, n, c).unwrap();
            prop_assert!(0.0 <= ci.lo && ci.lo <= ci.point && ci.point <= ci.hi && ci.hi <= 1.0);
        }
    }

    #[test]
    fn bootstrap_constant_values() {
        let ci = bootstrap_ci(&[3.5; 20], Statistic::Mean, 500, 0.95, RandomSource::new(1)).unwrap();
        assert_eq!((ci.lo, ci.point, ci.hi), (3.5, 3.5, 3.5));
    }

    #[test]
    fn bootstrap_is_seed_deterministic() {
        let values: Vec<f64> = (1..30).map(|i| f64::from(i).sqrt()).collect();
        let a = bootstrap_ci(&values, Statistic::Mean, 2000, 0.95, RandomSource::new(9)).unwrap();
        let b = bootstrap_ci(&values, Statistic::Mean, 2000, 0.95, RandomSource::new(9)).unwrap();
        assert_eq!(a, b);
        let c = bootstrap_ci(&values, Statistic::Mean, 2000, 0.95, RandomSource::new(10)).unwrap();
        assert_ne!(a, c);
    }

    #[test]
    fn bootstrap_balanced_binary_matches_binomial_oracle() {
        // Resampled mean of 100 balanced 0/1 values is Binomial(100, 0.5)/100,
        // whose central 95% range is about 0.40..0.60.
        let values: Vec<f64> = (0..100).map(|i| (i % 2) as f64).collect();
        let ci = bootstrap_ci(&values, Statistic::Mean, 10_000, 0.95, RandomSource::new(2024)).unwrap();
        let sd = (0.25f64 / 100.0).sqrt();
        let z = normal_quantile(0.975);
        assert!((ci.lo - (0.5 - z * sd)).abs() <= 0.03, "lo={}", ci.lo);
        assert!((ci.hi - (0.5 + z * sd)).abs() <= 0.03, "hi={}", ci.hi);
        assert!((ci.lo - 0.40).abs() <= 0.03 && (ci.hi - 0.60).abs() <= 0.03);
    }

    #[test]
    fn bootstrap_rejects_empty() {
        assert!(bootstrap_ci(&[], Statistic::Mean, 10, 0.95, RandomSource::new(0)).is_err());
        assert!(bootstrap_ci(&[1.0], Statistic::Mean, 0, 0.95, RandomSource::new(0)).is_err());
    }
}
