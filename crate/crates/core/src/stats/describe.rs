use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Linear-interpolation quantile over sorted data: h = (n − 1)p, then
/// interpolate between the floor and ceiling order statistics.
pub fn quantile_sorted(sorted: &[f64], p: f64) -> f64 {
    debug_assert!(!sorted.is_empty());
    let h = (sorted.len() - 1) as f64 * p.clamp(0.0, 1.0);
    let lo = h.floor() as usize;
    let hi = h.ceil() as usize;
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

pub(crate) fn sorted_copy(values: &[f64]) -> Vec<f64> {
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    v
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Quartiles {
    pub q1: f64,
    pub median: f64,
    pub q3: f64,
}

pub fn median_quartiles(values: &[f64]) -> Result<Quartiles> {
    if values.is_empty() {
        return Err(Error::EmptySample("quartiles of an empty sample".into()));
    }
    let s = sorted_copy(values);
    Ok(Quartiles {
        q1: quantile_sorted(&s, 0.25),
        median: quantile_sorted(&s, 0.5),
        q3: quantile_sorted(&s, 0.75),
    })
}

pub fn median(values: &[f64]) -> Result<f64> {
    median_quartiles(values).map(|q| q.median)
}

pub fn mean(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        None
    } else {
        Some(values.iter().sum::<f64>() / values.len() as f64)
    }
}

/// Sample standard deviation (n − 1 denominator); `None` below two values.
pub fn sample_sd(values: &[f64]) -> Option<f64> {
    if values.len() < 2 {
        return None;
    }
    let m = mean(values)?;
    let ss: f64 = values.iter().map(|v| (v - m).powi(2)).sum();
    Some((ss / (values.len() - 1) as f64).sqrt())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn quartile_examples() {
        let q = median_quartiles(&[1.0, 2.0, 3.0, 4.0, 5.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (2.0, 3.0, 4.0));
        let q = median_quartiles(&[7.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (7.0, 7.0, 7.0));
        // h = 0.75, 1.5, 2.25 over [1, 2, 3, 4]
        let q = median_quartiles(&[4.0, 2.0, 1.0, 3.0]).unwrap();
        assert_eq!((q.q1, q.median, q.q3), (1.75, 2.5, 3.25));
    }

    #[test]
    fn empty_quartiles_error() {
        assert_eq!(
            median_quartiles(&[]).unwrap_err().code(),
            crate::ErrorCode::EmptySample
        );
    }

    #[test]
    fn sample_sd_uses_n_minus_one() {
        let sd = sample_sd(&[10.0, 20.0, 30.0, 40.0]).unwrap();
        // sqrt(500 / 3)
        assert!((sd - 12.909_944_487_358_056).abs() < 1e-12);
        assert_eq!(sample_sd(&[1.0]), None);
    }
}
