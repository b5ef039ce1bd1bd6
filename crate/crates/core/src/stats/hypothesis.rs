//! Pearson χ², Mann–Whitney U and Holm–Bonferroni.

use serde::{Deserialize, Serialize};

use super::special::{chi2_sf, normal_sf};
use crate::error::{Error, Result};

/// How the p-value was referenced.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Reference {
    /// χ² with the given degrees of freedom.
    Df(u32),
    /// Exact enumeration of the null distribution.
    Exact,
    /// Normal approximation.
    Normal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TestResult {
    pub statistic: f64,
    pub p_value: f64,
    pub method: String,
    pub reference: Reference,
    pub n_per_group: Vec<usize>,
}

/// Pearson χ² test of independence without continuity correction. Rows
/// are groups, columns are outcome categories.
pub fn pearson_chi2(table: &[Vec<u64>]) -> Result<TestResult> {
    let rows = table.len();
    let cols = table.first().map_or(0, Vec::len);
    if table.iter().any(|r| r.len() != cols) {
        return Err(Error::InvalidArgument("ragged contingency table".into()));
    }
    if rows < 2 || cols < 2 {
        return Err(Error::DegenerateTable(format!("{rows}x{cols} table")));
    }
    let row_sums: Vec<u64> = table.iter().map(|r| r.iter().sum()).collect();
    let col_sums: Vec<u64> = (0..cols).map(|j| table.iter().map(|r| r[j]).sum()).collect();
    if row_sums.contains(&0) || col_sums.contains(&0) {
        return Err(Error::DegenerateTable("a row or column total is zero".into()));
    }
    let total: u64 = row_sums.iter().sum();
    let mut statistic = 0.0;
    for (i, row) in table.iter().enumerate() {
        for (j, &obs) in row.iter().enumerate() {
            let expected = row_sums[i] as f64 * col_sums[j] as f64 / total as f64;
            if expected > 0.0 {
                statistic += (obs as f64 - expected).powi(2) / expected;
            }
        }
    }
    let df = ((rows - 1) * (cols - 1)) as u32;
    Ok(TestResult {
        statistic,
        p_value: chi2_sf(statistic, df as f64).clamp(0.0, 1.0),
        method: "pearson-chi2".into(),
        reference: Reference::Df(df),
        n_per_group: row_sums.iter().map(|&s| s as usize).collect(),
    })
}

/// Largest per-sample size for which the exact null distribution is used.
pub const MWU_EXACT_MAX: usize = 8;

/// Average ranks (1-based) of the pooled sample, plus the tie-group sizes.
fn pooled_ranks(x: &[f64], y: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut idx: Vec<(f64, usize)> = x.iter().chain(y).copied().zip(0..).collect();
    idx.sort_by(|a, b| a.0.total_cmp(&b.0));
    let mut ranks = vec![0.0; idx.len()];
    let mut ties = Vec::new();
    let mut i = 0;
    while i < idx.len() {
        let mut j = i;
        while j + 1 < idx.len() && idx[j + 1].0 == idx[i].0 {
            j += 1;
        }
        let avg = (i + j) as f64 / 2.0 + 1.0;
        for item in &idx[i..=j] {
            ranks[item.1] = avg;
        }
        if j > i {
            ties.push(j - i + 1);
        }
        i = j + 1;
    }
    (ranks, ties)
}

/// Number of arrangements of `n` first-sample and `m` second-sample items
/// with each value of U, indexed by U.
fn u_distribution(n: usize, m: usize) -> Vec<u64> {
    // counts[a][b][u] built row by row over a, keeping b as the inner table
    let max_u = n * m;
    let mut prev: Vec<Vec<u64>> = (0..=m)
        .map(|_| {
            let mut v = vec![0u64; max_u + 1];
            v[0] = 1;
            v
        })
        .collect();
    for a in 1..=n {
        let mut cur: Vec<Vec<u64>> = vec![vec![0u64; max_u + 1]; m + 1];
        cur[0][0] = 1;
        for b in 1..=m {
            for u in 0..=a * b {
                // largest element from the first sample contributes b
                let from_first = if u >= b { prev[b][u - b] } else { 0 };
                let from_second = cur[b - 1][u];
                cur[b][u] = from_first + from_second;
            }
        }
        prev = cur;
    }
    prev.swap_remove(m)
}

/// Two-sided Mann–Whitney U test. Reports U = min(U_x, U_y). Uses the exact
/// null distribution when both samples have at most [`MWU_EXACT_MAX`]
/// values and the pooled sample has no ties; otherwise a normal
/// approximation with tie-corrected variance and 0.5 continuity correction.
pub fn mann_whitney_u(x: &[f64], y: &[f64]) -> Result<TestResult> {
    if x.is_empty() || y.is_empty() {
        return Err(Error::EmptySample("Mann-Whitney U needs two non-empty samples".into()));
    }
    if x.iter().chain(y).any(|v| v.is_nan()) {
        return Err(Error::InvalidArgument("NaN in Mann-Whitney U sample".into()));
    }
    let (n, m) = (x.len(), y.len());
    let (ranks, ties) = pooled_ranks(x, y);
    let rank_sum_x: f64 = ranks[..n].iter().sum();
    let u_x = rank_sum_x - (n * (n + 1)) as f64 / 2.0;
    let u_y = (n * m) as f64 - u_x;
    let u = u_x.min(u_y);

    let (p_value, reference) = if n.max(m) <= MWU_EXACT_MAX && ties.is_empty() {
        let dist = u_distribution(n, m);
        let total: u64 = dist.iter().sum();
        let count_le: u64 = dist[..=(u as usize)].iter().sum();
        ((2.0 * count_le as f64 / total as f64).min(1.0), Reference::Exact)
    } else {
        let nf = n as f64;
        let mf = m as f64;
        let big_n = nf + mf;
        let tie_term: f64 = ties.iter().map(|&t| (t * t * t - t) as f64).sum();
        let var = nf * mf / 12.0 * ((big_n + 1.0) - tie_term / (big_n * (big_n - 1.0)));
        let p = if var <= 0.0 {
            1.0
        } else {
            let dev = ((u_x - nf * mf / 2.0).abs() - 0.5).max(0.0);
            (2.0 * normal_sf(dev / var.sqrt())).min(1.0)
        };
        (p, Reference::Normal)
    };
    Ok(TestResult {
        statistic: u,
        p_value,
        method: "mann-whitney-u".into(),
        reference,
        n_per_group: vec![n, m],
    })
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolmResult {
    pub alpha: f64,
    pub rejected: Vec<bool>,
    pub adjusted: Vec<f64>,
}

/// Holm–Bonferroni step-down over one family of p-values. Outputs are in
/// input order.
pub fn holm_bonferroni(p_values: &[f64], alpha: f64) -> Result<HolmResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::InvalidArgument(format!("alpha must lie in (0, 1), got {alpha}")));
    }
    if let Some(p) = p_values.iter().find(|p| !(0.0..=1.0).contains(*p)) {
        return Err(Error::InvalidArgument(format!("p-value {p} outside [0, 1]")));
    }
    let m = p_values.len();
    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| p_values[a].total_cmp(&p_values[b]));
    let mut rejected = vec![false; m];
    let mut adjusted = vec![0.0; m];
    let mut still_rejecting = true;
    let mut running_max = 0.0f64;
    for (rank, &i) in order.iter().enumerate() {
        let remaining = (m - rank) as f64;
        if still_rejecting && p_values[i] < alpha / remaining {
            rejected[i] = true;
        } else {
            still_rejecting = false;
        }
        running_max = running_max.max((remaining * p_values[i]).min(1.0));
        adjusted[i] = running_max;
    }
    Ok(HolmResult {
        alpha,
        rejected,
        adjusted,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn chi2_examples() {
        let even = pearson_chi2(&[vec![10, 10], vec![10, 10]]).unwrap();
        assert_eq!(even.statistic, 0.0);
        assert_eq!(even.p_value, 1.0);

        let strong = pearson_chi2(&[vec![30, 10], vec![10, 30]]).unwrap();
        assert!((strong.statistic - 20.0).abs() < 1e-12);
        assert_eq!(strong.reference, Reference::Df(1));
        assert!((strong.p_value - 7.744e-6).abs() < 1e-9);

        let cohorts = pearson_chi2(&[vec![22, 17], vec![80, 70]]).unwrap();
        assert!(cohorts.p_value > 0.05);
    }

    #[test]
    fn chi2_degenerate() {
        let err = pearson_chi2(&[vec![0, 0], vec![3, 4]]).unwrap_err();
        assert_eq!(err.code(), crate::ErrorCode::DegenerateTable);
        let err = pearson_chi2(&[vec![5, 0], vec![3, 0]]).unwrap_err();
        assert_eq!(err.code(), crate::ErrorCode::DegenerateTable);
        assert!(pearson_chi2(&[vec![1, 2]]).is_err());
    }

    proptest! {
        #[test]
        fn chi2_permutation_invariant(a in 1u64..50, b in 1u64..50, c in 1u64..50, d in 1u64..50) {
            let t1 = pearson_chi2(&[vec![a, b], vec![c, d]]).unwrap();
            let t2 = pearson_chi2(&[vec![c, d], vec![a, b]]).unwrap();
            let t3 = pearson_chi2(&[vec![b, a], vec![d, c]]).unwrap();
            prop_assert!((t1.statistic - t2.statistic).abs() < 1e-9);
            prop_assert!((t1.statistic - t3.statistic).abs() < 1e-9);
            prop_assert!((0.0..=1.0).contains(&t1.p_value));
        }

        #[test]
        fn chi2_zero_iff_proportional(a in 1u64..20, b in 1u64..20, k in 1u64..5) {
            let t = pearson_chi2(&[vec![a, b], vec![a * k, b * k]]).unwrap();
            prop_assert!(t.statistic.abs() < 1e-9);
        }
    }

    #[test]
    fn mwu_small_exact() {
        let r = mann_whitney_u(&[1.0, 2.0], &[3.0, 4.0]).unwrap();
        assert_eq!(r.statistic, 0.0);
        assert_eq!(r.reference, Reference::Exact);
        assert!((r.p_value - 2.0 / 6.0).abs() < 1e-15);
    }

    #[test]
    fn mwu_identical_samples_p_one() {
        let x = [3.0, 1.0, 4.0, 1.5, 9.0];
        let r = mann_whitney_u(&x, &x).unwrap();
        assert_eq!(r.p_value, 1.0);
        let r = mann_whitney_u(&[2.0; 4], &[2.0; 4]).unwrap();
        assert_eq!(r.p_value, 1.0);
    }

    #[test]
    fn mwu_distribution_counts() {
        let d = u_distribution(2, 2);
        assert_eq!(d, [1, 1, 2, 1, 1]);
        let total: u64 = u_distribution(8, 8).iter().sum();
        assert_eq!(total, 12_870);
    }

    #[test]
    fn mwu_separated_large_samples() {
        let x: Vec<f64> = (0..10).map(f64::from).collect();
        let y: Vec<f64> = (10..20).map(f64::from).collect();
        let r = mann_whitney_u(&x, &y).unwrap();
        assert_eq!(r.reference, Reference::Normal);
        assert!(r.p_value < 0.001);
    }

    #[test]
    fn mwu_normal_matches_scipy_value() {
        // scipy.stats.mannwhitneyu(range(1,11), range(6,16), method="asymptotic")
        let x: Vec<f64> = (1..=10).map(f64::from).collect();
        let y: Vec<f64> = (6..=15).map(f64::from).collect();
        let r = mann_whitney_u(&x, &y).unwrap();
        assert_eq!(r.statistic, 12.5);
        assert!((r.p_value - 0.005_075_392_315_273_923).abs() < 1e-12, "{}", r.p_value);
    }

    #[test]
    fn mwu_empty() {
        assert_eq!(
            mann_whitney_u(&[], &[1.0]).unwrap_err().code(),
            crate::ErrorCode::EmptySample
        );
    }

    proptest! {
        #[test]
        fn mwu_symmetric_and_rank_invariant(
            x in prop::collection::vec(-100.0f64..100.0, 1..15),
            y in prop::collection::vec(-100.0f64..100.0, 1..15),
        ) {
            let a = mann_whitney_u(&x, &y).unwrap();
            let b = mann_whitney_u(&y, &x).unwrap();
            prop_assert_eq!(a.p_value, b.p_value);
            let tx: Vec<f64> = x.iter().map(|v| (v / 10.0).exp()).collect();
            let ty: Vec<f64> = y.iter().map(|v| (v / 10.0).exp()).collect();
            let c = mann_whitney_u(&tx, &ty).unwrap();
            prop_assert!((a.p_value - c.p_value).abs() < 1e-12);
            prop_assert!((0.0..=1.0).contains(&a.p_value));
        }
    }

    #[test]
    fn holm_examples() {
        let r = holm_bonferroni(&[0.01, 0.04], 0.05).unwrap();
        assert_eq!(r.rejected, [true, true]);
        let r = holm_bonferroni(&[0.03, 0.04], 0.05).unwrap();
        assert_eq!(r.rejected, [false, false]);
        let r = holm_bonferroni(&[0.2], 0.05).unwrap();
        assert_eq!(r.rejected, [false]);
        assert_eq!(r.adjusted, [0.2]);
        let r = holm_bonferroni(&[0.05, 0.001, 0.2, 0.01], 0.05).unwrap();
        assert_eq!(r.rejected, [false, true, false, true]);
        for (got, want) in r.adjusted.iter().zip([0.1, 0.004, 0.2, 0.03]) {
            assert!((got - want).abs() < 1e-15);
        }
    }

    proptest! {
        #[test]
        fn holm_between_bonferroni_and_uncorrected(
            ps in prop::collection::vec(0.0f64..=1.0, 1..12),
            alpha in 0.01f64..0.2,
        ) {
            let r = holm_bonferroni(&ps, alpha).unwrap();
            let m = ps.len() as f64;
            for (i, &p) in ps.iter().enumerate() {
                if p < alpha / m { prop_assert!(r.rejected[i]); }
                if r.rejected[i] { prop_assert!(p < alpha); }
                prop_assert!(r.adjusted[i] >= p && r.adjusted[i] <= 1.0);
            }
        }
    }
}
