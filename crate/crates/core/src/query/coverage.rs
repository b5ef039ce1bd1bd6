//! Coverage of participant query mass by a candidate query set, cumulative
//! efficiency curves and the two reference sets (random subsets of the
//! participant pool and the top-N frequency oracle).

use std::fmt::Write as _;

use rand::seq::SliceRandom;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::tfidf::VectorSpace;
use crate::error::{Error, Result};
use crate::stats::{mean, percentile_interval, RandomSource};
use crate::trace::Cohort;

/// Slack applied to the τ comparison so that cosines which are equal in
/// exact arithmetic do not fall below τ by rounding.
pub const COVERAGE_EPS: f64 = 1e-12;
pub const HEADLINE_TAU: f64 = 0.6;
pub const DEFAULT_BASELINE_REPEATS: usize = 1000;
pub const DEFAULT_N_MAX: usize = 40;

pub fn default_tau_grid() -> Vec<f64> {
    (0..=20).map(|i| i as f64 / 20.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CurveMethod {
    Agent,
    RandomBaseline,
    TopNOracle,
}

impl CurveMethod {
    pub fn as_str(self) -> &'static str {
        match self {
            CurveMethod::Agent => "agent",
            CurveMethod::RandomBaseline => "random-baseline",
            CurveMethod::TopNOracle => "top-n-oracle",
        }
    }
}

/// Order in which agent queries enter an efficiency curve.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum OrderPolicy {
    /// Descending agent occurrence count, ties by first appearance.
    #[default]
    FrequencyDesc,
    FirstAppearance,
}

impl std::str::FromStr for OrderPolicy {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "frequency-desc" | "frequency" => Ok(OrderPolicy::FrequencyDesc),
            "first-appearance" => Ok(OrderPolicy::FirstAppearance),
            _ => Err(Error::InvalidArgument(format!("unknown order policy `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CoverageCurve {
    pub method: CurveMethod,
    /// Size of the candidate set.
    pub size: usize,
    pub thresholds: Vec<f64>,
    pub coverage: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EfficiencyCurve {
    pub method: CurveMethod,
    pub tau: f64,
    pub n_max: usize,
    pub added_counts: Vec<usize>,
    pub coverage: Vec<f64>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<Vec<(f64, f64)>>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CurveRow {
    pub method: CurveMethod,
    pub tau: f64,
    pub k: usize,
    pub coverage: f64,
    pub ci_lo: Option<f64>,
    pub ci_hi: Option<f64>,
}

impl CoverageCurve {
    pub fn rows(&self) -> Vec<CurveRow> {
        (0..self.thresholds.len())
            .map(|i| CurveRow {
                method: self.method,
                tau: self.thresholds[i],
                k: self.size,
                coverage: self.coverage[i],
                ci_lo: self.ci.as_ref().map(|c| c[i].0),
                ci_hi: self.ci.as_ref().map(|c| c[i].1),
            })
            .collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.coverage.windows(2).all(|w| w[1] <= w[0])
    }
}

impl EfficiencyCurve {
    pub fn rows(&self) -> Vec<CurveRow> {
        (0..self.added_counts.len())
            .map(|i| CurveRow {
                method: self.method,
                tau: self.tau,
                k: self.added_counts[i],
                coverage: self.coverage[i],
                ci_lo: self.ci.as_ref().map(|c| c[i].0),
                ci_hi: self.ci.as_ref().map(|c| c[i].1),
            })
            .collect()
    }

    pub fn is_monotone(&self) -> bool {
        self.coverage.windows(2).all(|w| w[1] >= w[0])
    }
}

pub const CURVE_CSV_HEADER: &str = "method,tau,k,coverage,ci_lo,ci_hi";

pub fn curves_csv(rows: &[CurveRow]) -> String {
    let mut out = String::from(CURVE_CSV_HEADER);
    out.push('\n');
    let opt = |v: Option<f64>| v.map(|x| x.to_string()).unwrap_or_default();
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{}",
            r.method.as_str(),
            r.tau,
            r.k,
            r.coverage,
            opt(r.ci_lo),
            opt(r.ci_hi)
        );
    }
    out
}

/// Unique participant queries with their occurrence weights.
struct Targets {
    docs: Vec<usize>,
    weights: Vec<f64>,
    total: f64,
}

impl Targets {
    fn new(space: &VectorSpace) -> Self {
        let docs = space.cohort_docs(Cohort::Participant);
        let weights: Vec<f64> = docs
            .iter()
            .map(|&d| space.documents[d].participant_weight as f64)
            .collect();
        let total = weights.iter().sum();
        Targets { docs, weights, total }
    }

    fn share(&self, best: &[f64], tau: f64) -> f64 {
        if self.total == 0.0 {
            return 0.0;
        }
        let covered: f64 = best
            .iter()
            .zip(&self.weights)
            .filter(|(b, _)| **b >= tau - COVERAGE_EPS)
            .map(|(_, w)| w)
            .sum();
        covered / self.total
    }

    /// Best similarity of each target to any candidate; −∞ without
    /// candidates.
    fn best(&self, space: &VectorSpace, candidates: &[usize]) -> Vec<f64> {
        self.docs
            .par_iter()
            .map(|&q| {
                candidates
                    .iter()
                    .map(|&c| space.similarity(c, q))
                    .fold(f64::NEG_INFINITY, f64::max)
            })
            .collect()
    }

    /// Coverage after each prefix of `order`.
    fn cumulative(&self, space: &VectorSpace, order: &[usize], tau: f64) -> Vec<f64> {
        let mut best = vec![f64::NEG_INFINITY; self.docs.len()];
        order
            .iter()
            .map(|&c| {
                for (b, &q) in best.iter_mut().zip(&self.docs) {
                    *b = b.max(space.similarity(c, q));
                }
                self.share(&best, tau)
            })
            .collect()
    }
}

fn check_tau(tau: f64) -> Result<()> {
    if (0.0..=1.0).contains(&tau) {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!("τ must lie in [0, 1], got {tau}")))
    }
}

/// Share of participant query mass whose nearest candidate reaches `tau`.
pub fn coverage(space: &VectorSpace, candidates: &[usize], tau: f64) -> Result<f64> {
    check_tau(tau)?;
    let targets = Targets::new(space);
    Ok(targets.share(&targets.best(space, candidates), tau))
}

pub fn coverage_curve(
    space: &VectorSpace,
    candidates: &[usize],
    thresholds: &[f64],
    method: CurveMethod,
) -> Result<CoverageCurve> {
    thresholds.iter().try_for_each(|&t| check_tau(t))?;
    let targets = Targets::new(space);
    let best = targets.best(space, candidates);
    Ok(CoverageCurve {
        method,
        size: candidates.len(),
        thresholds: thresholds.to_vec(),
        coverage: thresholds.iter().map(|&t| targets.share(&best, t)).collect(),
        ci: None,
    })
}

pub fn agent_order(space: &VectorSpace, policy: OrderPolicy) -> Vec<usize> {
    match policy {
        OrderPolicy::FrequencyDesc => space.docs_by_frequency(Cohort::Agent),
        OrderPolicy::FirstAppearance => space.cohort_docs(Cohort::Agent),
    }
}

/// Cumulative coverage as agent queries are added in `policy` order.
/// `n_max` is clamped to the number of unique agent queries.
pub fn efficiency_curve(
    space: &VectorSpace,
    tau: f64,
    policy: OrderPolicy,
    n_max: usize,
) -> Result<EfficiencyCurve> {
    check_tau(tau)?;
    let mut order = agent_order(space, policy);
    order.truncate(n_max);
    Ok(efficiency_from_order(space, &order, tau, CurveMethod::Agent))
}

fn efficiency_from_order(space: &VectorSpace, order: &[usize], tau: f64, method: CurveMethod) -> EfficiencyCurve {
    let targets = Targets::new(space);
    EfficiencyCurve {
        method,
        tau,
        n_max: order.len(),
        added_counts: (1..=order.len()).collect(),
        coverage: targets.cumulative(space, order, tau),
        ci: None,
    }
}

fn pool_check(space: &VectorSpace, size: usize) -> Result<Vec<usize>> {
    let pool = space.cohort_docs(Cohort::Participant);
    if size > pool.len() {
        return Err(Error::SizeExceedsPool { requested: size, pool: pool.len() });
    }
    Ok(pool)
}

/// Uniform random ordered draw of `size` pool members for repeat `r`.
fn draw(pool: &[usize], size: usize, rng: &RandomSource, r: usize) -> Vec<usize> {
    let mut stream = rng.stream(r as u64);
    let mut ids = pool.to_vec();
    let (picked, _) = ids.partial_shuffle(&mut stream, size);
    picked.to_vec()
}

fn summarize(per_repeat: &[Vec<f64>], points: usize, confidence: f64) -> (Vec<f64>, Vec<(f64, f64)>) {
    (0..points)
        .map(|i| {
            let column: Vec<f64> = per_repeat.iter().map(|r| r[i]).collect();
            (mean(&column).unwrap_or(0.0), percentile_interval(column, confidence))
        })
        .unzip()
}

fn check_repeats(repeats: usize) -> Result<()> {
    if repeats == 0 {
        return Err(Error::InvalidArgument("repeats must be at least 1".into()));
    }
    Ok(())
}

/// Coverage over `thresholds` of size-matched random subsets of unique
/// participant queries. Repeat `r` draws from stream `r`.
pub fn random_baseline_coverage(
    space: &VectorSpace,
    size: usize,
    thresholds: &[f64],
    repeats: usize,
    confidence: f64,
    rng: &RandomSource,
) -> Result<CoverageCurve> {
    thresholds.iter().try_for_each(|&t| check_tau(t))?;
    check_repeats(repeats)?;
    let pool = pool_check(space, size)?;
    let targets = Targets::new(space);
    let per_repeat: Vec<Vec<f64>> = (0..repeats)
        .into_par_iter()
        .map(|r| {
            let subset = draw(&pool, size, rng, r);
            let best = targets.best(space, &subset);
            thresholds.iter().map(|&t| targets.share(&best, t)).collect()
        })
        .collect();
    let (coverage, ci) = summarize(&per_repeat, thresholds.len(), confidence);
    Ok(CoverageCurve {
        method: CurveMethod::RandomBaseline,
        size,
        thresholds: thresholds.to_vec(),
        coverage,
        ci: Some(ci),
    })
}

/// Random-baseline efficiency: each repeat adds a random ordering of the
/// pool one query at a time, so every prefix is a uniform subset.
pub fn random_baseline_efficiency(
    space: &VectorSpace,
    n_max: usize,
    tau: f64,
    repeats: usize,
    confidence: f64,
    rng: &RandomSource,
) -> Result<EfficiencyCurve> {
    check_tau(tau)?;
    check_repeats(repeats)?;
    let pool = pool_check(space, n_max)?;
    let targets = Targets::new(space);
    let per_repeat: Vec<Vec<f64>> = (0..repeats)
        .into_par_iter()
        .map(|r| targets.cumulative(space, &draw(&pool, n_max, rng, r), tau))
        .collect();
    let (coverage, ci) = summarize(&per_repeat, n_max, confidence);
    Ok(EfficiencyCurve {
        method: CurveMethod::RandomBaseline,
        tau,
        n_max,
        added_counts: (1..=n_max).collect(),
        coverage,
        ci: Some(ci),
    })
}

/// The `n` most frequent unique participant queries.
pub fn topn_set(space: &VectorSpace, n: usize) -> Vec<usize> {
    let mut ids = space.docs_by_frequency(Cohort::Participant);
    ids.truncate(n);
    ids
}

pub fn topn_oracle_coverage(space: &VectorSpace, n: usize, thresholds: &[f64]) -> Result<CoverageCurve> {
    if n == 0 {
        return Err(Error::InvalidArgument("oracle size must be at least 1".into()));
    }
    pool_check(space, n)?;
    coverage_curve(space, &topn_set(space, n), thresholds, CurveMethod::TopNOracle)
}

pub fn topn_oracle_efficiency(space: &VectorSpace, n_max: usize, tau: f64) -> Result<EfficiencyCurve> {
    check_tau(tau)?;
    if n_max == 0 {
        return Err(Error::InvalidArgument("oracle size must be at least 1".into()));
    }
    Ok(efficiency_from_order(space, &topn_set(space, n_max), tau, CurveMethod::TopNOracle))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ErrorCode;

    fn mirrored() -> VectorSpace {
        let qs = ["jazz piano", "jazz", "rock anthem", "lofi beats", "piano"];
        VectorSpace::fit(qs.iter().flat_map(|q| [(Cohort::Participant, *q), (Cohort::Agent, *q)]))
    }

    #[test]
    fn self_coverage_is_total() {
        let space = mirrored();
        let agents = space.cohort_docs(Cohort::Agent);
        let curve = coverage_curve(&space, &agents, &default_tau_grid(), CurveMethod::Agent).unwrap();
        assert!(curve.coverage.iter().all(|&c| c == 1.0));
    }

    #[test]
    fn tau_zero_covers_everything() {
        let space = VectorSpace::fit([
            (Cohort::Participant, "jazz"),
            (Cohort::Participant, "rock"),
            (Cohort::Agent, "opera"),
        ]);
        let agents = space.cohort_docs(Cohort::Agent);
        assert_eq!(coverage(&space, &agents, 0.0).unwrap(), 1.0);
        assert_eq!(coverage(&space, &agents, 0.1).unwrap(), 0.0);
        assert_eq!(coverage(&space, &[], 0.5).unwrap(), 0.0);
    }

    #[test]
    fn weighted_hand_example() {
        // "jazz piano" (weight 3) is matched exactly by the agent, "rock"
        // (weight 1) shares nothing with any agent query.
        let space = VectorSpace::fit([
            (Cohort::Participant, "jazz piano"),
            (Cohort::Participant, "jazz piano"),
            (Cohort::Participant, "jazz piano"),
            (Cohort::Participant, "rock"),
            (Cohort::Agent, "jazz piano"),
        ]);
        let agents = space.cohort_docs(Cohort::Agent);
        assert_eq!(coverage(&space, &agents, 0.5).unwrap(), 0.75);
    }

    #[test]
    fn efficiency_flat_step_and_endpoint() {
        let space = VectorSpace::fit([
            (Cohort::Participant, "jazz"),
            (Cohort::Participant, "rock"),
            (Cohort::Agent, "jazz"),
            (Cohort::Agent, "jazz"),
            (Cohort::Agent, "jazz"),
            (Cohort::Agent, "opera"),
            (Cohort::Agent, "opera"),
            (Cohort::Agent, "rock"),
        ]);
        let curve = efficiency_curve(&space, 0.6, OrderPolicy::FrequencyDesc, 40).unwrap();
        assert_eq!(curve.n_max, 3);
        assert_eq!(curve.coverage, [0.5, 0.5, 1.0]);
        assert!(curve.is_monotone());
        let all = space.cohort_docs(Cohort::Agent);
        assert_eq!(*curve.coverage.last().unwrap(), coverage(&space, &all, 0.6).unwrap());
    }

    #[test]
    fn full_pool_baseline_has_zero_width() {
        let space = mirrored();
        let pool = space.cohort_docs(Cohort::Participant).len();
        let rng = RandomSource::new(5);
        let curve = random_baseline_coverage(&space, pool, &default_tau_grid(), 50, 0.95, &rng).unwrap();
        assert!(curve.coverage.iter().all(|&c| c == 1.0));
        assert!(curve.ci.unwrap().iter().all(|&(lo, hi)| lo == 1.0 && hi == 1.0));
        let err = random_baseline_coverage(&space, pool + 1, &[0.6], 5, 0.95, &rng).unwrap_err();
        assert_eq!(err.code(), ErrorCode::SizeExceedsPool);
    }

    #[test]
    fn baseline_is_seed_deterministic() {
        let space = mirrored();
        let rng = RandomSource::new(77);
        let a = random_baseline_efficiency(&space, 3, 0.6, 1, 0.95, &rng).unwrap();
        let b = random_baseline_efficiency(&space, 3, 0.6, 1, 0.95, &rng).unwrap();
        assert_eq!(a, b);
        assert!(a.is_monotone());
    }

    #[test]
    fn oracle_with_degenerate_mass() {
        let mut stream = vec![(Cohort::Participant, "hits"); 5];
        stream.push((Cohort::Agent, "x"));
        let space = VectorSpace::fit(stream);
        let curve = topn_oracle_coverage(&space, 1, &default_tau_grid()).unwrap();
        assert!(curve.coverage.iter().all(|&c| c == 1.0));
    }

    #[test]
    fn csv_layout() {
        let space = mirrored();
        let curve = topn_oracle_coverage(&space, 2, &[0.0, 0.5]).unwrap();
        let csv = curves_csv(&curve.rows());
        let mut lines = csv.lines();
        assert_eq!(lines.next(), Some(CURVE_CSV_HEADER));
        assert!(lines.next().unwrap().starts_with("top-n-oracle,0,2,1,,"));
    }
}
