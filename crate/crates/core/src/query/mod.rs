//! Query formulation: first-query similarity and the distribution of all
//! queries in a shared TF-IDF space.

mod coverage;
mod first_query;
mod gestalt;
mod tfidf;
mod typicality;

pub use coverage::{
    agent_order, coverage, coverage_curve, curves_csv, default_tau_grid, efficiency_curve,
    random_baseline_coverage, random_baseline_efficiency, topn_oracle_coverage, topn_oracle_efficiency,
    topn_set, CoverageCurve, CurveMethod, CurveRow, EfficiencyCurve, OrderPolicy, COVERAGE_EPS,
    CURVE_CSV_HEADER, DEFAULT_BASELINE_REPEATS, DEFAULT_N_MAX, HEADLINE_TAU,
};
pub use first_query::{
    compare_task_means, first_query_similarity, BootstrapUnit, FirstQueryConfig, FirstQuerySimilarity,
    PairClass, PairSpec, Party, SimilarityMetric, TaskSimilarity,
};
pub use gestalt::{gestalt_ratio, matched_chars};
pub use tfidf::{build_vector_space, cosine, query_terms, QueryDoc, SparseVector, VectorSpace};
pub use typicality::{doc_typicality, typicality, typicality_share, TypicalityShare};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::stats::RandomSource;
use crate::trace::{AnalysisSet, Cohort};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct DistributionConfig {
    pub thresholds: Vec<f64>,
    pub headline_tau: f64,
    pub n_max: usize,
    pub order: OrderPolicy,
    pub repeats: usize,
    pub confidence: f64,
}

impl Default for DistributionConfig {
    fn default() -> Self {
        DistributionConfig {
            thresholds: default_tau_grid(),
            headline_tau: HEADLINE_TAU,
            n_max: DEFAULT_N_MAX,
            order: OrderPolicy::FrequencyDesc,
            repeats: DEFAULT_BASELINE_REPEATS,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct DistributionReport {
    pub unique_agent_queries: usize,
    pub unique_participant_queries: usize,
    pub typicality: TypicalityShare,
    pub headline_tau: f64,
    pub headline: HeadlineCoverage,
    pub coverage: Vec<CoverageCurve>,
    pub efficiency: Vec<EfficiencyCurve>,
    pub notes: Vec<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct HeadlineCoverage {
    pub agent: f64,
    pub random_baseline: f64,
    pub random_baseline_ci: (f64, f64),
    pub topn_oracle: f64,
}

impl DistributionReport {
    pub fn rows(&self) -> Vec<CurveRow> {
        let mut rows: Vec<CurveRow> = self.coverage.iter().flat_map(|c| c.rows()).collect();
        rows.extend(self.efficiency.iter().flat_map(|c| c.rows()));
        rows
    }
}

/// Typicality, coverage over the τ grid and efficiency at the headline τ
/// for the agent set and both reference sets. The reference sets are sized
/// to the agent set, capped by the participant pool.
pub fn distributional_analysis(
    set: &AnalysisSet<'_>,
    config: &DistributionConfig,
    rng: &RandomSource,
) -> Result<DistributionReport> {
    let space = build_vector_space(set)?;
    let agents = space.cohort_docs(Cohort::Agent);
    let pool = space.cohort_docs(Cohort::Participant).len();
    let mut notes = Vec::new();
    let size = agents.len().min(pool);
    if size < agents.len() {
        notes.push(format!(
            "reference sets capped at the participant pool ({pool}) below the agent set size ({})",
            agents.len()
        ));
    }
    let n_max = config.n_max.min(size);
    if n_max < config.n_max {
        notes.push(format!("efficiency curves end at {n_max} queries (requested {})", config.n_max));
    }

    let agent_cov = coverage_curve(&space, &agents, &config.thresholds, CurveMethod::Agent)?;
    let base_cov = random_baseline_coverage(
        &space,
        size,
        &config.thresholds,
        config.repeats,
        config.confidence,
        &rng.derive("baseline-coverage"),
    )?;
    let oracle_cov = topn_oracle_coverage(&space, size.max(1), &config.thresholds)?;

    let tau = config.headline_tau;
    let agent_eff = efficiency_curve(&space, tau, config.order, n_max)?;
    let base_eff = random_baseline_efficiency(
        &space,
        n_max,
        tau,
        config.repeats,
        config.confidence,
        &rng.derive("baseline-efficiency"),
    )?;
    let oracle_eff = topn_oracle_efficiency(&space, n_max.max(1), tau)?;

    let base_head = random_baseline_coverage(
        &space,
        size,
        &[tau],
        config.repeats,
        config.confidence,
        &rng.derive("baseline-coverage"),
    )?;
    let headline = HeadlineCoverage {
        agent: coverage(&space, &agents, tau)?,
        random_baseline: base_head.coverage[0],
        random_baseline_ci: base_head.ci.as_ref().map_or((0.0, 0.0), |c| c[0]),
        topn_oracle: coverage(&space, &topn_set(&space, size), tau)?,
    };

    Ok(DistributionReport {
        unique_agent_queries: agents.len(),
        unique_participant_queries: pool,
        typicality: typicality_share(&space),
        headline_tau: tau,
        headline,
        coverage: vec![agent_cov, base_cov, oracle_cov],
        efficiency: vec![agent_eff, base_eff, oracle_eff],
        notes,
    })
}
