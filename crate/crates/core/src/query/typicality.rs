use serde::Serialize;

use super::tfidf::{cosine, SparseVector, VectorSpace};
use crate::stats::quantile_sorted;
use crate::trace::Cohort;

/// Cosine to the frequency-weighted participant centroid.
pub fn typicality(space: &VectorSpace, vector: &SparseVector) -> f64 {
    cosine(vector, &space.participant_centroid)
}

pub fn doc_typicality(space: &VectorSpace, doc: usize) -> f64 {
    typicality(space, &space.vectors[doc])
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalityShare {
    /// Share of unique agent queries at or above the participant median.
    pub agent_share: f64,
    /// The same share computed for the participant queries themselves.
    pub participant_share: f64,
    pub participant_median: f64,
    pub agent_queries: usize,
    pub participant_queries: usize,
}

fn share_at_or_above(values: &[f64], threshold: f64) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    values.iter().filter(|&&v| v >= threshold).count() as f64 / values.len() as f64
}

/// Median over unique participant queries (unweighted), then the share of
/// unique agent queries reaching it.
pub fn typicality_share(space: &VectorSpace) -> TypicalityShare {
    let of = |cohort| -> Vec<f64> {
        space
            .cohort_docs(cohort)
            .into_iter()
            .map(|d| doc_typicality(space, d))
            .collect()
    };
    let agent = of(Cohort::Agent);
    let participant = of(Cohort::Participant);
    let mut sorted = participant.clone();
    sorted.sort_by(f64::total_cmp);
    let median = if sorted.is_empty() { 0.0 } else { quantile_sorted(&sorted, 0.5) };
    TypicalityShare {
        agent_share: share_at_or_above(&agent, median),
        participant_share: share_at_or_above(&participant, median),
        participant_median: median,
        agent_queries: agent.len(),
        participant_queries: participant.len(),
    }
}
