//! Pairwise similarity of first queries, averaged within task and then
//! across tasks.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::gestalt::gestalt_ratio;
use super::tfidf::VectorSpace;
use crate::error::{Error, Result};
use crate::stats::{bootstrap_ci, mann_whitney_u, percentile_interval, IntervalEstimate, RandomSource, Statistic, TestResult};
use crate::trace::{char_normalize_with, AnalysisSet, Cohort, Run, Subgroup, WhitespaceMode};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PairClass {
    AgentParticipant,
    ParticipantParticipant,
    AgentAgent,
}

impl PairClass {
    pub const ALL: [PairClass; 3] = [
        PairClass::AgentParticipant,
        PairClass::ParticipantParticipant,
        PairClass::AgentAgent,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            PairClass::AgentParticipant => "agent-participant",
            PairClass::ParticipantParticipant => "participant-participant",
            PairClass::AgentAgent => "agent-agent",
        }
    }

    pub fn spec(self) -> PairSpec {
        let (l, r) = match self {
            PairClass::AgentParticipant => (Cohort::Agent, Cohort::Participant),
            PairClass::ParticipantParticipant => (Cohort::Participant, Cohort::Participant),
            PairClass::AgentAgent => (Cohort::Agent, Cohort::Agent),
        };
        PairSpec { left: Party::cohort(l), right: Party::cohort(r) }
    }
}

/// A cohort, optionally narrowed to one subgroup.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Party {
    pub cohort: Cohort,
    pub subgroup: Option<Subgroup>,
}

impl Party {
    pub fn cohort(cohort: Cohort) -> Self {
        Party { cohort, subgroup: None }
    }

    pub fn subgroup(cohort: Cohort, subgroup: Subgroup) -> Self {
        Party { cohort, subgroup: Some(subgroup) }
    }

    fn admits(&self, run: &Run) -> bool {
        run.cohort == self.cohort && self.subgroup.is_none_or(|g| run.has_subgroup(g))
    }

    pub fn label(&self) -> String {
        match self.subgroup {
            Some(g) => format!("{}:{}", self.cohort, g),
            None => self.cohort.to_string(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct PairSpec {
    pub left: Party,
    pub right: Party,
}

impl PairSpec {
    pub fn label(&self) -> String {
        format!("{}~{}", self.left.label(), self.right.label())
    }

    fn within(&self) -> bool {
        self.left == self.right
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SimilarityMetric {
    #[default]
    Gestalt,
    TfidfCosine,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BootstrapUnit {
    #[default]
    Tasks,
    /// Pairs resampled within each task, task means then macro-averaged.
    Pairs,
}

impl std::str::FromStr for BootstrapUnit {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "tasks" => Ok(BootstrapUnit::Tasks),
            "pairs" => Ok(BootstrapUnit::Pairs),
            _ => Err(Error::InvalidArgument(format!("unknown bootstrap unit `{s}`"))),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FirstQueryConfig {
    pub metric: SimilarityMetric,
    pub whitespace: WhitespaceMode,
    pub bootstrap_unit: BootstrapUnit,
    pub resamples: usize,
    pub confidence: f64,
}

impl Default for FirstQueryConfig {
    fn default() -> Self {
        FirstQueryConfig {
            metric: SimilarityMetric::Gestalt,
            whitespace: WhitespaceMode::RemoveAll,
            bootstrap_unit: BootstrapUnit::Tasks,
            resamples: crate::stats::DEFAULT_BOOTSTRAP_RESAMPLES,
            confidence: 0.95,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TaskSimilarity {
    pub task_id: String,
    pub mean: f64,
    pub pairs: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FirstQuerySimilarity {
    pub pairs: String,
    pub metric: SimilarityMetric,
    pub per_task: Vec<TaskSimilarity>,
    pub macro_mean: Option<f64>,
    pub ci: Option<IntervalEstimate>,
    pub excluded_tasks: BTreeMap<String, String>,
}

impl FirstQuerySimilarity {
    pub fn task_means(&self) -> Vec<f64> {
        self.per_task.iter().map(|t| t.mean).collect()
    }
}

enum Scorer {
    Gestalt(WhitespaceMode),
    Tfidf(VectorSpace),
}

impl Scorer {
    fn new(set: &AnalysisSet<'_>, config: &FirstQueryConfig) -> Self {
        match config.metric {
            SimilarityMetric::Gestalt => Scorer::Gestalt(config.whitespace),
            SimilarityMetric::TfidfCosine => Scorer::Tfidf(VectorSpace::fit(
                set.runs().filter_map(|r| r.first_query().map(|q| (r.cohort, q))),
            )),
        }
    }

    fn score(&self, a: &str, b: &str) -> f64 {
        match self {
            Scorer::Gestalt(mode) => gestalt_ratio(&char_normalize_with(a, *mode), &char_normalize_with(b, *mode)),
            Scorer::Tfidf(space) => match (space.doc_id(a), space.doc_id(b)) {
                (Some(x), Some(y)) => space.similarity(x, y),
                _ => 0.0,
            },
        }
    }
}

fn task_pairs(set: &AnalysisSet<'_>, task: &str, spec: &PairSpec, scorer: &Scorer) -> Vec<f64> {
    let side = |p: &Party| -> Vec<&Run> {
        set.task_runs(task)
            .filter(|r| p.admits(r) && r.first_query().is_some())
            .collect()
    };
    let left = side(&spec.left);
    let q = |r: &Run| r.first_query().unwrap_or_default().to_owned();
    let mut sims = Vec::new();
    if spec.within() {
        for i in 0..left.len() {
            for j in i + 1..left.len() {
                sims.push(scorer.score(&q(left[i]), &q(left[j])));
            }
        }
    } else {
        let right = side(&spec.right);
        for l in &left {
            for r in &right {
                if l.run_id != r.run_id {
                    sims.push(scorer.score(&q(l), &q(r)));
                }
            }
        }
    }
    sims
}

/// Per-task mean similarity over all admissible first-query pairs, the
/// unweighted macro mean and a percentile bootstrap interval. Tasks with
/// no pair are listed in `excluded_tasks`.
pub fn first_query_similarity(
    set: &AnalysisSet<'_>,
    spec: &PairSpec,
    config: &FirstQueryConfig,
    rng: &RandomSource,
) -> Result<FirstQuerySimilarity> {
    let scorer = Scorer::new(set, config);
    let mut per_task = Vec::new();
    let mut task_sims = Vec::new();
    let mut excluded = BTreeMap::new();
    for task in set.task_ids() {
        let sims = task_pairs(set, task, spec, &scorer);
        if sims.is_empty() {
            excluded.insert(task.to_owned(), "fewer than two first queries for this pair class".into());
            continue;
        }
        per_task.push(TaskSimilarity {
            task_id: task.to_owned(),
            mean: sims.iter().sum::<f64>() / sims.len() as f64,
            pairs: sims.len(),
        });
        task_sims.push(sims);
    }
    let means: Vec<f64> = per_task.iter().map(|t| t.mean).collect();
    let macro_mean = crate::stats::mean(&means);
    let ci = match (macro_mean, config.bootstrap_unit) {
        (None, _) => None,
        (Some(_), BootstrapUnit::Tasks) => Some(bootstrap_ci(
            &means,
            Statistic::Mean,
            config.resamples,
            config.confidence,
            *rng,
        )?),
        (Some(point), BootstrapUnit::Pairs) => Some(pair_bootstrap(&task_sims, point, config, rng)?),
    };
    Ok(FirstQuerySimilarity {
        pairs: spec.label(),
        metric: config.metric,
        per_task,
        macro_mean,
        ci,
        excluded_tasks: excluded,
    })
}

fn pair_bootstrap(
    task_sims: &[Vec<f64>],
    point: f64,
    config: &FirstQueryConfig,
    rng: &RandomSource,
) -> Result<IntervalEstimate> {
    if config.resamples == 0 {
        return Err(Error::InvalidArgument("resamples must be at least 1".into()));
    }
    let stats: Vec<f64> = (0..config.resamples as u64)
        .into_par_iter()
        .map(|b| {
            let mut r = rng.stream(b);
            let total: f64 = task_sims
                .iter()
                .map(|sims| {
                    let n = sims.len();
                    (0..n).map(|_| sims[r.gen_range(0..n)]).sum::<f64>() / n as f64
                })
                .sum();
            total / task_sims.len() as f64
        })
        .collect();
    let (lo, hi) = percentile_interval(stats, config.confidence);
    Ok(IntervalEstimate {
        point,
        lo,
        hi,
        confidence: config.confidence,
        method: "stratified-pair-bootstrap".into(),
    })
}

/// Mann–Whitney U over the per-task means of two analyses.
pub fn compare_task_means(a: &FirstQuerySimilarity, b: &FirstQuerySimilarity) -> Result<TestResult> {
    mann_whitney_u(&a.task_means(), &b.task_means())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::trace::{corpus_from_parts, select_analysis_set, AnalysisPolicy, ReasoningPattern, StateMap, TaskSpec, TraceEvent};

    fn run(id: &str, task: &str, cohort: Cohort, query: &str) -> Run {
        Run {
            run_id: id.into(),
            task_id: task.into(),
            cohort,
            actor_id: id.into(),
            subgroups: Default::default(),
            compliant: true,
            start_time: None,
            end_time: None,
            events: vec![TraceEvent::query(0, query)],
            success: None,
            difficulty: None,
        }
    }

    fn task(id: &str) -> TaskSpec {
        TaskSpec {
            task_id: id.into(),
            pattern: ReasoningPattern::Linear,
            accepted_outcomes: ["app:player:x".to_string()].into(),
            te_excluded: false,
            description: String::new(),
        }
    }

    fn config() -> FirstQueryConfig {
        FirstQueryConfig { resamples: 200, ..Default::default() }
    }

    #[test]
    fn identical_queries_give_one_everywhere() {
        let runs = vec![
            run("a1", "T1", Cohort::Agent, "Top 50"),
            run("a2", "T1", Cohort::Agent, "top50"),
            run("p1", "T1", Cohort::Participant, "top 50"),
            run("p2", "T1", Cohort::Participant, "TOP 50"),
        ];
        let corpus = corpus_from_parts(runs, vec![task("T1")], StateMap::default()).unwrap();
        let sel = select_analysis_set(&corpus, AnalysisPolicy::All);
        let set = AnalysisSet::new(&corpus, &sel);
        for class in PairClass::ALL {
            let r = first_query_similarity(&set, &class.spec(), &config(), &RandomSource::new(1)).unwrap();
            assert_eq!(r.macro_mean, Some(1.0), "{class:?}");
        }
    }

    #[test]
    fn macro_mean_is_unweighted_and_short_tasks_are_excluded() {
        // T1: single agent pair "abcd"/"bcde" = 0.75; T2: "ab"/"xy" = 0, plus
        // an extra agent with no extra pair weight; T3 has one agent only.
        let runs = vec![
            run("a1", "T1", Cohort::Agent, "abcd"),
            run("a2", "T1", Cohort::Agent, "bcde"),
            run("a3", "T2", Cohort::Agent, "ab"),
            run("a4", "T2", Cohort::Agent, "xy"),
            run("a5", "T2", Cohort::Agent, "xy"),
            run("a6", "T3", Cohort::Agent, "solo"),
        ];
        let corpus = corpus_from_parts(runs, vec![task("T1"), task("T2"), task("T3")], StateMap::default()).unwrap();
        let sel = select_analysis_set(&corpus, AnalysisPolicy::All);
        let set = AnalysisSet::new(&corpus, &sel);
        let r = first_query_similarity(&set, &PairClass::AgentAgent.spec(), &config(), &RandomSource::new(1)).unwrap();
        assert_eq!(r.per_task[0].mean, 0.75);
        assert_eq!(r.per_task[1].pairs, 3);
        assert!((r.per_task[1].mean - 1.0 / 3.0).abs() < 1e-15);
        assert!((r.macro_mean.unwrap() - (0.75 + 1.0 / 3.0) / 2.0).abs() < 1e-15);
        assert!(r.excluded_tasks.contains_key("T3"));
        let pairs = FirstQueryConfig { bootstrap_unit: BootstrapUnit::Pairs, ..config() };
        let p = first_query_similarity(&set, &PairClass::AgentAgent.spec(), &pairs, &RandomSource::new(1)).unwrap();
        let ci = p.ci.unwrap();
        assert!(ci.lo <= ci.point && ci.point <= ci.hi);
    }
}
