//! Task success and effort by cohort, subgroup and task.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::{
    holm_bonferroni, mann_whitney_u, mean, median_quartiles, pearson_chi2, sample_sd, wilson_ci, IntervalEstimate,
    Quartiles, TestResult,
};
use crate::trace::{determine_outcome, AnalysisSet, Cohort, Corpus, Run, Subgroup};

pub fn action_count(run: &Run) -> usize {
    run.action_count()
}

pub fn run_success(corpus: &Corpus, run: &Run) -> bool {
    corpus
        .task(&run.task_id)
        .is_some_and(|task| determine_outcome(run, task).success)
}

/// A subset of runs: any combination of cohort, subgroup and task.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct GroupFilter {
    pub cohort: Option<Cohort>,
    pub subgroup: Option<Subgroup>,
    pub task_id: Option<String>,
}

impl GroupFilter {
    pub fn cohort(cohort: Cohort) -> Self {
        GroupFilter { cohort: Some(cohort), ..Default::default() }
    }

    pub fn subgroup(subgroup: Subgroup) -> Self {
        GroupFilter { subgroup: Some(subgroup), ..Default::default() }
    }

    pub fn admits(&self, run: &Run) -> bool {
        self.cohort.is_none_or(|c| run.cohort == c)
            && self.subgroup.is_none_or(|g| run.has_subgroup(g))
            && self.task_id.as_ref().is_none_or(|t| &run.task_id == t)
    }

    pub fn label(&self) -> String {
        let mut parts: Vec<String> = Vec::new();
        if let Some(t) = &self.task_id {
            parts.push(t.clone());
        }
        if let Some(c) = self.cohort {
            parts.push(c.to_string());
        }
        if let Some(g) = self.subgroup {
            parts.push(g.to_string());
        }
        if parts.is_empty() {
            "all".into()
        } else {
            parts.join(":")
        }
    }

    fn runs<'a>(&'a self, set: &'a AnalysisSet<'a>) -> impl Iterator<Item = &'a Run> + 'a {
        set.runs().filter(move |r| self.admits(r))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Grouping {
    Cohort,
    Expertise,
    Familiarity,
    TaskCohort,
}

impl std::str::FromStr for Grouping {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "cohort" => Ok(Grouping::Cohort),
            "expertise" => Ok(Grouping::Expertise),
            "familiarity" => Ok(Grouping::Familiarity),
            "task" | "task-cohort" => Ok(Grouping::TaskCohort),
            _ => Err(Error::InvalidArgument(format!("unknown grouping `{s}`"))),
        }
    }
}

impl Grouping {
    pub fn groups(self, set: &AnalysisSet<'_>) -> Vec<GroupFilter> {
        match self {
            Grouping::Cohort => Cohort::BOTH.into_iter().map(GroupFilter::cohort).collect(),
            Grouping::Expertise => [Subgroup::Expert, Subgroup::Regular]
                .into_iter()
                .map(|g| GroupFilter::subgroup(g).with_cohort(Cohort::Participant))
                .collect(),
            Grouping::Familiarity => [Subgroup::Familiar, Subgroup::Unfamiliar]
                .into_iter()
                .map(|g| GroupFilter::subgroup(g).with_cohort(Cohort::Participant))
                .collect(),
            Grouping::TaskCohort => set
                .task_ids()
                .into_iter()
                .flat_map(|t| {
                    Cohort::BOTH.into_iter().map(move |c| GroupFilter {
                        cohort: Some(c),
                        subgroup: None,
                        task_id: Some(t.to_owned()),
                    })
                })
                .collect(),
        }
    }
}

impl GroupFilter {
    pub fn with_cohort(mut self, cohort: Cohort) -> Self {
        self.cohort = Some(cohort);
        self
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummary {
    pub group: String,
    pub filter: GroupFilter,
    pub successes: u64,
    pub n: u64,
    pub success_ci: IntervalEstimate,
    pub time_mean: f64,
    /// `None` for a single run.
    pub time_sd: Option<f64>,
    pub actions: Quartiles,
    /// Mean of the optional per-run difficulty ratings; display only.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub difficulty_mean: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GroupSummaries {
    pub grouping: Grouping,
    pub groups: Vec<GroupSummary>,
    /// Labels of requested groups that matched no run.
    pub absent: Vec<String>,
}

/// Summary of one group; `None` when no run matches.
pub fn summarize_group(set: &AnalysisSet<'_>, filter: &GroupFilter, confidence: f64) -> Result<Option<GroupSummary>> {
    let runs: Vec<&Run> = filter.runs(set).collect();
    if runs.is_empty() {
        return Ok(None);
    }
    let n = runs.len() as u64;
    let successes = runs.iter().filter(|r| run_success(set.corpus, r)).count() as u64;
    let times: Vec<f64> = runs.iter().map(|r| r.duration_seconds()).collect();
    let actions: Vec<f64> = runs.iter().map(|r| r.action_count() as f64).collect();
    let ratings: Vec<f64> = runs.iter().filter_map(|r| r.difficulty).collect();
    Ok(Some(GroupSummary {
        group: filter.label(),
        filter: filter.clone(),
        successes,
        n,
        success_ci: wilson_ci(successes, n, confidence)?,
        time_mean: mean(&times).unwrap_or(0.0),
        time_sd: sample_sd(&times),
        actions: median_quartiles(&actions)?,
        difficulty_mean: mean(&ratings),
    }))
}

pub fn group_summary(set: &AnalysisSet<'_>, grouping: Grouping, confidence: f64) -> Result<GroupSummaries> {
    let mut groups = Vec::new();
    let mut absent = Vec::new();
    for filter in grouping.groups(set) {
        match summarize_group(set, &filter, confidence)? {
            Some(s) => groups.push(s),
            None => absent.push(filter.label()),
        }
    }
    Ok(GroupSummaries { grouping, groups, absent })
}

fn success_counts(set: &AnalysisSet<'_>, filter: &GroupFilter) -> Result<(u64, u64)> {
    let runs: Vec<&Run> = filter.runs(set).collect();
    if runs.is_empty() {
        return Err(Error::EmptySample(format!("group `{}` has no runs", filter.label())));
    }
    let s = runs.iter().filter(|r| run_success(set.corpus, r)).count() as u64;
    Ok((s, runs.len() as u64 - s))
}

/// 2×2 Pearson χ² on (success, failure) counts.
pub fn compare_success(set: &AnalysisSet<'_>, a: &GroupFilter, b: &GroupFilter) -> Result<TestResult> {
    let (sa, fa) = success_counts(set, a)?;
    let (sb, fb) = success_counts(set, b)?;
    pearson_chi2(&[vec![sa, fa], vec![sb, fb]])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EffortMetric {
    TimeSeconds,
    ActionCount,
}

impl EffortMetric {
    pub const ALL: [EffortMetric; 2] = [EffortMetric::TimeSeconds, EffortMetric::ActionCount];

    fn value(self, run: &Run) -> f64 {
        match self {
            EffortMetric::TimeSeconds => run.duration_seconds(),
            EffortMetric::ActionCount => run.action_count() as f64,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffortComparison {
    pub metric: EffortMetric,
    pub groups: (String, String),
    pub test: TestResult,
    pub raw_rejected: bool,
    pub holm_adjusted_p: f64,
    pub holm_rejected: bool,
}

/// One MWU per (pair, metric); Holm–Bonferroni over exactly this family.
pub fn compare_effort_family(
    set: &AnalysisSet<'_>,
    pairs: &[(GroupFilter, GroupFilter)],
    metrics: &[EffortMetric],
    alpha: f64,
) -> Result<Vec<EffortComparison>> {
    let mut out = Vec::new();
    for (a, b) in pairs {
        for &metric in metrics {
            let xs: Vec<f64> = a.runs(set).map(|r| metric.value(r)).collect();
            let ys: Vec<f64> = b.runs(set).map(|r| metric.value(r)).collect();
            let test = mann_whitney_u(&xs, &ys)?;
            out.push(EffortComparison {
                metric,
                groups: (a.label(), b.label()),
                raw_rejected: test.p_value < alpha,
                test,
                holm_adjusted_p: 0.0,
                holm_rejected: false,
            });
        }
    }
    let p: Vec<f64> = out.iter().map(|c| c.test.p_value).collect();
    let holm = holm_bonferroni(&p, alpha)?;
    for (c, (adj, rej)) in out.iter_mut().zip(holm.adjusted.into_iter().zip(holm.rejected)) {
        c.holm_adjusted_p = adj;
        c.holm_rejected = rej;
    }
    Ok(out)
}

pub fn compare_effort(
    set: &AnalysisSet<'_>,
    a: &GroupFilter,
    b: &GroupFilter,
    metrics: &[EffortMetric],
    alpha: f64,
) -> Result<Vec<EffortComparison>> {
    compare_effort_family(set, &[(a.clone(), b.clone())], metrics, alpha)
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct EffortProfile {
    pub n: usize,
    pub actions: Quartiles,
    pub time_mean: f64,
}

impl EffortProfile {
    fn of(runs: &[&Run]) -> Option<Self> {
        if runs.is_empty() {
            return None;
        }
        let actions: Vec<f64> = runs.iter().map(|r| r.action_count() as f64).collect();
        let times: Vec<f64> = runs.iter().map(|r| r.duration_seconds()).collect();
        Some(EffortProfile {
            n: runs.len(),
            actions: median_quartiles(&actions).ok()?,
            time_mean: mean(&times)?,
        })
    }
}

/// Flagged (non-compliant) agent runs against the retained ones.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ShortcutContrast {
    pub flagged: Option<EffortProfile>,
    pub retained: Option<EffortProfile>,
}

impl ShortcutContrast {
    pub fn is_empty(&self) -> bool {
        self.flagged.is_none()
    }
}

/// `retained` covers the agent runs of `set`; flagged runs come from the
/// full corpus.
pub fn shortcut_contrast(corpus: &Corpus, set: &AnalysisSet<'_>) -> ShortcutContrast {
    let flagged: Vec<&Run> = corpus.runs_of(Cohort::Agent).filter(|r| !r.compliant).collect();
    if flagged.is_empty() {
        return ShortcutContrast { flagged: None, retained: None };
    }
    let retained: Vec<&Run> = set.runs_of(Cohort::Agent).collect();
    ShortcutContrast {
        flagged: EffortProfile::of(&flagged),
        retained: EffortProfile::of(&retained),
    }
}
