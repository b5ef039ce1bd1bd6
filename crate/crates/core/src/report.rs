//! Full three-dimension report with its configuration echo.

use std::collections::{BTreeMap, BTreeSet};

use serde::{Deserialize, Serialize};

use crate::error::Result;
use crate::nav::{
    jaccard_report, macro_average_graph, self_loop_prob, task_graphs, DotStyle, JaccardMode, JaccardReport,
    NavOptions, ProbabilityGraph,
};
use crate::outcome::{
    compare_effort_family, compare_success, group_summary, shortcut_contrast, EffortComparison, EffortMetric,
    GroupFilter, GroupSummaries, Grouping, ShortcutContrast,
};
use crate::query::{
    compare_task_means, distributional_analysis, first_query_similarity, BootstrapUnit, DistributionConfig,
    DistributionReport, FirstQueryConfig, FirstQuerySimilarity, PairClass, PairSpec, Party, SimilarityMetric,
};
use crate::stats::{RandomSource, TestResult};
use crate::trace::{
    select_analysis_set_with, AnalysisPolicy, AnalysisSelection, AnalysisSet, Cohort, Corpus, Subgroup,
    WhitespaceMode, DEFAULT_MIN_COMPLIANT_AGENT_RUNS,
};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");
pub const REPORT_VERSION: u32 = 1;
pub const HEADLINE_KS: [usize; 2] = [10, 20];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SetPairing {
    pub outcome: AnalysisPolicy,
    pub queries: AnalysisPolicy,
    pub micro: AnalysisPolicy,
    #[serde(rename = "macro")]
    pub macro_: AnalysisPolicy,
}

impl Default for SetPairing {
    fn default() -> Self {
        SetPairing {
            outcome: AnalysisPolicy::Cs,
            queries: AnalysisPolicy::Te,
            micro: AnalysisPolicy::Cs,
            macro_: AnalysisPolicy::Te,
        }
    }
}

impl SetPairing {
    pub fn uniform(policy: AnalysisPolicy) -> Self {
        SetPairing { outcome: policy, queries: policy, micro: policy, macro_: policy }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ReportConfig {
    pub sets: SetPairing,
    pub min_compliant_agent_runs: usize,
    pub seed: u64,
    pub confidence: f64,
    pub alpha: f64,
    pub bootstrap_resamples: usize,
    pub bootstrap_unit: BootstrapUnit,
    pub whitespace: WhitespaceMode,
    pub distribution: DistributionConfig,
    pub ks: Vec<usize>,
    pub nav: NavOptions,
    pub dot_show_threshold: f64,
    pub dot_gray_threshold: f64,
    pub dot_hide_states: BTreeSet<String>,
}

impl Default for ReportConfig {
    fn default() -> Self {
        ReportConfig {
            sets: SetPairing::default(),
            min_compliant_agent_runs: DEFAULT_MIN_COMPLIANT_AGENT_RUNS,
            seed: 0,
            confidence: 0.95,
            alpha: 0.05,
            bootstrap_resamples: crate::stats::DEFAULT_BOOTSTRAP_RESAMPLES,
            bootstrap_unit: BootstrapUnit::Tasks,
            whitespace: WhitespaceMode::RemoveAll,
            distribution: DistributionConfig::default(),
            ks: (1..=30).collect(),
            nav: NavOptions::default(),
            dot_show_threshold: 0.05,
            dot_gray_threshold: 0.10,
            dot_hide_states: BTreeSet::new(),
        }
    }
}

impl ReportConfig {
    pub fn dot_style(&self) -> DotStyle {
        DotStyle {
            show_threshold: self.dot_show_threshold,
            gray_threshold: self.dot_gray_threshold,
            hide_states: self.dot_hide_states.clone(),
        }
    }

    fn first_query(&self, metric: SimilarityMetric) -> FirstQueryConfig {
        FirstQueryConfig {
            metric,
            whitespace: self.whitespace,
            bootstrap_unit: self.bootstrap_unit,
            resamples: self.bootstrap_resamples,
            confidence: self.confidence,
        }
    }

    /// `ks` plus the headline values, sorted and deduplicated.
    pub fn all_ks(&self) -> Vec<usize> {
        let mut ks: BTreeSet<usize> = self.ks.iter().copied().filter(|&k| k > 0).collect();
        ks.extend(HEADLINE_KS);
        ks.into_iter().collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SetSummary {
    pub policy: AnalysisPolicy,
    pub runs: usize,
    pub agent_runs: usize,
    pub participant_runs: usize,
    pub tasks: usize,
    pub excluded_tasks: BTreeMap<String, String>,
}

/// The three resolved analysis sets.
pub struct Selections {
    pub all: AnalysisSelection,
    pub cs: AnalysisSelection,
    pub te: AnalysisSelection,
}

impl Selections {
    pub fn new(corpus: &Corpus, min_compliant_agent_runs: usize) -> Self {
        let sel = |p| select_analysis_set_with(corpus, p, min_compliant_agent_runs);
        Selections {
            all: sel(AnalysisPolicy::All),
            cs: sel(AnalysisPolicy::Cs),
            te: sel(AnalysisPolicy::Te),
        }
    }

    pub fn get(&self, policy: AnalysisPolicy) -> &AnalysisSelection {
        match policy {
            AnalysisPolicy::All => &self.all,
            AnalysisPolicy::Cs => &self.cs,
            AnalysisPolicy::Te => &self.te,
        }
    }

    pub fn set<'a>(&'a self, corpus: &'a Corpus, policy: AnalysisPolicy) -> AnalysisSet<'a> {
        AnalysisSet::new(corpus, self.get(policy))
    }
}

fn summarize_set(set: &AnalysisSet<'_>) -> SetSummary {
    SetSummary {
        policy: set.selection.policy,
        runs: set.len(),
        agent_runs: set.runs_of(Cohort::Agent).count(),
        participant_runs: set.runs_of(Cohort::Participant).count(),
        tasks: set.task_ids().len(),
        excluded_tasks: set.selection.excluded_tasks.clone(),
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SuccessTest {
    pub groups: (String, String),
    pub test: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct OutcomeBlock {
    pub set: AnalysisPolicy,
    pub cohorts: GroupSummaries,
    pub expertise: GroupSummaries,
    pub familiarity: GroupSummaries,
    pub per_task: GroupSummaries,
    pub success_tests: Vec<SuccessTest>,
    pub effort_tests: Vec<EffortComparison>,
    pub shortcut_contrast: ShortcutContrast,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SubgroupComparison {
    pub a: String,
    pub b: String,
    pub test: TestResult,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct QueryBlock {
    pub set: AnalysisPolicy,
    pub first_query: Vec<FirstQuerySimilarity>,
    pub first_query_tfidf: Vec<FirstQuerySimilarity>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub first_query_subgroups: Vec<FirstQuerySimilarity>,
    #[serde(skip_serializing_if = "Vec::is_empty")]
    pub subgroup_tests: Vec<SubgroupComparison>,
    pub distribution: DistributionReport,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StateStats {
    pub self_loop: Option<f64>,
    pub successors: Vec<(String, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CohortGraph {
    pub graph: ProbabilityGraph,
    pub states: BTreeMap<String, StateStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct NavBlock {
    pub micro_set: AnalysisPolicy,
    pub macro_set: AnalysisPolicy,
    pub micro: JaccardReport,
    #[serde(rename = "macro")]
    pub macro_: JaccardReport,
    /// Macro-averaged graphs over the macro set.
    pub graphs: BTreeMap<Cohort, CohortGraph>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct AlignmentReport {
    pub tool: &'static str,
    pub tool_version: &'static str,
    pub report_version: u32,
    pub config: ReportConfig,
    pub analysis_sets: BTreeMap<String, SetSummary>,
    pub outcome: OutcomeBlock,
    pub queries: QueryBlock,
    pub navigation: NavBlock,
    pub warnings: Vec<String>,
}

pub fn outcome_block(corpus: &Corpus, set: &AnalysisSet<'_>, config: &ReportConfig, warnings: &mut Vec<String>) -> Result<OutcomeBlock> {
    let c = config.confidence;
    let groups = |g| -> Result<GroupSummaries> {
        let s = group_summary(set, g, c)?;
        Ok(s)
    };
    let cohorts = groups(Grouping::Cohort)?;
    let expertise = groups(Grouping::Expertise)?;
    let familiarity = groups(Grouping::Familiarity)?;
    let per_task = groups(Grouping::TaskCohort)?;
    for s in [&cohorts, &expertise, &familiarity, &per_task] {
        for label in &s.absent {
            warnings.push(format!("outcome: group `{label}` has no runs and is omitted"));
        }
    }

    let participant = |g| GroupFilter::subgroup(g).with_cohort(Cohort::Participant);
    let pairs = [
        (GroupFilter::cohort(Cohort::Agent), GroupFilter::cohort(Cohort::Participant)),
        (participant(Subgroup::Expert), participant(Subgroup::Regular)),
        (participant(Subgroup::Familiar), participant(Subgroup::Unfamiliar)),
    ];
    let present = |f: &GroupFilter| set.runs().any(|r| f.admits(r));
    let mut success_tests = Vec::new();
    let mut family = Vec::new();
    for (a, b) in pairs {
        if !present(&a) || !present(&b) {
            continue;
        }
        match compare_success(set, &a, &b) {
            Ok(test) => success_tests.push(SuccessTest { groups: (a.label(), b.label()), test }),
            Err(e) => warnings.push(format!("outcome: success test {} vs {} skipped: {e}", a.label(), b.label())),
        }
        family.push((a, b));
    }
    let effort_tests = if family.is_empty() {
        Vec::new()
    } else {
        compare_effort_family(set, &family, &EffortMetric::ALL, config.alpha)?
    };
    let shortcut = shortcut_contrast(corpus, set);
    Ok(OutcomeBlock {
        set: set.selection.policy,
        cohorts,
        expertise,
        familiarity,
        per_task,
        success_tests,
        effort_tests,
        shortcut_contrast: shortcut,
    })
}

pub fn query_block(set: &AnalysisSet<'_>, config: &ReportConfig, rng: &RandomSource, warnings: &mut Vec<String>) -> Result<QueryBlock> {
    let mut run = |spec: &PairSpec, metric: SimilarityMetric| -> Result<FirstQuerySimilarity> {
        let r = first_query_similarity(
            set,
            spec,
            &config.first_query(metric),
            &rng.derive(&format!("first-query/{metric:?}/{}", spec.label())),
        )?;
        for (task, reason) in &r.excluded_tasks {
            warnings.push(format!("queries: {} excludes {task}: {reason}", r.pairs));
        }
        Ok(r)
    };
    let first_query = PairClass::ALL
        .iter()
        .map(|c| run(&c.spec(), SimilarityMetric::Gestalt))
        .collect::<Result<Vec<_>>>()?;
    let first_query_tfidf = PairClass::ALL
        .iter()
        .map(|c| run(&c.spec(), SimilarityMetric::TfidfCosine))
        .collect::<Result<Vec<_>>>()?;

    let mut first_query_subgroups = Vec::new();
    let mut subgroup_tests = Vec::new();
    for (x, y) in [(Subgroup::Expert, Subgroup::Regular), (Subgroup::Familiar, Subgroup::Unfamiliar)] {
        let has = |g| set.runs_of(Cohort::Participant).any(|r| r.has_subgroup(g));
        if !has(x) || !has(y) {
            continue;
        }
        let spec = |g| PairSpec { left: Party::cohort(Cohort::Agent), right: Party::subgroup(Cohort::Participant, g) };
        let a = run(&spec(x), SimilarityMetric::Gestalt)?;
        let b = run(&spec(y), SimilarityMetric::Gestalt)?;
        if !a.per_task.is_empty() && !b.per_task.is_empty() {
            subgroup_tests.push(SubgroupComparison { a: a.pairs.clone(), b: b.pairs.clone(), test: compare_task_means(&a, &b)? });
        }
        first_query_subgroups.push(a);
        first_query_subgroups.push(b);
    }

    let distribution = distributional_analysis(set, &config.distribution, &rng.derive("distribution"))?;
    for note in &distribution.notes {
        warnings.push(format!("queries: {note}"));
    }
    Ok(QueryBlock {
        set: set.selection.policy,
        first_query,
        first_query_tfidf,
        first_query_subgroups,
        subgroup_tests,
        distribution,
    })
}

pub fn cohort_graphs(set: &AnalysisSet<'_>, options: NavOptions) -> Result<BTreeMap<Cohort, CohortGraph>> {
    let mut out = BTreeMap::new();
    for cohort in Cohort::BOTH {
        let tasks = task_graphs(set, cohort, options);
        if tasks.is_empty() {
            continue;
        }
        let graph = macro_average_graph(&tasks)?;
        let states = graph
            .states
            .iter()
            .map(|s| {
                let stats = StateStats {
                    self_loop: self_loop_prob(&graph, s),
                    successors: graph.successors(s).into_iter().map(|(t, p)| (t.to_owned(), p)).collect(),
                };
                (s.clone(), stats)
            })
            .collect();
        out.insert(cohort, CohortGraph { graph, states });
    }
    Ok(out)
}

pub fn nav_block(micro: &AnalysisSet<'_>, macro_set: &AnalysisSet<'_>, config: &ReportConfig, warnings: &mut Vec<String>) -> Result<NavBlock> {
    let ks = config.all_ks();
    let micro_r = jaccard_report(micro, &ks, JaccardMode::Micro, config.nav)?;
    let macro_r = jaccard_report(macro_set, &ks, JaccardMode::Macro, config.nav)?;
    for t in &macro_r.skipped_tasks {
        warnings.push(format!("navigation: macro Jaccard skips {t}: a cohort has no runs there"));
    }
    Ok(NavBlock {
        micro_set: micro.selection.policy,
        macro_set: macro_set.selection.policy,
        micro: micro_r,
        macro_: macro_r,
        graphs: cohort_graphs(macro_set, config.nav)?,
    })
}

pub fn set_summaries(corpus: &Corpus, selections: &Selections) -> BTreeMap<String, SetSummary> {
    [AnalysisPolicy::All, AnalysisPolicy::Cs, AnalysisPolicy::Te]
        .into_iter()
        .map(|p| (p.to_string(), summarize_set(&selections.set(corpus, p))))
        .collect()
}

pub fn build_report(corpus: &Corpus, config: &ReportConfig) -> Result<AlignmentReport> {
    let selections = Selections::new(corpus, config.min_compliant_agent_runs);
    let set = |p| selections.set(corpus, p);
    let rng = RandomSource::new(config.seed);
    let mut warnings = Vec::new();
    for (task, reason) in &selections.te.excluded_tasks {
        warnings.push(format!("TE set excludes {task}: {reason}"));
    }
    let outcome = outcome_block(corpus, &set(config.sets.outcome), config, &mut warnings)?;
    let queries = query_block(&set(config.sets.queries), config, &rng.derive("queries"), &mut warnings)?;
    let navigation = nav_block(&set(config.sets.micro), &set(config.sets.macro_), config, &mut warnings)?;
    Ok(AlignmentReport {
        tool: "tracealign",
        tool_version: TOOL_VERSION,
        report_version: REPORT_VERSION,
        config: config.clone(),
        analysis_sets: set_summaries(corpus, &selections),
        outcome,
        queries,
        navigation,
        warnings,
    })
}

impl AlignmentReport {
    pub fn to_json(&self) -> String {
        let mut s = serde_json::to_string_pretty(self).expect("report serializes");
        s.push('\n');
        s
    }

    pub fn curves_csv(&self) -> String {
        crate::query::curves_csv(&self.queries.distribution.rows())
    }

    /// DOT text per cohort for the macro-averaged graphs.
    pub fn dot_graphs(&self) -> Vec<(Cohort, String)> {
        let style = self.config.dot_style();
        self.navigation
            .graphs
            .iter()
            .map(|(c, g)| (*c, crate::nav::export_dot(&g.graph, c.as_str(), &style)))
            .collect()
    }
}
