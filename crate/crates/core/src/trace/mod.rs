//! Trace data model, parsing, normalization, state mapping and analysis-set
//! construction.

mod model;
mod normalize;
mod outcome;
mod parse;
mod selection;
mod state_map;

pub use model::{Cohort, Corpus, EventKind, ReasoningPattern, Run, Subgroup, TaskSpec, TraceEvent};
pub use normalize::{char_normalize, char_normalize_with, token_normalize, WhitespaceMode};
pub use outcome::{derive_outcome, determine_outcome, Outcome};
pub use parse::{
    corpus_from_parts, parse_corpus, parse_corpus_diagnostics, parse_runs_collect, parse_tasks,
    validate_run, write_runs, write_tasks,
};
pub use selection::{
    select_analysis_set, select_analysis_set_with, AnalysisPolicy, AnalysisSelection, AnalysisSet,
    DEFAULT_MIN_COMPLIANT_AGENT_RUNS,
};
pub use state_map::{map_state, StateMap, StateRule, DEFAULT_STATES, SEARCH_STATE};
