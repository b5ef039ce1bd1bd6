use std::collections::BTreeSet;
use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use tracealign::nav::{export_dot, NavOptions, OtherActionPolicy, TopKMode};
use tracealign::query::{curves_csv, BootstrapUnit, CurveMethod, CurveRow, OrderPolicy};
use tracealign::report::{self, ReportConfig, Selections, SetPairing};
use tracealign::stats::RandomSource;
use tracealign::synth::{self, BehaviorProfile};
use tracealign::trace::{parse_corpus_diagnostics, write_runs, write_tasks, AnalysisPolicy, Cohort, Corpus, WhitespaceMode};
use tracealign::{Error, Result};

#[derive(Parser)]
#[command(name = "tracealign", version, about = "Compare agent and participant interaction traces")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Check a corpus against the trace schema
    Validate(Inputs),
    /// Run every analysis and write report.json, curves.csv and DOT graphs
    Report(ReportArgs),
    /// Query formulation analyses only
    Queries(QueriesArgs),
    /// Navigation analyses only
    Nav(NavArgs),
    /// Generate a synthetic corpus from a behavior profile
    Synth(SynthArgs),
}

#[derive(Args)]
struct Inputs {
    /// JSON Lines trace file, one run per line
    #[arg(long)]
    traces: PathBuf,
    /// JSON array of task definitions
    #[arg(long)]
    tasks: PathBuf,
    /// Optional destination-to-state map
    #[arg(long)]
    states: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum SetArg {
    All,
    Cs,
    Te,
}

impl From<SetArg> for AnalysisPolicy {
    fn from(s: SetArg) -> Self {
        match s {
            SetArg::All => AnalysisPolicy::All,
            SetArg::Cs => AnalysisPolicy::Cs,
            SetArg::Te => AnalysisPolicy::Te,
        }
    }
}

#[derive(Args)]
struct Analysis {
    #[command(flatten)]
    inputs: Inputs,
    /// Analysis set for every block (default pairs outcome/micro with CS, queries/macro with TE)
    #[arg(long, value_enum)]
    set: Option<SetArg>,
    /// Seed for bootstrap and baseline resampling
    #[arg(long, env = "TRACEALIGN_SEED", default_value_t = 0)]
    seed: u64,
    /// Headline coverage threshold
    #[arg(long, default_value_t = 0.6)]
    tau: f64,
    /// Comma-separated τ grid (default 0, 0.05, ..., 1)
    #[arg(long, value_delimiter = ',')]
    tau_grid: Option<Vec<f64>>,
    /// Comma-separated top-k values; 10 and 20 are always included
    #[arg(long, value_delimiter = ',')]
    k: Option<Vec<usize>>,
    #[arg(long, default_value_t = 10_000)]
    resamples: usize,
    /// Random-baseline subset repeats
    #[arg(long, default_value_t = 1_000)]
    repeats: usize,
    /// Longest efficiency curve
    #[arg(long, default_value_t = 40)]
    n_max: usize,
    #[arg(long, value_enum, default_value = "frequency-desc")]
    order: OrderArg,
    #[arg(long, value_enum, default_value = "tasks")]
    bootstrap_unit: UnitArg,
    /// Trim instead of removing all whitespace before character matching
    #[arg(long)]
    trim_only: bool,
    /// Treat other-action events as self-loops on the current state
    #[arg(long)]
    other_action_self_loop: bool,
    /// Keep every edge tied with the k-th one
    #[arg(long)]
    include_ties: bool,
    /// Minimum compliant agent runs a task needs to stay in TE
    #[arg(long, default_value_t = 2)]
    min_agent_runs: usize,
    #[arg(long, default_value_t = 0.95)]
    confidence: f64,
    #[arg(long, default_value_t = 0.05)]
    alpha: f64,
    /// DOT: hide edges below this probability
    #[arg(long, default_value_t = 0.05)]
    show_threshold: f64,
    /// DOT: draw edges below this probability in gray
    #[arg(long, default_value_t = 0.10)]
    gray_threshold: f64,
    /// DOT: omit a state from rendering (repeatable); metrics are unaffected
    #[arg(long = "hide-state")]
    hide_states: Vec<String>,
}

#[derive(Clone, Copy, ValueEnum)]
enum OrderArg {
    FrequencyDesc,
    FirstAppearance,
}

#[derive(Clone, Copy, ValueEnum)]
enum UnitArg {
    Tasks,
    Pairs,
}

impl Analysis {
    fn config(&self) -> ReportConfig {
        let mut c = ReportConfig {
            sets: self.set.map(|s| SetPairing::uniform(s.into())).unwrap_or_default(),
            min_compliant_agent_runs: self.min_agent_runs,
            seed: self.seed,
            confidence: self.confidence,
            alpha: self.alpha,
            bootstrap_resamples: self.resamples,
            bootstrap_unit: match self.bootstrap_unit {
                UnitArg::Tasks => BootstrapUnit::Tasks,
                UnitArg::Pairs => BootstrapUnit::Pairs,
            },
            whitespace: if self.trim_only { WhitespaceMode::Trim } else { WhitespaceMode::RemoveAll },
            nav: NavOptions {
                other_action: if self.other_action_self_loop {
                    OtherActionPolicy::StatePreserving
                } else {
                    OtherActionPolicy::Skip
                },
                top_k: if self.include_ties { TopKMode::IncludeTies } else { TopKMode::Exact },
            },
            dot_show_threshold: self.show_threshold,
            dot_gray_threshold: self.gray_threshold,
            dot_hide_states: self.hide_states.iter().cloned().collect::<BTreeSet<_>>(),
            ..Default::default()
        };
        if let Some(ks) = &self.k {
            c.ks = ks.clone();
        }
        let d = &mut c.distribution;
        d.headline_tau = self.tau;
        if let Some(grid) = &self.tau_grid {
            d.thresholds = grid.clone();
        }
        d.n_max = self.n_max;
        d.repeats = self.repeats;
        d.confidence = self.confidence;
        d.order = match self.order {
            OrderArg::FrequencyDesc => OrderPolicy::FrequencyDesc,
            OrderArg::FirstAppearance => OrderPolicy::FirstAppearance,
        };
        c
    }
}

#[derive(Args)]
struct ReportArgs {
    #[command(flatten)]
    analysis: Analysis,
    /// Output directory
    #[arg(long)]
    out: PathBuf,
}

#[derive(Clone, Copy, ValueEnum)]
enum CurveArg {
    Coverage,
    Efficiency,
    All,
}

#[derive(Clone, Copy, ValueEnum, PartialEq)]
enum MethodArg {
    Agent,
    RandomBaseline,
    TopNOracle,
    All,
}

#[derive(Args)]
struct QueriesArgs {
    #[command(flatten)]
    analysis: Analysis,
    /// Emit curve rows as CSV instead of the JSON query block
    #[arg(long, value_enum)]
    curve: Option<CurveArg>,
    /// Which curve family to emit with --curve
    #[arg(long, value_enum, default_value = "agent")]
    method: MethodArg,
    /// Write to a file instead of stdout
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Json,
    Dot,
}

#[derive(Args)]
struct NavArgs {
    #[command(flatten)]
    analysis: Analysis,
    #[arg(long, value_enum, default_value = "json")]
    format: FormatArg,
    /// Output file (json) or directory (dot); stdout when absent
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct SynthArgs {
    /// Preset name (agentlike, humanlike) or path to a profile JSON file
    #[arg(long, default_value = "agentlike")]
    profile: String,
    #[arg(long, default_value_t = 50)]
    runs: usize,
    #[arg(long, value_enum, default_value = "agent")]
    cohort: CohortArg,
    /// Also generate a participant cohort from this profile
    #[arg(long)]
    participant_profile: Option<String>,
    #[arg(long)]
    participant_runs: Option<usize>,
    /// Number of tasks (T1..Tn), assigned round-robin
    #[arg(long, default_value_t = 10)]
    num_tasks: usize,
    #[arg(long, env = "TRACEALIGN_SEED", default_value_t = 0)]
    seed: u64,
    /// Output directory for traces.jsonl, tasks.json and states.json
    #[arg(long)]
    out: Option<PathBuf>,
    /// Print the resolved profile as JSON and exit
    #[arg(long)]
    print_profile: bool,
}

#[derive(Clone, Copy, ValueEnum)]
enum CohortArg {
    Agent,
    Participant,
}

fn read(path: &Path) -> Result<Vec<u8>> {
    fs::read(path).map_err(|e| Error::io(path.display().to_string(), e))
}

fn write(path: &Path, contents: &str) -> Result<()> {
    fs::write(path, contents).map_err(|e| Error::io(path.display().to_string(), e))
}

fn load(inputs: &Inputs) -> std::result::Result<Corpus, Vec<Error>> {
    let traces = read(&inputs.traces).map_err(|e| vec![e])?;
    let tasks = read(&inputs.tasks).map_err(|e| vec![e])?;
    let states = match &inputs.states {
        Some(p) => Some(read(p).map_err(|e| vec![e])?),
        None => None,
    };
    parse_corpus_diagnostics(&traces, &tasks, states.as_deref())
}

fn load_one(inputs: &Inputs) -> Result<Corpus> {
    load(inputs).map_err(|mut errs| {
        for e in errs.iter().skip(1) {
            eprintln!("error[{}]: {e}", e.code().as_str());
        }
        errs.swap_remove(0)
    })
}

fn emit(out: Option<&Path>, text: &str) -> Result<()> {
    match out {
        Some(p) => write(p, text),
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn ensure_dir(dir: &Path) -> Result<()> {
    fs::create_dir_all(dir).map_err(|e| Error::io(dir.display().to_string(), e))
}

fn validate(inputs: &Inputs) -> ExitCode {
    match load(inputs) {
        Ok(corpus) => {
            let agents = corpus.runs_of(Cohort::Agent).count();
            println!(
                "ok: {} runs ({agents} agent, {} participant), {} tasks",
                corpus.runs().len(),
                corpus.runs().len() - agents,
                corpus.tasks().len()
            );
            ExitCode::SUCCESS
        }
        Err(errors) => {
            for e in &errors {
                eprintln!("error[{}]: {e}", e.code().as_str());
            }
            let code = errors.iter().map(|e| e.code().exit_code()).max().unwrap_or(2);
            ExitCode::from(code)
        }
    }
}

fn run_report(args: &ReportArgs) -> Result<()> {
    let corpus = load_one(&args.analysis.inputs)?;
    let report = report::build_report(&corpus, &args.analysis.config())?;
    ensure_dir(&args.out)?;
    write(&args.out.join("report.json"), &report.to_json())?;
    write(&args.out.join("curves.csv"), &report.curves_csv())?;
    for (cohort, dot) in report.dot_graphs() {
        write(&args.out.join(format!("graph_{cohort}.dot")), &dot)?;
    }
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    Ok(())
}

fn run_queries(args: &QueriesArgs) -> Result<()> {
    let corpus = load_one(&args.analysis.inputs)?;
    let config = args.analysis.config();
    let selections = Selections::new(&corpus, config.min_compliant_agent_runs);
    let set = selections.set(&corpus, config.sets.queries);
    let rng = RandomSource::new(config.seed).derive("queries");
    let mut warnings = Vec::new();
    let text = match args.curve {
        None => {
            let block = report::query_block(&set, &config, &rng, &mut warnings)?;
            serde_json::to_string_pretty(&block).expect("query block serializes") + "\n"
        }
        Some(curve) => {
            let dist = tracealign::query::distributional_analysis(&set, &config.distribution, &rng.derive("distribution"))?;
            warnings.extend(dist.notes.iter().cloned());
            let keep_method = |m: CurveMethod| match args.method {
                MethodArg::All => true,
                MethodArg::Agent => m == CurveMethod::Agent,
                MethodArg::RandomBaseline => m == CurveMethod::RandomBaseline,
                MethodArg::TopNOracle => m == CurveMethod::TopNOracle,
            };
            let mut rows: Vec<CurveRow> = Vec::new();
            if matches!(curve, CurveArg::Coverage | CurveArg::All) {
                rows.extend(dist.coverage.iter().filter(|c| keep_method(c.method)).flat_map(|c| c.rows()));
            }
            if matches!(curve, CurveArg::Efficiency | CurveArg::All) {
                rows.extend(dist.efficiency.iter().filter(|c| keep_method(c.method)).flat_map(|c| c.rows()));
            }
            curves_csv(&rows)
        }
    };
    for w in &warnings {
        eprintln!("warning: {w}");
    }
    emit(args.out.as_deref(), &text)
}

fn run_nav(args: &NavArgs) -> Result<()> {
    let corpus = load_one(&args.analysis.inputs)?;
    let config = args.analysis.config();
    let selections = Selections::new(&corpus, config.min_compliant_agent_runs);
    match args.format {
        FormatArg::Json => {
            let mut warnings = Vec::new();
            let block = report::nav_block(
                &selections.set(&corpus, config.sets.micro),
                &selections.set(&corpus, config.sets.macro_),
                &config,
                &mut warnings,
            )?;
            for w in &warnings {
                eprintln!("warning: {w}");
            }
            let text = serde_json::to_string_pretty(&block).expect("nav block serializes") + "\n";
            emit(args.out.as_deref(), &text)
        }
        FormatArg::Dot => {
            let graphs = report::cohort_graphs(&selections.set(&corpus, config.sets.macro_), config.nav)?;
            let style = config.dot_style();
            match &args.out {
                Some(dir) => {
                    ensure_dir(dir)?;
                    for (cohort, g) in &graphs {
                        write(&dir.join(format!("graph_{cohort}.dot")), &export_dot(&g.graph, cohort.as_str(), &style))?;
                    }
                }
                None => {
                    for (cohort, g) in &graphs {
                        print!("{}", export_dot(&g.graph, cohort.as_str(), &style));
                    }
                }
            }
            Ok(())
        }
    }
}

fn resolve_profile(name: &str) -> Result<BehaviorProfile> {
    match BehaviorProfile::preset(name) {
        Ok(p) => Ok(p),
        Err(_) if Path::new(name).exists() => BehaviorProfile::from_json(&read(Path::new(name))?),
        Err(e) => Err(e),
    }
}

fn run_synth(args: &SynthArgs) -> Result<()> {
    let profile = resolve_profile(&args.profile)?;
    if args.print_profile {
        println!("{}", profile.to_json());
        return Ok(());
    }
    let tasks = synth::task_ids(args.num_tasks);
    let rng = RandomSource::new(args.seed);
    let cohort = match args.cohort {
        CohortArg::Agent => Cohort::Agent,
        CohortArg::Participant => Cohort::Participant,
    };
    let mut runs = synth::generate_cohort(&profile, args.runs, &tasks, cohort, &rng.derive(cohort.as_str()))?;
    let mut state_map = profile.state_map();
    if let Some(name) = &args.participant_profile {
        if cohort == Cohort::Participant {
            return Err(Error::InvalidArgument("--participant-profile needs --cohort agent".into()));
        }
        let other = resolve_profile(name)?;
        let n = args.participant_runs.unwrap_or(args.runs);
        runs.extend(synth::generate_cohort(&other, n, &tasks, Cohort::Participant, &rng.derive("participant"))?);
        for rule in other.state_map().rules {
            if !state_map.rules.contains(&rule) {
                state_map.rules.push(rule);
            }
        }
    }
    let traces = write_runs(&runs);
    match &args.out {
        Some(dir) => {
            ensure_dir(dir)?;
            write(&dir.join("traces.jsonl"), &traces)?;
            write(&dir.join("tasks.json"), &write_tasks(&synth::synthetic_tasks(&tasks)))?;
            let states = serde_json::to_string_pretty(&state_map).expect("state map serializes") + "\n";
            write(&dir.join("states.json"), &states)?;
        }
        None => print!("{traces}"),
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match &cli.command {
        Command::Validate(inputs) => return validate(inputs),
        Command::Report(a) => run_report(a),
        Command::Queries(a) => run_queries(a),
        Command::Nav(a) => run_nav(a),
        Command::Synth(a) => run_synth(a),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error[{}]: {e}", e.code().as_str());
            ExitCode::from(e.code().exit_code())
        }
    }
}
