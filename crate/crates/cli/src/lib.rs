//! Command-line front end: parse a run configuration, dispatch the
//! computation, and emit plot-ready CSV or JSON.
//!
//! Exit codes: 0 success, 1 configuration error, 2 model error (fitness
//! positivity violated for the requested population), 3 accuracy error
//! (quadrature tolerance or step cap exhausted).

pub mod output;

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};

use output::{csv_document, emit, json_line, CsvValue, Format};
use star_moran::analysis::{
    self, AnalysisError, AsymptoticRegime, AsymptoticSettings, GameClass,
};
use star_moran::fitness::{FitnessDescriptor, FitnessError, FitnessProfile};
use star_moran::simulate::{self, ChainTopology, SimConfig, SimError};
use star_moran::star_approx::{self, ApproxError};
use star_moran::star_exact::{self, ModelError, Process, SolveError, StarChainSpec};

#[derive(Debug)]
pub enum CliError {
    Config(String),
    Model(String),
    Accuracy(String),
}

impl CliError {
    pub fn exit_code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Model(_) => 2,
            CliError::Accuracy(_) => 3,
        }
    }

    pub fn message(&self) -> &str {
        match self {
            CliError::Config(m) | CliError::Model(m) | CliError::Accuracy(m) => m,
        }
    }
}

impl From<ModelError> for CliError {
    fn from(e: ModelError) -> Self {
        match &e {
            ModelError::PopulationTooSmall { .. } => CliError::Config(e.to_string()),
            ModelError::Fitness(FitnessError::Positivity { .. }) => CliError::Model(e.to_string()),
            ModelError::Fitness(_) => CliError::Config(e.to_string()),
            ModelError::NonpositiveWeight { .. } => CliError::Model(e.to_string()),
        }
    }
}

impl From<SolveError> for CliError {
    fn from(e: SolveError) -> Self {
        match e {
            SolveError::Model(m) => m.into(),
            other => CliError::Accuracy(other.to_string()),
        }
    }
}

impl From<ApproxError> for CliError {
    fn from(e: ApproxError) -> Self {
        match &e {
            ApproxError::Quadrature(_) => CliError::Accuracy(e.to_string()),
            _ => CliError::Config(e.to_string()),
        }
    }
}

impl From<SimError> for CliError {
    fn from(e: SimError) -> Self {
        match e {
            SimError::Model(m) => m.into(),
            SimError::InvalidInitialState { .. } => CliError::Config(e_to_string(&e)),
            other => CliError::Accuracy(other.to_string()),
        }
    }
}

fn e_to_string(e: &SimError) -> String {
    e.to_string()
}

impl From<AnalysisError> for CliError {
    fn from(e: AnalysisError) -> Self {
        match e {
            AnalysisError::Model(m) => m.into(),
            AnalysisError::Solve(s) => s.into(),
            AnalysisError::Approx(a) => a.into(),
            AnalysisError::DimensionMismatch { .. } => CliError::Accuracy(e_str(&e)),
            other => CliError::Config(other.to_string()),
        }
    }
}

fn e_str(e: &AnalysisError) -> String {
    e.to_string()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ProcessArg {
    Bd,
    Db,
}

impl From<ProcessArg> for Process {
    fn from(p: ProcessArg) -> Self {
        match p {
            ProcessArg::Bd => Process::Bd,
            ProcessArg::Db => Process::Db,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum RegimeArg {
    Auto,
    DominanceB,
    DominanceA,
    Coexistence,
    Coordination,
}

impl From<RegimeArg> for AsymptoticRegime {
    fn from(r: RegimeArg) -> Self {
        match r {
            RegimeArg::Auto => AsymptoticRegime::Auto,
            RegimeArg::DominanceB => AsymptoticRegime::DominanceMutant,
            RegimeArg::DominanceA => AsymptoticRegime::DominanceResident,
            RegimeArg::Coexistence => AsymptoticRegime::Coexistence,
            RegimeArg::Coordination => AsymptoticRegime::Coordination,
        }
    }
}

#[derive(Args, Debug, Clone)]
pub struct FitnessArgs {
    /// Fitness descriptor: a JSON file path, or the literal `neutral`.
    #[arg(long)]
    fitness: String,
    /// Override the selection intensity carried by the descriptor.
    #[arg(long)]
    kappa: Option<f64>,
}

#[derive(Args, Debug, Clone)]
pub struct ChainArgs {
    /// Update rule.
    #[arg(long, value_enum)]
    process: ProcessArg,
    /// Population size (one center plus N-1 leaves).
    #[arg(long = "N", value_name = "N")]
    n: usize,
    #[command(flatten)]
    fitness: FitnessArgs,
}

#[derive(Args, Debug, Clone)]
pub struct OutputArgs {
    /// Output file; stdout when omitted. Relative paths are placed under
    /// $STAR_MORAN_OUTPUT_DIR when that variable is set.
    #[arg(long)]
    output: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    format: Format,
}

#[derive(Parser, Debug)]
#[command(
    name = "star-moran",
    version,
    about = "Fixation probabilities for Moran processes on star graphs"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Exact fixation probabilities of the star jump chain.
    Exact {
        #[command(flatten)]
        chain: ChainArgs,
        /// Solve in exact rational arithmetic (N <= 8, polynomial fitness).
        #[arg(long)]
        rational_oracle: bool,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Continuous approximation: leading term and first-order correction.
    Approx {
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Exact and approximate values side by side, one row per state.
    Compare {
        #[command(flatten)]
        chain: ChainArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Seeded Monte Carlo estimate for one initial state.
    Simulate {
        #[command(flatten)]
        chain: ChainArgs,
        /// Initial state index (resident-center block 0..N-1 by leaf count,
        /// then mutant-center block N..2N-1).
        #[arg(long)]
        initial: usize,
        #[arg(long, default_value_t = 100_000)]
        replicates: u64,
        #[arg(long, default_value_t = 0)]
        seed: u64,
        /// Output file; stdout when omitted.
        #[arg(long)]
        output: Option<PathBuf>,
        #[arg(long, value_enum, default_value = "json")]
        format: Format,
    },
    /// Approximation error against the exact solve over a size sweep.
    Convergence {
        #[arg(long, value_enum)]
        process: ProcessArg,
        /// Comma-separated population sizes, increasing, each at least 4.
        #[arg(long = "N-list", value_name = "N1,N2,...", value_delimiter = ',')]
        n_list: Vec<usize>,
        #[command(flatten)]
        fitness: FitnessArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Invasion probability of a single mutant.
    Invasion {
        #[command(flatten)]
        chain: ChainArgs,
        /// Probability that the invader lands on the center.
        #[arg(long)]
        rho: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Game regime of the relative birth fitness.
    Classify {
        #[command(flatten)]
        fitness: FitnessArgs,
        #[command(flatten)]
        out: OutputArgs,
    },
    /// Strong-selection fixation curve (complete graph s=1, star s=2).
    Asymptotic {
        #[arg(long, value_parser = clap::value_parser!(u8).range(1..=2))]
        s: u8,
        #[command(flatten)]
        fitness: FitnessArgs,
        /// Grid resolution on [0, 1].
        #[arg(long, default_value_t = 101)]
        points: usize,
        #[arg(long, value_enum, default_value = "auto")]
        regime: RegimeArg,
        /// Coexistence dispatch factor: |kappa * integral(theta)| beyond
        /// this sends the curve to a pure dominance form.
        #[arg(long, default_value_t = 10.0)]
        dispatch_factor: f64,
        #[command(flatten)]
        out: OutputArgs,
    },
}

fn load_profile(args: &FitnessArgs) -> Result<FitnessProfile, CliError> {
    let profile = if args.fitness == "neutral" {
        FitnessProfile::neutral()
    } else {
        let text = std::fs::read_to_string(&args.fitness).map_err(|e| {
            CliError::Config(format!("cannot read fitness descriptor '{}': {e}", args.fitness))
        })?;
        let descriptor = FitnessDescriptor::from_json(&text).map_err(|e| {
            CliError::Config(format!("malformed fitness descriptor '{}': {e}", args.fitness))
        })?;
        descriptor
            .into_profile()
            .map_err(|e| CliError::Config(format!("invalid fitness descriptor: {e}")))?
    };
    match args.kappa {
        Some(k) => profile
            .with_kappa(k)
            .map_err(|e| CliError::Config(format!("invalid --kappa: {e}"))),
        None => Ok(profile),
    }
}

fn chain_spec(args: &ChainArgs) -> Result<StarChainSpec, CliError> {
    let profile = load_profile(&args.fitness)?;
    Ok(StarChainSpec::new(args.process.into(), args.n, profile)?)
}

fn center_label(state: usize, n: usize) -> (&'static str, usize) {
    if state < n {
        ("resident", state)
    } else {
        ("mutant", state - n)
    }
}

fn run_exact(chain: &ChainArgs, rational: bool, out: &OutputArgs) -> Result<(), CliError> {
    let spec = chain_spec(chain)?;
    let fixation = if rational {
        if spec.n > 8 {
            return Err(CliError::Config(format!(
                "--rational-oracle supports N <= 8, got N = {}",
                spec.n
            )));
        }
        star_exact::solve_fixation_rational(&spec).ok_or_else(|| {
            CliError::Config(
                "--rational-oracle needs a polynomial-representable fitness".to_string(),
            )
        })?
    } else {
        star_exact::solve_fixation(&spec)?
    };

    let n = spec.n;
    match out.format {
        Format::Csv => {
            let rows: Vec<Vec<CsvValue>> = (0..2 * n)
                .map(|state| {
                    let (label, k) = center_label(state, n);
                    vec![
                        CsvValue::Int(k as i64),
                        CsvValue::Text(label.to_string()),
                        CsvValue::Float(fixation.values()[state]),
                    ]
                })
                .collect();
            emit(
                out.output.as_deref(),
                &csv_document(&["x_index", "center_type", "fixation"], &rows),
            )
        }
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Row<'a> {
                x_index: usize,
                center_type: &'a str,
                fixation: f64,
            }
            let rows: Vec<Row> = (0..2 * n)
                .map(|state| {
                    let (label, k) = center_label(state, n);
                    Row { x_index: k, center_type: label, fixation: fixation.values()[state] }
                })
                .collect();
            emit(out.output.as_deref(), &json_line(&rows))
        }
    }
}

/// Prints the source-term discrepancy note once per birth-death run.
fn bd_source_note(profile: &FitnessProfile, n: usize) {
    if let Ok(diag) = star_approx::bd_rhs_diagnostic(profile, n, 64) {
        if !diag.displayed_matches {
            eprintln!(
                "note: printed closed-form correction source disagrees with the ODE \
                 right-hand side (max |diff| = {:.3e}); using the ODE form",
                diag.max_abs_difference
            );
        }
    }
}

fn run_approx(chain: &ChainArgs, out: &OutputArgs) -> Result<(), CliError> {
    let spec = chain_spec(chain)?;
    let process: Process = chain.process.into();
    if process == Process::Bd {
        bd_source_note(&spec.profile, spec.n);
    }
    let approx = star_approx::approx_vector(process, &spec.profile, spec.n)?;
    let clamped = approx.combined_clamped();
    let n = spec.n;
    match out.format {
        Format::Csv => {
            let rows: Vec<Vec<CsvValue>> = (0..2 * n)
                .map(|state| {
                    let (label, k) = center_label(state, n);
                    vec![
                        CsvValue::Int(k as i64),
                        CsvValue::Text(label.to_string()),
                        CsvValue::Float(approx.leading()[state]),
                        CsvValue::Float(approx.correction()[state]),
                        CsvValue::Float(approx.combined()[state]),
                        CsvValue::Float(clamped[state]),
                    ]
                })
                .collect();
            emit(
                out.output.as_deref(),
                &csv_document(
                    &["x_index", "center_type", "leading", "correction", "combined", "combined_clamped"],
                    &rows,
                ),
            )
        }
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Row<'a> {
                x_index: usize,
                center_type: &'a str,
                leading: f64,
                correction: f64,
                combined: f64,
                combined_clamped: f64,
            }
            let rows: Vec<Row> = (0..2 * n)
                .map(|state| {
                    let (label, k) = center_label(state, n);
                    Row {
                        x_index: k,
                        center_type: label,
                        leading: approx.leading()[state],
                        correction: approx.correction()[state],
                        combined: approx.combined()[state],
                        combined_clamped: clamped[state],
                    }
                })
                .collect();
            emit(out.output.as_deref(), &json_line(&rows))
        }
    }
}

fn run_compare(chain: &ChainArgs, out: &OutputArgs) -> Result<(), CliError> {
    let spec = chain_spec(chain)?;
    let process: Process = chain.process.into();
    if process == Process::Bd {
        bd_source_note(&spec.profile, spec.n);
    }
    let exact = star_exact::solve_fixation(&spec)?;
    let approx = star_approx::approx_vector(process, &spec.profile, spec.n)?;
    let n = spec.n;
    match out.format {
        Format::Csv => {
            let rows: Vec<Vec<CsvValue>> = (0..2 * n)
                .map(|state| {
                    let (label, k) = center_label(state, n);
                    let e = exact.values()[state];
                    let c = approx.combined()[state];
                    vec![
                        CsvValue::Int(k as i64),
                        CsvValue::Text(label.to_string()),
                        CsvValue::Float(e),
                        CsvValue::Float(approx.leading()[state]),
                        CsvValue::Float(c),
                        CsvValue::Float((e - c).abs()),
                    ]
                })
                .collect();
            emit(
                out.output.as_deref(),
                &csv_document(
                    &["x_index", "center_type", "exact", "approx_leading", "approx_combined", "abs_error"],
                    &rows,
                ),
            )
        }
        Format::Json => {
            #[derive(serde::Serialize)]
            struct Row<'a> {
                x_index: usize,
                center_type: &'a str,
                exact: f64,
                approx_leading: f64,
                approx_combined: f64,
                abs_error: f64,
            }
            let rows: Vec<Row> = (0..2 * n)
                .map(|state| {
                    let (label, k) = center_label(state, n);
                    let e = exact.values()[state];
                    let c = approx.combined()[state];
                    Row {
                        x_index: k,
                        center_type: label,
                        exact: e,
                        approx_leading: approx.leading()[state],
                        approx_combined: c,
                        abs_error: (e - c).abs(),
                    }
                })
                .collect();
            emit(out.output.as_deref(), &json_line(&rows))
        }
    }
}

fn run_simulate(
    chain: &ChainArgs,
    initial: usize,
    replicates: u64,
    seed: u64,
    output: Option<&std::path::Path>,
    format: Format,
) -> Result<(), CliError> {
    if replicates == 0 {
        return Err(CliError::Config("--replicates must be at least 1".to_string()));
    }
    let spec = chain_spec(chain)?;
    let config = SimConfig {
        chain: ChainTopology::Star(spec),
        initial_state: initial,
        replicates,
        seed,
    };
    let result = simulate::estimate_fixation(&config)?;
    match format {
        Format::Json => emit(output, &json_line(&result)),
        Format::Csv => {
            let rows = vec![vec![
                CsvValue::Float(result.estimate),
                CsvValue::Float(result.standard_error),
                CsvValue::Int(result.replicates as i64),
                CsvValue::Int(result.seed as i64),
            ]];
            emit(output, &csv_document(&["estimate", "se", "replicates", "seed"], &rows))
        }
    }
}

fn run_convergence(
    process: ProcessArg,
    n_list: &[usize],
    fitness: &FitnessArgs,
    out: &OutputArgs,
) -> Result<(), CliError> {
    if n_list.is_empty() {
        return Err(CliError::Config("--N-list needs at least one size".to_string()));
    }
    let profile = load_profile(fitness)?;
    let report = analysis::convergence_study(process.into(), &profile, n_list)?;
    match out.format {
        Format::Csv => {
            let rows: Vec<Vec<CsvValue>> = report
                .rows
                .iter()
                .map(|r| {
                    vec![
                        CsvValue::Int(r.n as i64),
                        CsvValue::Float(r.sup_error),
                        CsvValue::Float(r.n_sup_error),
                        r.ratio_to_previous.map(CsvValue::Float).unwrap_or(CsvValue::Empty),
                    ]
                })
                .collect();
            emit(
                out.output.as_deref(),
                &csv_document(&["N", "sup_error", "n_sup_error", "ratio_to_previous"], &rows),
            )
        }
        Format::Json => emit(out.output.as_deref(), &json_line(&report)),
    }
}

fn run_invasion(chain: &ChainArgs, rho: f64, out: &OutputArgs) -> Result<(), CliError> {
    // Build the chain spec for validation (positivity for this N), then
    // evaluate the approximation-based formula.
    let spec = chain_spec(chain)?;
    let report =
        analysis::invasion_probability(chain.process.into(), &spec.profile, spec.n, rho)?;
    match out.format {
        Format::Csv => {
            let rows = vec![vec![
                CsvValue::Text(report.process.as_str().to_string()),
                CsvValue::Int(report.n as i64),
                CsvValue::Float(report.rho),
                CsvValue::Float(report.invasion_probability),
                report.star_complete_ratio.map(CsvValue::Float).unwrap_or(CsvValue::Empty),
            ]];
            emit(
                out.output.as_deref(),
                &csv_document(
                    &["process", "N", "rho", "invasion_probability", "star_complete_ratio"],
                    &rows,
                ),
            )
        }
        Format::Json => emit(out.output.as_deref(), &json_line(&report)),
    }
}

fn run_classify(fitness: &FitnessArgs, out: &OutputArgs) -> Result<(), CliError> {
    let profile = load_profile(fitness)?;
    let class: GameClass = analysis::classify_profile(&profile)?;
    match out.format {
        Format::Csv => {
            let rows = vec![vec![
                CsvValue::Float(class.gamma),
                class.x_star.map(CsvValue::Float).unwrap_or(CsvValue::Empty),
                CsvValue::Text(class.regime.as_str().to_string()),
            ]];
            emit(out.output.as_deref(), &csv_document(&["gamma", "x_star", "regime"], &rows))
        }
        Format::Json => emit(out.output.as_deref(), &json_line(&class)),
    }
}

fn run_asymptotic(
    s: u8,
    fitness: &FitnessArgs,
    points: usize,
    regime: RegimeArg,
    dispatch_factor: f64,
    out: &OutputArgs,
) -> Result<(), CliError> {
    if points < 2 {
        return Err(CliError::Config("--points must be at least 2".to_string()));
    }
    let profile = load_profile(fitness)?;
    let kappa = profile.kappa();
    // The asymptotic formulas take the intensity explicitly; hand them the
    // profile at unit intensity to avoid double scaling.
    let base = profile
        .with_kappa(1.0)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let settings = AsymptoticSettings { dispatch_factor };
    let mut rows_csv: Vec<Vec<CsvValue>> = Vec::with_capacity(points);
    let mut rows_json = Vec::with_capacity(points);
    for j in 0..points {
        let x = j as f64 / (points - 1) as f64;
        let phi = analysis::asymptotic_phi(s, kappa, &base, x, regime.into(), &settings)?;
        rows_csv.push(vec![CsvValue::Float(x), CsvValue::Float(phi)]);
        rows_json.push(serde_json::json!({ "x": x, "phi": phi }));
    }
    match out.format {
        Format::Csv => emit(out.output.as_deref(), &csv_document(&["x", "phi"], &rows_csv)),
        Format::Json => emit(out.output.as_deref(), &json_line(&rows_json)),
    }
}

pub fn run(cli: Cli) -> Result<(), CliError> {
    match &cli.command {
        Command::Exact { chain, rational_oracle, out } => run_exact(chain, *rational_oracle, out),
        Command::Approx { chain, out } => run_approx(chain, out),
        Command::Compare { chain, out } => run_compare(chain, out),
        Command::Simulate { chain, initial, replicates, seed, output, format } => {
            run_simulate(chain, *initial, *replicates, *seed, output.as_deref(), *format)
        }
        Command::Convergence { process, n_list, fitness, out } => {
            run_convergence(*process, n_list, fitness, out)
        }
        Command::Invasion { chain, rho, out } => run_invasion(chain, *rho, out),
        Command::Classify { fitness, out } => run_classify(fitness, out),
        Command::Asymptotic { s, fitness, points, regime, dispatch_factor, out } => {
            run_asymptotic(*s, fitness, *points, *regime, *dispatch_factor, out)
        }
    }
}
