//! `offload` — command-line front end for the offloading solvers.
//!
//! Subcommands: `prob` (single-pair success probability), `gen` (write a
//! random instance as JSON), `solve` (run one algorithm on an instance
//! file), `bench` (sweep experiments to CSV), `validate` (closed form vs
//! Monte Carlo gap report).
//!
//! Exit codes: 0 on success, 1 for configuration errors (bad flags or
//! parameter combinations), 2 for input-format errors (unreadable or
//! malformed instance files).

use std::fmt;
use std::fs;
use std::io::Write;
use std::process::ExitCode;

use clap::error::ErrorKind;
use clap::{Args, Parser, Subcommand, ValueEnum};

use offload_core::baselines::{ga, mcsa, BaselineConfig};
use offload_core::experiment::{run_experiment, write_csv, Algorithm, ExperimentConfig, SweepVar};
use offload_core::generator::{generate_instance, GammaConvention, GeneratorConfig, NTarget};
use offload_core::knapsack::{tsdp, upper_bound, UniformInstance};
use offload_core::model::{objective, validate as validate_assignment, Assignment, Instance};
use offload_core::rma::{rma_solve, RmaConfig};
use offload_core::success_prob::{
    analytic_success, build_prob_matrix, monte_carlo_success, sample_params, PairParams,
};

enum CliError {
    /// Inconsistent or unsupported parameters; exit code 1.
    Config(String),
    /// Unreadable or malformed input files; exit code 2.
    Input(String),
}

impl CliError {
    fn code(&self) -> u8 {
        match self {
            CliError::Config(_) => 1,
            CliError::Input(_) => 2,
        }
    }
}

impl fmt::Display for CliError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            CliError::Config(msg) | CliError::Input(msg) => f.write_str(msg),
        }
    }
}

#[derive(Parser)]
#[command(
    name = "offload",
    version,
    about = "Solvers and experiments for D2D task offloading"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Success probability of one task-helper pair, closed form and sampled
    Prob(ProbArgs),
    /// Generate a random instance and write it as JSON
    Gen(GenArgs),
    /// Run one algorithm on an instance file
    Solve(SolveArgs),
    /// Run a parameter sweep and write CSV records
    Bench(BenchArgs),
    /// Compare closed forms against Monte Carlo over random parameter tuples
    Validate(ValidateArgs),
}

#[derive(Args)]
struct ProbArgs {
    /// Contact period rate
    #[arg(long)]
    mu: f64,
    /// Inter-contact period rate
    #[arg(long)]
    gamma: f64,
    /// Per-stage processing rate
    #[arg(long)]
    xi: f64,
    /// Erlang stages
    #[arg(long, default_value_t = 1)]
    n_h: u32,
    /// Monte Carlo sample count
    #[arg(long, default_value_t = 50_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

/// Generator knobs shared by `gen` and `bench`.
#[derive(Args, Clone)]
struct GeneratorArgs {
    /// Number of tasks
    #[arg(long, default_value_t = 50)]
    r: usize,
    /// Number of helpers
    #[arg(long, default_value_t = 10)]
    h: usize,
    /// Task sizes are uniform on 1..=l_max
    #[arg(long, default_value_t = 5)]
    l_max: usize,
    /// Helper capacities are uniform on 1..=e_max
    #[arg(long, default_value_t = 10)]
    e_max: usize,
    /// Erlang stages per task
    #[arg(long, default_value_t = 1)]
    n_h: u32,
    /// Share one capacity and mobility pair across helpers
    #[arg(long)]
    uniform: bool,
    /// Divisor applied to the gamma shape of the targeted families
    #[arg(long, default_value_t = 1.0)]
    n_divisor: f64,
    #[arg(long, value_enum, default_value_t = NTargetArg::All)]
    n_target: NTargetArg,
    /// Whether 1/1088 is a scale or a rate
    #[arg(long, value_enum, default_value_t = ConventionArg::Scale)]
    gamma_convention: ConventionArg,
}

impl GeneratorArgs {
    fn to_config(&self, seed: u64) -> GeneratorConfig {
        GeneratorConfig {
            r: self.r,
            h: self.h,
            l_max: self.l_max,
            e_max: self.e_max,
            n_divisor: self.n_divisor,
            n_target: self.n_target.into(),
            n_h: self.n_h,
            uniform: self.uniform,
            seed,
            convention: self.gamma_convention.into(),
            ..GeneratorConfig::default()
        }
    }
}

#[derive(Args)]
struct GenArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct SolveArgs {
    /// Instance JSON file
    input: String,
    #[arg(long, value_enum)]
    algorithm: AlgorithmArg,
    /// Pool penalty for the matching solver
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    delta: f64,
    /// Improvement round cap for the matching solver
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Warm start for the matching solver
    #[arg(long, value_enum, default_value_t = InitArg::Empty)]
    init: InitArg,
    /// Iterations for the random search baseline
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Args)]
struct BenchArgs {
    #[command(flatten)]
    generator: GeneratorArgs,
    /// Variable the sweep changes
    #[arg(long, value_enum)]
    sweep: SweepArg,
    /// Sweep grid, comma separated
    #[arg(long, value_delimiter = ',', required = true)]
    values: Vec<f64>,
    /// Instances per grid point
    #[arg(long, default_value_t = 30)]
    reps: usize,
    /// Algorithms to run, comma separated
    #[arg(long, value_delimiter = ',', default_value = "rma,mcsa,ga")]
    algorithms: Vec<String>,
    #[arg(long, default_value_t = -0.1, allow_hyphen_values = true)]
    delta: f64,
    #[arg(long, default_value_t = 100)]
    max_iter: usize,
    /// Iterations for the random search baseline
    #[arg(long, default_value_t = 10_000)]
    trials: u64,
    /// Write wall_ms as 0 so identical runs emit identical bytes
    #[arg(long)]
    zero_timings: bool,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Output path; stdout when omitted
    #[arg(long)]
    out: Option<String>,
}

#[derive(Args)]
struct ValidateArgs {
    /// Number of random parameter tuples
    #[arg(long, default_value_t = 20)]
    tuples: usize,
    /// Monte Carlo sample count per tuple
    #[arg(long, default_value_t = 50_000)]
    trials: u64,
    #[arg(long, default_value_t = 0)]
    seed: u64,
}

#[derive(Clone, Copy, ValueEnum)]
enum NTargetArg {
    All,
    Mu,
    Gamma,
    Xi,
}

impl From<NTargetArg> for NTarget {
    fn from(v: NTargetArg) -> NTarget {
        match v {
            NTargetArg::All => NTarget::All,
            NTargetArg::Mu => NTarget::Mu,
            NTargetArg::Gamma => NTarget::Gamma,
            NTargetArg::Xi => NTarget::Xi,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum ConventionArg {
    Scale,
    Rate,
}

impl From<ConventionArg> for GammaConvention {
    fn from(v: ConventionArg) -> GammaConvention {
        match v {
            ConventionArg::Scale => GammaConvention::Scale,
            ConventionArg::Rate => GammaConvention::Rate,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum AlgorithmArg {
    Tsdp,
    UpperBound,
    Rma,
    RmaTsdp,
    Mcsa,
    Ga,
}

impl From<AlgorithmArg> for Algorithm {
    fn from(v: AlgorithmArg) -> Algorithm {
        match v {
            AlgorithmArg::Tsdp => Algorithm::Tsdp,
            AlgorithmArg::UpperBound => Algorithm::UpperBound,
            AlgorithmArg::Rma => Algorithm::Rma,
            AlgorithmArg::RmaTsdp => Algorithm::RmaTsdp,
            AlgorithmArg::Mcsa => Algorithm::Mcsa,
            AlgorithmArg::Ga => Algorithm::Ga,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum InitArg {
    Empty,
    Tsdp,
}

#[derive(Clone, Copy, ValueEnum)]
enum SweepArg {
    R,
    H,
    #[value(name = "n_mu")]
    NMu,
    #[value(name = "n_gamma")]
    NGamma,
    #[value(name = "n_xi")]
    NXi,
}

impl From<SweepArg> for SweepVar {
    fn from(v: SweepArg) -> SweepVar {
        match v {
            SweepArg::R => SweepVar::R,
            SweepArg::H => SweepVar::H,
            SweepArg::NMu => SweepVar::NMu,
            SweepArg::NGamma => SweepVar::NGamma,
            SweepArg::NXi => SweepVar::NXi,
        }
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(err) => {
            let code = match err.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => 0,
                _ => 1, // usage problems are configuration errors
            };
            let _ = err.print();
            return ExitCode::from(code);
        }
    };
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(err.code())
        }
    }
}

fn run(cli: Cli) -> Result<(), CliError> {
    match cli.command {
        Command::Prob(args) => prob(args),
        Command::Gen(args) => gen(args),
        Command::Solve(args) => solve(args),
        Command::Bench(args) => bench(args),
        Command::Validate(args) => validate(args),
    }
}

/// Print to stdout, treating a closed pipe (e.g. `| head`) as success.
fn emit(text: std::fmt::Arguments<'_>) -> Result<(), CliError> {
    let mut out = std::io::stdout().lock();
    match out.write_fmt(text).and_then(|_| out.write_all(b"\n")) {
        Ok(()) => Ok(()),
        Err(e) if e.kind() == std::io::ErrorKind::BrokenPipe => Ok(()),
        Err(e) => Err(CliError::Config(format!("cannot write to stdout: {e}"))),
    }
}

macro_rules! outln {
    ($($arg:tt)*) => { emit(format_args!($($arg)*))? };
}

fn prob(args: ProbArgs) -> Result<(), CliError> {
    let params = PairParams::new(args.mu, args.gamma, args.xi, args.n_h)
        .map_err(|e| CliError::Config(e.to_string()))?;
    let closed = analytic_success(&params);
    let mc = monte_carlo_success(&params, args.trials, args.seed);
    outln!("closed_form {closed}");
    outln!(
        "monte_carlo {} (trials={}, std_error={:.2e})",
        mc.estimate,
        mc.trials,
        mc.std_error
    );
    Ok(())
}

fn gen(args: GenArgs) -> Result<(), CliError> {
    let instance = generate_instance(&args.generator.to_config(args.seed))
        .map_err(|e| CliError::Config(e.to_string()))?;
    let json = instance.to_json();
    match args.out {
        Some(path) => fs::write(&path, format!("{json}\n").as_bytes())
            .map_err(|e| CliError::Config(format!("cannot write {path}: {e}")))?,
        None => outln!("{json}"),
    }
    Ok(())
}

fn load_instance(path: &str) -> Result<Instance, CliError> {
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::Input(format!("cannot read {path}: {e}")))?;
    Instance::from_json(&text).map_err(|e| CliError::Input(format!("{path}: {e}")))
}

fn solve(args: SolveArgs) -> Result<(), CliError> {
    let instance = load_instance(&args.input)?;
    let probs = build_prob_matrix(&instance);
    let algorithm: Algorithm = args.algorithm.into();

    let uniform_input = || {
        UniformInstance::from_instance(&instance, &probs)
            .map_err(|e| CliError::Config(e.to_string()))
    };
    let rma_config = RmaConfig {
        delta: args.delta,
        max_iterations: args.max_iter,
    };
    let initial = |init: InitArg| -> Result<Assignment, CliError> {
        match init {
            InitArg::Empty => Ok(Assignment::empty(instance.r())),
            InitArg::Tsdp => Ok(tsdp(&uniform_input()?)),
        }
    };

    let assignment = match algorithm {
        Algorithm::Tsdp => tsdp(&uniform_input()?),
        Algorithm::UpperBound => {
            // a relaxation, not an assignment: report the value and stop
            outln!("objective {}", upper_bound(&uniform_input()?));
            return Ok(());
        }
        Algorithm::Rma | Algorithm::RmaTsdp => {
            let start = match algorithm {
                Algorithm::RmaTsdp => initial(InitArg::Tsdp)?,
                _ => initial(args.init)?,
            };
            let result = rma_solve(&instance, &probs, &rma_config, &start)
                .map_err(|e| CliError::Config(e.to_string()))?;
            result.assignment
        }
        Algorithm::Mcsa => {
            let config = BaselineConfig {
                iterations: args.trials as usize,
                seed: args.seed,
            };
            mcsa(&instance, &probs, &config)
        }
        Algorithm::Ga => ga(&instance),
    };

    debug_assert!(validate_assignment(&instance, &assignment).unwrap_or(false));
    let value = objective(&assignment, &probs).map_err(|e| CliError::Config(e.to_string()))?;
    outln!("objective {value}");
    outln!("assigned {}/{}", assignment.assigned_count(), instance.r());
    outln!(
        "assignment {}",
        serde_json::to_string(&assignment.assigned).expect("assignment serializes")
    );
    Ok(())
}

fn bench(args: BenchArgs) -> Result<(), CliError> {
    let mut algorithms = Vec::new();
    for name in &args.algorithms {
        let algorithm = Algorithm::parse(name)
            .ok_or_else(|| CliError::Config(format!("unknown algorithm '{name}'")))?;
        algorithms.push(algorithm);
    }
    let mut config = ExperimentConfig::new(
        args.generator.to_config(0),
        args.sweep.into(),
        args.values.clone(),
    );
    config.repetitions = args.reps;
    config.algorithms = algorithms;
    config.delta = args.delta;
    config.max_iterations = args.max_iter;
    config.mcsa_iterations = args.trials as usize;
    config.zero_timings = args.zero_timings;
    config.seed = args.seed;

    let records = run_experiment(&config).map_err(|e| CliError::Config(e.to_string()))?;
    match args.out {
        Some(path) => {
            let mut file = fs::File::create(&path)
                .map_err(|e| CliError::Config(format!("cannot write {path}: {e}")))?;
            write_csv(&records, &mut file)
                .map_err(|e| CliError::Config(format!("cannot write {path}: {e}")))?;
            file.flush()
                .map_err(|e| CliError::Config(format!("cannot write {path}: {e}")))?;
        }
        None => {
            let stdout = std::io::stdout();
            write_csv(&records, &mut stdout.lock())
                .map_err(|e| CliError::Config(format!("cannot write csv: {e}")))?;
        }
    }
    Ok(())
}

fn validate(args: ValidateArgs) -> Result<(), CliError> {
    if args.tuples == 0 {
        return Err(CliError::Config("need at least one tuple".into()));
    }
    use rand_chacha::rand_core::SeedableRng;
    let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(args.seed);
    outln!("mu gamma xi n_h closed_form monte_carlo rel_gap");
    let mut gaps = Vec::new();
    for k in 0..args.tuples {
        let n_h = if k % 2 == 0 { 1 } else { 2 };
        let params = sample_params(&mut rng, n_h);
        let closed = analytic_success(&params);
        let mc = monte_carlo_success(&params, args.trials, args.seed.wrapping_add(k as u64));
        let gap = (closed - mc.estimate).abs() / closed;
        gaps.push(gap);
        outln!(
            "{:.4} {:.4} {:.4} {n_h} {closed:.6} {:.6} {:.4}%",
            params.mu,
            params.gamma,
            params.xi,
            mc.estimate,
            gap * 100.0
        );
    }
    gaps.sort_by(|a, b| a.partial_cmp(b).unwrap());
    let median = gaps[gaps.len() / 2];
    outln!(
        "median_gap {:.4}% max_gap {:.4}%",
        median * 100.0,
        gaps.last().unwrap() * 100.0
    );
    Ok(())
}
