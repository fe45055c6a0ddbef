use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};

use sice::bench::{run_bench, write_bench_csv, BenchSpec, Method};
use sice::datagen::{read_matrix, write_matrix, write_matrix_to, SynthConfig};
use sice::{solve, solve_pg, Error, PgConfig, ProblemInstance, SolverConfig};

const EXIT_IO: u8 = 1;
const EXIT_USAGE: u8 = 2;
const EXIT_INSTANCE: u8 = 3;
const EXIT_SOLVER: u8 = 4;

#[derive(Parser)]
#[command(name = "sice", version, about = "Sparse inverse covariance estimation")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic sample covariance.
    Gen(GenArgs),
    /// Solve one instance and write X* plus a convergence trace.
    Solve(SolveArgs),
    /// Time-to-gap table over synthetic instances.
    Bench(BenchArgs),
}

#[derive(Args)]
struct GenArgs {
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0.01)]
    density: f64,
    #[arg(long, default_value_t = 0.15)]
    tau: f64,
    #[arg(long, default_value_t = 1e-4)]
    shift: f64,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long)]
    out: PathBuf,
}

#[derive(Args)]
#[command(group(clap::ArgGroup::new("penalty_source").required(true).args(["rho", "penalty"])))]
struct SolveArgs {
    #[arg(long)]
    input: PathBuf,
    /// Uniform penalty, R = rho * ones.
    #[arg(long)]
    rho: Option<f64>,
    /// Penalty matrix file, same format as the input.
    #[arg(long)]
    penalty: Option<PathBuf>,
    #[arg(long, default_value_t = 1e-5)]
    eps: f64,
    #[arg(long, default_value = "sice", value_parser = parse_method)]
    method: Method,
    /// Checkpoint budget (iteration budget for pg).
    #[arg(long)]
    max_checkpoints: Option<usize>,
    #[arg(long = "M", default_value_t = 10)]
    m: usize,
    #[arg(long, default_value_t = 1e-4)]
    kappa: f64,
    #[arg(long, default_value_t = 0.8)]
    eta: f64,
    #[arg(long, default_value_t = 1.0)]
    delta0: f64,
    #[arg(long, default_value_t = 1e-8)]
    sigma_min: f64,
    #[arg(long, default_value_t = 1e8)]
    sigma_max: f64,
    /// Trace CSV path.
    #[arg(long)]
    trace: Option<PathBuf>,
    /// Where to write X*; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct BenchArgs {
    #[arg(long, value_delimiter = ',', default_value = "100")]
    sizes: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1e-1,1e-2,1e-3,1e-4,2e-5,1e-5")]
    eps_levels: Vec<f64>,
    #[arg(long, value_delimiter = ',', default_value = "sice,pg", value_parser = parse_method)]
    methods: Vec<Method>,
    #[arg(long, default_value_t = 1)]
    reps: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 0.1)]
    rho: f64,
    /// Gradient-evaluation budget per run, shared by all methods.
    #[arg(long, default_value_t = 20_000)]
    max_evals: usize,
    /// Table CSV path; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

fn parse_method(s: &str) -> Result<Method, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

fn exit_code(err: &Error) -> u8 {
    match err {
        Error::Io(_) | Error::MalformedMatrix(_) => EXIT_IO,
        Error::InvalidConfig(_) => EXIT_USAGE,
        Error::InvalidInstance(_)
        | Error::DimensionMismatch { .. }
        | Error::Asymmetric { .. }
        | Error::EmptyMatrix => EXIT_INSTANCE,
        Error::NotPositiveDefinite { .. }
        | Error::Infeasible { .. }
        | Error::FallbackExhausted { .. }
        | Error::LineSearchStalled { .. }
        | Error::GenerationFailed { .. } => EXIT_SOLVER,
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Gen(args) => cmd_gen(args),
        Command::Solve(args) => cmd_solve(args),
        Command::Bench(args) => cmd_bench(args),
    };
    match outcome {
        Ok(()) => ExitCode::SUCCESS,
        Err(err) => {
            eprintln!("error: {err}");
            ExitCode::from(exit_code(&err))
        }
    }
}

fn sidecar_path(out: &Path) -> PathBuf {
    let mut name = out.as_os_str().to_owned();
    name.push(".meta");
    PathBuf::from(name)
}

fn cmd_gen(args: GenArgs) -> Result<(), Error> {
    let cfg = SynthConfig {
        n: args.n,
        density: args.density,
        tau: args.tau,
        sigma_shift: args.shift,
        seed: args.seed,
    };
    cfg.validate()?;
    let s = sice::datagen::gen_synthetic(&cfg)?;
    write_matrix(&s, &args.out)?;
    let meta = format!(
        "# sice gen n={} density={} tau={} shift={} seed={} rng=splitmix64 noise=uniform[0,1)\n",
        cfg.n, cfg.density, cfg.tau, cfg.sigma_shift, cfg.seed
    );
    fs::write(sidecar_path(&args.out), meta)?;
    Ok(())
}

fn cmd_solve(args: SolveArgs) -> Result<(), Error> {
    let s = read_matrix(&args.input)?;
    let problem = match (&args.rho, &args.penalty) {
        (Some(rho), _) => ProblemInstance::with_uniform_penalty(s, *rho)?,
        (None, Some(path)) => ProblemInstance::new(s, read_matrix(path)?)?,
        (None, None) => unreachable!("clap enforces one penalty source"),
    };
    let result = match args.method {
        Method::Sice => {
            let defaults = SolverConfig::default();
            let cfg = SolverConfig {
                m: args.m,
                kappa: args.kappa,
                eta: args.eta,
                delta0: args.delta0,
                sigma_min: args.sigma_min,
                sigma_max: args.sigma_max,
                eps: args.eps,
                max_checkpoints: args.max_checkpoints.unwrap_or(defaults.max_checkpoints),
                ..defaults
            };
            solve(&problem, &cfg)?
        }
        Method::Pg => {
            let defaults = PgConfig::default();
            let cfg = PgConfig {
                eps: args.eps,
                max_iters: args.max_checkpoints.unwrap_or(defaults.max_iters),
                ..defaults
            };
            solve_pg(&problem, &cfg)?
        }
    };

    match &args.out {
        Some(path) => write_matrix(&result.x_star, path)?,
        None => write_matrix_to(&result.x_star, io::stdout().lock())?,
    }
    if let Some(path) = &args.trace {
        result.trace.write_csv(io::BufWriter::new(fs::File::create(path)?))?;
    }
    let summary = format!(
        "{}, {:e}, {}, {:.6}",
        result.status,
        result.final_gap,
        result.checkpoints(),
        result.seconds()
    );
    if args.out.is_some() {
        println!("{summary}");
    } else {
        eprintln!("{summary}");
    }
    Ok(())
}

fn cmd_bench(args: BenchArgs) -> Result<(), Error> {
    let spec = BenchSpec {
        sizes: args.sizes,
        eps_levels: args.eps_levels,
        methods: args.methods,
        repetitions: args.reps,
        seed: args.seed,
        rho: args.rho,
        max_grad_evals: args.max_evals,
        ..BenchSpec::default()
    };
    let rows = run_bench(&spec)?;
    match &args.out {
        Some(path) => write_bench_csv(&rows, fs::File::create(path)?)?,
        None => {
            let mut out = io::stdout().lock();
            write_bench_csv(&rows, &mut out)?;
            out.flush()?;
        }
    }
    Ok(())
}
