use std::fs;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::ThreadPoolBuilder;
use rotinv::cli::{
    capacity_table, parse_manakov_params, parse_snr_range, plot_script, render_invariance_report,
    run_crossover_check, run_manakov_check, run_oracle_point, run_sweep, InputShape, ManakovConfig,
    SweepSpec,
};
use rotinv::{Error, QuadratureConfig, SphereSet};

const EXIT_USAGE: u8 = 1;
const EXIT_NONCONVERGED: u8 = 2;
const EXIT_INVARIANCE: u8 = 3;

/// Achievable rates of rotationally invariant inputs over the AWGN channel.
///
/// SNR is A = E||X||^2 / N0 with N0 = 2 sigma^2, given in dB as 10 log10(A).
#[derive(Parser, Debug)]
#[command(name = "rotinv", version)]
struct Cli {
    /// Worker threads (default: all cores). Output does not depend on it.
    #[arg(long, global = true)]
    threads: Option<usize>,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Sweep MI of multisphere inputs over (N, K, SNR) and write CSV.
    Rates(RatesArgs),
    /// Table of the AWGN capacity (N/2) log2(1 + 2A/N).
    Capacity(CapacityArgs),
    /// Quadrature MI against both Monte Carlo oracles at one point.
    Oracle(OracleArgs),
    /// Two 2-D multirings against one 4-D multisphere at a 4-D SNR.
    Crossover(CrossoverArgs),
    /// Statistical polarization-rotation invariance of Manakov propagation.
    ManakovCheck(ManakovArgs),
}

#[derive(Args, Debug)]
struct ShapeArgs {
    /// Custom sphere radii (shape only; rescaled to each SNR).
    #[arg(long, value_delimiter = ',', requires = "probs")]
    radii: Option<Vec<f64>>,
    /// Probabilities for --radii.
    #[arg(long, value_delimiter = ',', requires = "radii")]
    probs: Option<Vec<f64>>,
}

impl ShapeArgs {
    fn custom(&self) -> rotinv::Result<Option<SphereSet>> {
        match (&self.radii, &self.probs) {
            (Some(r), Some(p)) => SphereSet::new(r.clone(), p.clone()).map(Some),
            _ => Ok(None),
        }
    }
}

#[derive(Args, Debug)]
struct RatesArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    dims: Vec<usize>,
    #[arg(long, value_delimiter = ',', default_value = "1,2,4,8")]
    rings: Vec<usize>,
    /// start:stop:step in dB, SNR dB = 10 log10(A).
    #[arg(long, default_value = "0:40:1", allow_hyphen_values = true)]
    snr_db: String,
    /// Scale rates and SNR by 4/N (bits per 4-D use vs 4-D SNR).
    #[arg(long)]
    normalize_4d: bool,
    /// Monte Carlo samples per row; 0 skips the oracle.
    #[arg(long, default_value_t = 0)]
    oracle_samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    /// CSV destination (stdout if absent); a gnuplot script is written next to it.
    #[arg(long)]
    out: Option<PathBuf>,
    #[command(flatten)]
    shape: ShapeArgs,
}

#[derive(Args, Debug)]
struct CapacityArgs {
    #[arg(long, value_delimiter = ',', default_value = "2,4")]
    dims: Vec<usize>,
    #[arg(long, default_value = "0:40:1", allow_hyphen_values = true)]
    snr_db: String,
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct OracleArgs {
    #[arg(long, default_value_t = 4)]
    dims: usize,
    #[arg(long, default_value_t = 8)]
    rings: usize,
    #[arg(long, default_value_t = 20.0, allow_hyphen_values = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 1_000_000)]
    oracle_samples: usize,
    #[arg(long, default_value_t = 42)]
    seed: u64,
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
    #[command(flatten)]
    shape: ShapeArgs,
}

#[derive(Args, Debug)]
struct CrossoverArgs {
    /// 4-D SNR in dB.
    #[arg(long, default_value_t = 25.0, allow_hyphen_values = true)]
    snr_db: f64,
    #[arg(long, default_value_t = 8)]
    rings: usize,
    #[arg(long, default_value_t = 1e-8)]
    rel_tol: f64,
}

#[derive(Args, Debug)]
struct ManakovArgs {
    /// key = value file (beta2, gamma, length, steps, noise_psd, samples,
    /// dt, trials, seed, power, rings, unitary); built-in defaults if absent.
    #[arg(long)]
    params: Option<PathBuf>,
    /// Overrides the seed from the parameter file.
    #[arg(long)]
    seed: Option<u64>,
}

fn quad_config(rel_tol: f64) -> QuadratureConfig {
    QuadratureConfig {
        rel_tol,
        ..QuadratureConfig::default()
    }
}

fn write_output(out: Option<&Path>, text: &str) -> Result<(), String> {
    match out {
        Some(path) => {
            fs::write(path, text).map_err(|e| format!("cannot write {}: {e}", path.display()))
        }
        None => {
            print!("{text}");
            Ok(())
        }
    }
}

fn rates(args: RatesArgs) -> Result<u8, Failure> {
    let custom = args.shape.custom()?;
    let mut spec = SweepSpec::uniform(args.dims, args.rings, parse_snr_range(&args.snr_db)?);
    if let Some(set) = custom {
        spec.shape = InputShape::Custom(set);
    }
    spec.normalize_4d = args.normalize_4d;
    spec.oracle_samples = args.oracle_samples;
    spec.seed = args.seed;
    let outcome = run_sweep(&spec, &quad_config(args.rel_tol))?;
    write_output(args.out.as_deref(), &outcome.csv).map_err(Failure::Io)?;
    if let Some(path) = &args.out {
        let script_path = path.with_extension("gp");
        let script = plot_script(&path.to_string_lossy(), &spec);
        fs::write(&script_path, script)
            .map_err(|e| Failure::Io(format!("cannot write {}: {e}", script_path.display())))?;
    }
    if outcome.any_nonconverged() {
        eprintln!("warning: some rows did not converge (status column)");
        return Ok(EXIT_NONCONVERGED);
    }
    Ok(0)
}

fn capacity(args: CapacityArgs) -> Result<u8, Failure> {
    let table = capacity_table(&args.dims, parse_snr_range(&args.snr_db)?)?;
    write_output(args.out.as_deref(), &table).map_err(Failure::Io)?;
    Ok(0)
}

fn oracle(args: OracleArgs) -> Result<u8, Failure> {
    let shape = match args.shape.custom()? {
        Some(set) => InputShape::Custom(set),
        None => InputShape::Uniform {
            rings_list: vec![args.rings],
        },
    };
    let report = run_oracle_point(
        args.dims,
        args.rings,
        args.snr_db,
        &shape,
        args.oracle_samples,
        args.seed,
        &quad_config(args.rel_tol),
    )?;
    print!("{}", report.render());
    Ok(0)
}

fn crossover(args: CrossoverArgs) -> Result<u8, Failure> {
    let report = run_crossover_check(args.snr_db, args.rings, &quad_config(args.rel_tol))?;
    print!("{}", report.render());
    Ok(0)
}

fn manakov(args: ManakovArgs) -> Result<u8, Failure> {
    let mut cfg = match &args.params {
        Some(path) => {
            let text = fs::read_to_string(path)
                .map_err(|e| Failure::Io(format!("cannot read {}: {e}", path.display())))?;
            parse_manakov_params(&text)?
        }
        None => ManakovConfig::default(),
    };
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    let report = run_manakov_check(&cfg)?;
    print!("{}", render_invariance_report(&report));
    Ok(if report.passed() { 0 } else { EXIT_INVARIANCE })
}

enum Failure {
    Lib(Error),
    Io(String),
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        Self::Lib(e)
    }
}

fn main() -> ExitCode {
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return ExitCode::from(if e.use_stderr() { EXIT_USAGE } else { 0 });
        }
    };
    if let Some(n) = cli.threads {
        if let Err(e) = ThreadPoolBuilder::new()
            .num_threads(n.max(1))
            .build_global()
        {
            eprintln!("error: {e}");
            return ExitCode::from(EXIT_USAGE);
        }
    }
    let result = match cli.command {
        Command::Rates(a) => rates(a),
        Command::Capacity(a) => capacity(a),
        Command::Oracle(a) => oracle(a),
        Command::Crossover(a) => crossover(a),
        Command::ManakovCheck(a) => manakov(a),
    };
    match result {
        Ok(code) => ExitCode::from(code),
        Err(Failure::Lib(e @ Error::NonConvergence { .. })) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_NONCONVERGED)
        }
        Err(Failure::Lib(e)) => {
            eprintln!("error: {e}");
            ExitCode::from(EXIT_USAGE)
        }
        Err(Failure::Io(msg)) => {
            eprintln!("error: {msg}");
            ExitCode::from(EXIT_USAGE)
        }
    }
}
