//! Command-line driver for the pole-order spectral sequence toolkit.

use clap::{Args, Parser, Subcommand, ValueEnum};
use polespec::cli::{self, CliError, JobConfig};
use polespec::linalg::Arith;
use polespec::spectral::{Backend, Mode};
use std::path::PathBuf;

#[derive(Parser)]
#[command(
    name = "polespec",
    about = "Second page of the pole-order spectral sequence, pole spectra and Alexander polynomials of reduced projective hypersurfaces",
    version
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Compute the page dimensions and the pole-order spectrum
    E2(CommonArgs),
    /// Compute Alexander polynomials with certificates
    Alexander(CommonArgs),
    /// Minimal generators of the Jacobian relation module
    Syzygy(CommonArgs),
    /// Saito freeness test
    Freeness(CommonArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum ModeArg {
    Arrangement,
    FreeLqh,
    General,
    Curve,
}

#[derive(Clone, Copy, ValueEnum)]
enum BackendArg {
    Syzygy,
    Direct,
    Both,
}

#[derive(Args)]
struct CommonArgs {
    /// Inline polynomial expression
    #[arg(long, conflicts_with = "input")]
    poly: Option<String>,

    /// Input file with `vars = ...` and `f = ...` lines
    #[arg(long)]
    input: Option<PathBuf>,

    /// Comma-separated variable names (with --poly; default x,y,z,w)
    #[arg(long)]
    vars: Option<String>,

    /// Which part of the page to compute
    #[arg(long, value_enum, default_value = "general")]
    mode: ModeArg,

    /// Rank backend; `both` cross-checks the two and aborts on mismatch
    #[arg(long, value_enum, default_value = "syzygy")]
    backend: BackendArg,

    /// Number of random primes for modular ranks
    #[arg(long, default_value_t = 2)]
    primes: usize,

    /// Use exact rational elimination everywhere
    #[arg(long)]
    exact: bool,

    /// Seed for all randomized choices
    #[arg(long, default_value_t = 0)]
    seed: u64,

    /// Worker threads (default: all cores)
    #[arg(long)]
    jobs: Option<usize>,

    /// Euler characteristic of the complement
    #[arg(long, allow_hyphen_values = true)]
    chi: Option<i64>,

    /// Known top Betti number of the Milnor fiber
    #[arg(long)]
    bn: Option<usize>,

    /// Known first Alexander polynomial as order:exponent pairs, e.g. 1:9
    #[arg(long)]
    delta1: Option<String>,

    /// Eigenvalue classes known to be non-resonant, e.g. 1,2,4
    #[arg(long)]
    nonresonant: Option<String>,

    /// Emit JSON on stdout
    #[arg(long)]
    json: bool,

    /// Dump the assembled matrices into this directory
    #[arg(long, value_name = "DIR")]
    dump_matrices: Option<PathBuf>,

    /// Skip the probabilistic reducedness check
    #[arg(long)]
    assume_reduced: bool,

    /// Cap on Q (clamped to the mode's own range)
    #[arg(long)]
    qmax: Option<usize>,

    /// Stream per-cell progress lines to stderr
    #[arg(long)]
    progress: bool,

    /// Print the full generator vectors (syzygy command)
    #[arg(long)]
    full: bool,
}

fn build_config(a: &CommonArgs) -> Result<JobConfig, CliError> {
    let (var_names, poly_text) = match (&a.poly, &a.input) {
        (Some(p), None) => {
            let names: Vec<String> = a
                .vars
                .clone()
                .unwrap_or_else(|| "x,y,z,w".to_string())
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            (names, p.clone())
        }
        (None, Some(path)) => {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Usage(format!("cannot read {}: {}", path.display(), e)))?;
            let (mut names, f) = cli::parse_input_file(&text)?;
            if let Some(v) = &a.vars {
                names = v.split(',').map(|s| s.trim().to_string()).collect();
            }
            (names, f)
        }
        _ => {
            return Err(CliError::Usage(
                "provide exactly one of --poly or --input".into(),
            ))
        }
    };
    let mode = match a.mode {
        ModeArg::Arrangement => Mode::Arrangement,
        ModeArg::FreeLqh => Mode::FreeLqh,
        ModeArg::General => Mode::General,
        ModeArg::Curve => Mode::Curve,
    };
    let backend = match a.backend {
        BackendArg::Syzygy => Backend::Syzygy,
        BackendArg::Direct => Backend::Direct,
        BackendArg::Both => Backend::Both,
    };
    let arith = if a.exact {
        Arith::Exact
    } else {
        Arith::Modular {
            primes: a.primes,
            seed: a.seed,
        }
    };
    let delta1 = a.delta1.as_deref().map(cli::parse_cyclotomic).transpose()?;
    let nonresonant = a
        .nonresonant
        .as_deref()
        .map(|s| {
            s.split(',')
                .map(|x| {
                    x.trim()
                        .parse::<usize>()
                        .map_err(|_| CliError::Usage(format!("bad class '{}'", x)))
                })
                .collect::<Result<Vec<_>, _>>()
        })
        .transpose()?
        .unwrap_or_default();
    let jobs = a
        .jobs
        .unwrap_or_else(|| std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1));
    Ok(JobConfig {
        poly_text,
        var_names,
        mode,
        backend,
        arith,
        seed: a.seed,
        jobs,
        chi: a.chi,
        bn: a.bn,
        delta1,
        nonresonant,
        json: a.json,
        dump_dir: a.dump_matrices.clone(),
        assume_reduced: a.assume_reduced,
        qmax: a.qmax,
        progress: a.progress,
        full_generators: a.full,
    })
}

fn run() -> Result<(), CliError> {
    let cli = Cli::parse();
    let args = match &cli.command {
        Command::E2(a) | Command::Alexander(a) | Command::Syzygy(a) | Command::Freeness(a) => a,
    };
    let cfg = build_config(args)?;
    rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.jobs)
        .build_global()
        .ok();
    let result = match &cli.command {
        Command::E2(_) => cli::cmd_e2(&cfg)?,
        Command::Alexander(_) => cli::cmd_alexander(&cfg)?,
        Command::Syzygy(_) => cli::cmd_syzygy(&cfg)?,
        Command::Freeness(_) => cli::cmd_freeness(&cfg)?,
    };
    if cfg.json {
        println!("{}", serde_json::to_string_pretty(&result.json).unwrap());
    } else {
        print!("{}", result.text);
    }
    Ok(())
}

fn main() {
    if let Err(e) = run() {
        eprintln!("error: {}", e);
        std::process::exit(e.exit_code());
    }
}
