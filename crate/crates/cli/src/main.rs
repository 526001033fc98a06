use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use num_complex::Complex64;

use nsconst::lattice::{LatticeVector, Radius};
use nsconst_cli::{run, CliError, Command, Format, RunConfig, SumsArgs, WitnessArgs, EXIT_INVALID};

/// Certified bounds for the sharp constant of the advection estimate
/// `‖L(v·∂w)‖_n ≤ K_n ‖v‖_n ‖w‖_{n+1}` on the d-dimensional torus.
#[derive(Parser, Debug)]
#[command(name = "nsconst", version)]
struct Cli {
    /// Dimension.
    #[arg(long, global = true, default_value_t = 3)]
    d: usize,

    /// Sobolev order(s), comma separated.
    #[arg(long, global = true, value_delimiter = ',')]
    n: Vec<f64>,

    /// Cutoff radius (e.g. 10, 12.5 or 25/2). Defaults to 20 for d=3, n=2 and 10 otherwise.
    #[arg(long, global = true, value_parser = parse_radius)]
    rho: Option<Radius>,

    /// Order of the Taylor remainder in the large-|k| expansion.
    #[arg(long, global = true, default_value_t = 6)]
    t: usize,

    /// Radius of the exhaustive search. Defaults to 2·rho.
    #[arg(long, global = true)]
    search_radius: Option<f64>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Human)]
    format: Format,

    /// Write the report to this file instead of stdout.
    #[arg(long, global = true)]
    out: Option<PathBuf>,

    /// Worker threads.
    #[arg(long, global = true, env = "NSCONST_THREADS")]
    threads: Option<usize>,

    /// Progress on stderr; repeat for more detail.
    #[arg(short, long, global = true, action = clap::ArgAction::Count)]
    verbose: u8,

    #[command(subcommand)]
    command: Cmd,
}

#[derive(Subcommand, Debug)]
enum Cmd {
    /// Compute a bound certificate for each requested order.
    Certify,
    /// Reproduce the d=3 table for n = 2,3,4,5,10 and compare with published values.
    Table,
    /// Evaluate the trial-field ratio behind the lower bound.
    Witness(WitnessCli),
    /// Print K_m(k), Z_n and delta K at one lattice vector.
    Sums(SumsCli),
}

#[derive(Args, Debug)]
struct WitnessCli {
    /// Use the maximizing amplitudes (the default when none are given).
    #[arg(long)]
    canonical: bool,
    /// Complex amplitude, e.g. 1, 0.5-2i.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    alpha: Option<Complex64>,
    /// d-2 complex amplitudes, comma separated.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', value_parser = parse_complex)]
    alpha_rest: Option<Vec<Complex64>>,
    #[arg(long, allow_hyphen_values = true, value_parser = parse_complex)]
    beta: Option<Complex64>,
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',', value_parser = parse_complex)]
    beta_rest: Option<Vec<Complex64>>,
}

#[derive(Args, Debug)]
struct SumsCli {
    /// Lattice vector, e.g. 2,1,0.
    #[arg(long, allow_hyphen_values = true, value_parser = parse_vector)]
    k: LatticeVector,
    /// Also enclose the full sum by direct summation up to this radius.
    #[arg(long)]
    direct: Option<f64>,
}

fn parse_radius(s: &str) -> Result<Radius, String> {
    s.parse().map_err(|e: nsconst::Error| e.to_string())
}

fn parse_complex(s: &str) -> Result<Complex64, String> {
    s.trim().parse().map_err(|e| format!("bad complex number {s:?}: {e}"))
}

fn parse_vector(s: &str) -> Result<LatticeVector, String> {
    s.parse().map_err(|e: nsconst::Error| e.to_string())
}

fn main() -> ExitCode {
    // Usage errors exit with 1 like every other invalid parameter; clap's
    // default of 2 is reserved for an inconclusive search radius.
    let cli = match Cli::try_parse() {
        Ok(cli) => cli,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() {
                ExitCode::from(EXIT_INVALID as u8)
            } else {
                ExitCode::SUCCESS
            };
        }
    };
    let level = match cli.verbose {
        0 => log::LevelFilter::Warn,
        1 => log::LevelFilter::Info,
        _ => log::LevelFilter::Debug,
    };
    env_logger::Builder::new()
        .filter_level(level)
        .format_timestamp(None)
        .init();

    let cfg = RunConfig {
        d: cli.d,
        n: cli.n,
        rho: cli.rho,
        t: cli.t,
        search_radius: cli.search_radius,
        format: cli.format,
        out: cli.out,
        threads: cli.threads,
        verbose: cli.verbose,
    };
    let command = match cli.command {
        Cmd::Certify => Command::Certify,
        Cmd::Table => Command::Table,
        Cmd::Witness(w) => Command::Witness(WitnessArgs {
            canonical: w.canonical,
            alpha: w.alpha,
            alpha_rest: w.alpha_rest,
            beta: w.beta,
            beta_rest: w.beta_rest,
        }),
        Cmd::Sums(s) => Command::Sums(SumsArgs {
            k: s.k,
            direct_radius: s.direct,
        }),
    };

    match run(&command, &cfg).and_then(|out| emit(&cfg, &out.body).map(|()| out.exit_code)) {
        Ok(code) => ExitCode::from(code as u8),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(e.exit_code() as u8)
        }
    }
}

fn emit(cfg: &RunConfig, body: &str) -> Result<(), CliError> {
    match &cfg.out {
        Some(path) => std::fs::write(path, body).map_err(|source| CliError::Io {
            path: path.clone(),
            source,
        }),
        None => {
            let mut stdout = std::io::stdout().lock();
            stdout
                .write_all(body.as_bytes())
                .and_then(|()| stdout.flush())
                .map_err(|source| CliError::Io {
                    path: PathBuf::from("<stdout>"),
                    source,
                })
        }
    }
}
