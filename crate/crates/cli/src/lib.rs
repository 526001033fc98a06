//! Command implementations behind the `nsconst` binary. Every command
//! returns a report that can be rendered as a human-readable table, JSON or
//! CSV; `main.rs` only parses arguments and writes the rendered text.

pub mod error;
pub mod golden;
pub mod report;

use std::path::PathBuf;

use num_complex::Complex64;

use nsconst::certify::default_rho;
use nsconst::fields::{lower_bound_witness, TrialAmplitudes};
use nsconst::lattice::{LatticeVector, Radius};
use nsconst::sums::{k_m, kk_direct, z_n, SumConfig};
use nsconst::tail::delta_k;
use nsconst::{certify_bounds, k_minus, BoundCertificate, CertifyOptions};

pub use error::{CliError, Result, EXIT_INCONCLUSIVE, EXIT_INVALID, EXIT_MISMATCH, EXIT_OK};
pub use report::{CertifyReport, Check, SumsReport, TableReport, TableRow, WitnessOutput};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, clap::ValueEnum)]
pub enum Format {
    #[default]
    Human,
    Json,
    Csv,
}

/// Parameters shared by all subcommands.
#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    pub d: usize,
    /// Orders to process; empty selects the command's default.
    pub n: Vec<f64>,
    /// Cutoff; `None` selects 20 for `d = 3, n = 2` and 10 otherwise.
    pub rho: Option<Radius>,
    pub t: usize,
    /// `None` selects `2ρ`.
    pub search_radius: Option<f64>,
    pub format: Format,
    pub out: Option<PathBuf>,
    pub threads: Option<usize>,
    pub verbose: u8,
}

impl Default for RunConfig {
    fn default() -> Self {
        Self {
            d: 3,
            n: Vec::new(),
            rho: None,
            t: 6,
            search_radius: None,
            format: Format::Human,
            out: None,
            threads: None,
            verbose: 0,
        }
    }
}

impl RunConfig {
    pub fn rho_for(&self, n: f64) -> Result<Radius> {
        match self.rho {
            Some(r) => Ok(r),
            None => Ok(Radius::new(default_rho(self.d, n))?),
        }
    }

    pub fn certify_options(&self, n: f64) -> Result<CertifyOptions> {
        if self.threads == Some(0) {
            return Err(CliError::Usage("--threads must be positive".into()));
        }
        let mut opts = CertifyOptions::new(self.d, n).with_rho(self.rho_for(n)?).with_t(self.t);
        if let Some(r) = self.search_radius {
            opts = opts.with_search_radius(r);
        }
        if let Some(t) = self.threads {
            opts = opts.with_threads(t);
        }
        Ok(opts)
    }

    fn single_n(&self, what: &str) -> Result<f64> {
        match self.n.as_slice() {
            [n] => Ok(*n),
            [] => Err(CliError::Usage(format!("{what} needs --n"))),
            _ => Err(CliError::Usage(format!("{what} takes a single --n"))),
        }
    }
}

/// Amplitude arguments of `witness`. Without any amplitude the canonical
/// maximizing amplitudes are used.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct WitnessArgs {
    pub canonical: bool,
    pub alpha: Option<Complex64>,
    pub alpha_rest: Option<Vec<Complex64>>,
    pub beta: Option<Complex64>,
    pub beta_rest: Option<Vec<Complex64>>,
}

impl WitnessArgs {
    fn any_amplitude(&self) -> bool {
        self.alpha.is_some() || self.alpha_rest.is_some() || self.beta.is_some() || self.beta_rest.is_some()
    }

    pub fn amplitudes(&self, d: usize) -> Result<TrialAmplitudes> {
        if self.canonical && self.any_amplitude() {
            return Err(CliError::Usage(
                "--canonical cannot be combined with explicit amplitudes".into(),
            ));
        }
        if !self.any_amplitude() {
            return Ok(TrialAmplitudes::canonical(d));
        }
        let zero = Complex64::new(0.0, 0.0);
        let rest = d.saturating_sub(2);
        Ok(TrialAmplitudes {
            alpha: self.alpha.unwrap_or(zero),
            alpha_rest: self.alpha_rest.clone().unwrap_or_else(|| vec![zero; rest]),
            beta: self.beta.unwrap_or(zero),
            beta_rest: self.beta_rest.clone().unwrap_or_else(|| vec![zero; rest]),
        })
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct SumsArgs {
    pub k: LatticeVector,
    /// Also enclose the full sum by direct summation up to this radius.
    pub direct_radius: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub enum Command {
    Certify,
    Table,
    Witness(WitnessArgs),
    Sums(SumsArgs),
}

/// Rendered command output together with the process exit status.
#[derive(Debug, Clone, PartialEq)]
pub struct Output {
    pub body: String,
    pub exit_code: i32,
}

pub fn run(command: &Command, cfg: &RunConfig) -> Result<Output> {
    match command {
        Command::Certify => {
            let r = cmd_certify(cfg)?;
            Ok(Output {
                body: r.render(cfg.format)?,
                exit_code: EXIT_OK,
            })
        }
        Command::Table => {
            let r = cmd_table(cfg)?;
            let mismatches = r.mismatch_count();
            if mismatches > 0 {
                log::warn!("{}", CliError::Mismatch(mismatches));
            }
            Ok(Output {
                body: r.render(cfg.format)?,
                exit_code: if mismatches > 0 { EXIT_MISMATCH } else { EXIT_OK },
            })
        }
        Command::Witness(args) => Ok(Output {
            body: cmd_witness(cfg, args)?.render(cfg.format)?,
            exit_code: EXIT_OK,
        }),
        Command::Sums(args) => Ok(Output {
            body: cmd_sums(cfg, args)?.render(cfg.format)?,
            exit_code: EXIT_OK,
        }),
    }
}

fn certify_one(cfg: &RunConfig, n: f64) -> Result<BoundCertificate> {
    let cert = certify_bounds(&cfg.certify_options(n)?)?;
    log::info!(
        "d={} n={n}: sup K_m = {} at {}, {} vectors, {} ms",
        cert.d,
        cert.sup_km,
        cert.argmax,
        cert.diagnostics.evaluated,
        cert.runtime_ms
    );
    Ok(cert)
}

/// One certificate per requested order.
pub fn cmd_certify(cfg: &RunConfig) -> Result<CertifyReport> {
    if cfg.n.is_empty() {
        return Err(CliError::Usage("certify needs --n".into()));
    }
    let certificates = cfg.n.iter().map(|&n| certify_one(cfg, n)).collect::<Result<Vec<_>>>()?;
    Ok(CertifyReport { certificates })
}

/// The bound table, compared against the published values where they exist.
pub fn cmd_table(cfg: &RunConfig) -> Result<TableReport> {
    let orders: Vec<f64> = if cfg.n.is_empty() {
        golden::TABLE_ORDERS.to_vec()
    } else {
        cfg.n.clone()
    };
    let rows = orders
        .iter()
        .map(|&n| Ok(TableRow::new(certify_one(cfg, n)?)))
        .collect::<Result<Vec<_>>>()?;
    Ok(TableReport { d: cfg.d, rows })
}

/// The trial-field ratio computed end to end, with its closed form.
pub fn cmd_witness(cfg: &RunConfig, args: &WitnessArgs) -> Result<WitnessOutput> {
    let n = cfg.single_n("witness")?;
    let amps = args.amplitudes(cfg.d)?;
    let report = lower_bound_witness(cfg.d, n, &amps)?;
    Ok(WitnessOutput::new(cfg.d, n, &amps, &report, k_minus(cfg.d, n)?))
}

/// `K_m(k)`, `Z_n`, `δK_n` and optionally a direct enclosure of `KK_n(k)`.
pub fn cmd_sums(cfg: &RunConfig, args: &SumsArgs) -> Result<SumsReport> {
    let n = cfg.single_n("sums")?;
    let rho = cfg.rho_for(n)?;
    let sc = SumConfig::new(cfg.d, n, rho)?;
    let direct = args.direct_radius.map(|r| kk_direct(&args.k, &sc, r)).transpose()?;
    Ok(SumsReport {
        d: cfg.d,
        n,
        rho: rho.value(),
        k: args.k.clone(),
        k_m: k_m(&args.k, &sc)?,
        z_n: z_n(&sc),
        delta_k: delta_k(cfg.d, n, rho.value())?,
        direct,
    })
}
