//! Command-line front end. Every number printed comes from a library call.

pub mod config;
pub mod report;
pub mod validate;

use std::io::Write;
use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use thiserror::Error;

use crate::metrics::ValidDetection;
pub use config::{DetectionName, Grid, Metric, OutputFormat, RunConfig};
pub use report::{cmd_eval, cmd_sweep, Fault, Row, Table};
pub use validate::{cmd_validate, ValidateOptions, ValidationReport};

#[derive(Debug, Error)]
pub enum CliError {
    #[error("{0}")]
    Config(String),
    #[error(transparent)]
    Engine(#[from] crate::Error),
    #[error("i/o: {0}")]
    Io(#[from] std::io::Error),
}

#[derive(Debug, Parser)]
#[command(name = "uwoc-relay", version, about = "Dual-hop fixed-gain AF relaying over EGG underwater optical channels")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Exact, asymptotic and Monte Carlo values at one operating point.
    Eval(RunArgs),
    /// The metric over a grid of per-hop average SNRs (dB).
    Sweep(RunArgs),
    /// Closed form vs Monte Carlo vs asymptote on the shipped fixtures; exit 1 on failure.
    Validate(ValidateArgs),
    /// Lists the registered modulation schemes.
    ListModulations(ListArgs),
}

#[derive(Debug, Args, Default)]
pub struct RunArgs {
    /// TOML run configuration; flags override its values.
    #[arg(long)]
    pub config: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub metric: Option<Metric>,
    /// Registered modulation name (see `list-modulations`).
    #[arg(long)]
    pub modulation: Option<String>,
    /// Fixture of hop 1 (egg_a, egg_b, pure_exp, pure_gg, or a file in $UWOC_FIXTURE_DIR).
    #[arg(long)]
    pub hop1: Option<String>,
    #[arg(long)]
    pub hop2: Option<String>,
    /// Detection of both hops, unless `--detection2` is given.
    #[arg(long, value_enum)]
    pub detection: Option<DetectionName>,
    #[arg(long, value_enum)]
    pub detection2: Option<DetectionName>,
    /// Hop SNR in dB (both hops unless `--mu2-db` is given).
    #[arg(long, allow_hyphen_values = true)]
    pub mu_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub mu2_db: Option<f64>,
    /// Sweep only: hop-2 SNR relative to the grid value, in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub mu2_offset_db: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub gamma_th_db: Option<f64>,
    /// Fixed-gain constant C; derived from hop 1 when omitted.
    #[arg(long)]
    pub gain_constant: Option<f64>,
    /// Sweep grid `start:stop:step` in dB.
    #[arg(long, allow_hyphen_values = true)]
    pub grid: Option<Grid>,
    /// Monte Carlo draws per value (0 disables).
    #[arg(long)]
    pub mc_samples: Option<u64>,
    #[arg(long)]
    pub seed: Option<u64>,
    #[arg(long, value_enum)]
    pub format: Option<OutputFormat>,
    #[arg(long)]
    pub quadrature_step: Option<f64>,
    #[arg(long)]
    pub quadrature_halfwidth: Option<f64>,
    /// Extra modulation definitions (JSON array or NDJSON).
    #[arg(long)]
    pub modulations: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Args)]
pub struct ValidateArgs {
    #[arg(long, default_value_t = 1)]
    pub seed: u64,
    #[arg(long, default_value_t = validate::DEFAULT_SAMPLES)]
    pub mc_samples: u64,
    #[arg(long, value_enum, default_value_t = OutputFormat::Json)]
    pub format: OutputFormat,
    /// Also write the report to this file.
    #[arg(long)]
    pub output: Option<PathBuf>,
    #[arg(long, value_enum, hide = true)]
    pub inject_fault: Option<Fault>,
}

#[derive(Debug, Args)]
pub struct ListArgs {
    #[arg(long)]
    pub modulations: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = OutputFormat::Csv)]
    pub format: OutputFormat,
}

impl RunArgs {
    /// The configuration file (or defaults) with every given flag applied.
    pub fn resolve(&self, sweep: bool) -> Result<RunConfig, CliError> {
        let mut cfg = match &self.config {
            Some(path) => RunConfig::from_file(path)?,
            None => RunConfig::default(),
        };
        if let Some(name) = &self.hop1 {
            cfg.hop1 = config::HopSpec { fixture: Some(name.clone()), ..clear_params(&cfg.hop1) };
        }
        if let Some(name) = &self.hop2 {
            cfg.hop2 = config::HopSpec { fixture: Some(name.clone()), ..clear_params(&cfg.hop2) };
        }
        if let Some(d) = self.detection {
            cfg.hop1.detection = d;
            cfg.hop2.detection = self.detection2.unwrap_or(d);
        } else if let Some(d) = self.detection2 {
            cfg.hop2.detection = d;
        }
        if sweep && self.mu2_db.is_some() {
            return Err(CliError::Config("--mu2-db sets a single point; use --mu2-offset-db with sweep".into()));
        }
        if let Some(db) = self.mu_db {
            set_db(&mut cfg.hop1, db);
            set_db(&mut cfg.hop2, self.mu2_db.unwrap_or(db));
        } else if let Some(db) = self.mu2_db {
            set_db(&mut cfg.hop2, db);
        }
        macro_rules! apply {
            ($($flag:ident => $($field:ident).+),* $(,)?) => {
                $(if let Some(v) = self.$flag.clone() { cfg.$($field).+ = v; })*
            };
        }
        apply!(
            metric => metric,
            mu2_offset_db => mu2_offset_db,
            gamma_th_db => gamma_th_db,
            grid => sweep,
            mc_samples => monte_carlo.samples,
            seed => monte_carlo.seed,
            format => format,
        );
        if let Some(m) = &self.modulation {
            cfg.modulation = Some(m.clone());
        }
        if let Some(c) = self.gain_constant {
            cfg.gain_constant = Some(c);
        }
        if let Some(step) = self.quadrature_step {
            cfg.quadrature.step = Some(step);
        }
        if let Some(hw) = self.quadrature_halfwidth {
            cfg.quadrature.half_width = Some(hw);
        }
        if let Some(path) = &self.modulations {
            cfg.modulations_file = Some(path.clone());
        }
        cfg.validate()?;
        Ok(cfg)
    }
}

fn clear_params(h: &config::HopSpec) -> config::HopSpec {
    config::HopSpec { omega: None, lambda: None, a: None, b: None, c: None, ..h.clone() }
}

fn set_db(h: &mut config::HopSpec, db: f64) {
    match h.snr_kind() {
        config::SnrKind::Mu => h.mu_db = Some(db),
        config::SnrKind::Average => h.avg_snr_db = Some(db),
    }
}

fn render_table(table: &Table, format: OutputFormat) -> String {
    match format {
        OutputFormat::Csv => table.to_csv(),
        OutputFormat::Json => table.to_json() + "\n",
    }
}

/// `list-modulations` output.
pub fn list_modulations(args: &ListArgs) -> Result<String, CliError> {
    let mut reg = crate::metrics::ModulationRegistry::builtin();
    if let Some(path) = &args.modulations {
        reg.extend_from_file(path)?;
    }
    Ok(match args.format {
        OutputFormat::Json => {
            serde_json::to_string_pretty(&reg.iter().collect::<Vec<_>>()).expect("schemes serialize") + "\n"
        }
        OutputFormat::Csv => {
            let mut out = String::from("name,delta,p,n_terms,q,valid_detection\n");
            for m in reg.iter() {
                let q: Vec<String> = m.q.iter().map(|q| q.to_string()).collect();
                let det = match m.valid_detection {
                    ValidDetection::ImDd => "im_dd",
                    ValidDetection::Heterodyne => "heterodyne",
                    ValidDetection::Both => "both",
                };
                out.push_str(&format!("{},{},{},{},{},{}\n", m.name, m.delta, m.p, m.n_terms, q.join(";"), det));
            }
            out
        }
    })
}

/// Executes a parsed command, returning what to print and the exit status.
pub fn execute(cli: &Cli) -> Result<(String, ExitCode), CliError> {
    match &cli.command {
        Command::Eval(args) => {
            let cfg = args.resolve(false)?;
            let table = cmd_eval(&cfg, args.inject_fault)?;
            Ok((render_table(&table, cfg.format), ExitCode::SUCCESS))
        }
        Command::Sweep(args) => {
            let cfg = args.resolve(true)?;
            let table = cmd_sweep(&cfg, args.inject_fault)?;
            Ok((render_table(&table, cfg.format), ExitCode::SUCCESS))
        }
        Command::Validate(args) => {
            let report =
                cmd_validate(ValidateOptions { seed: args.seed, samples: args.mc_samples, fault: args.inject_fault })?;
            let text = match args.format {
                OutputFormat::Json => report.to_json() + "\n",
                OutputFormat::Csv => report.to_csv(),
            };
            if let Some(path) = &args.output {
                std::fs::write(path, &text)?;
            }
            for c in report.failed() {
                eprintln!("FAILED {}: {} > {} ({})", c.name, c.statistic, c.tolerance, c.detail);
            }
            let code = if report.passed { ExitCode::SUCCESS } else { ExitCode::from(1) };
            Ok((text, code))
        }
        Command::ListModulations(args) => Ok((list_modulations(args)?, ExitCode::SUCCESS)),
    }
}

/// Binary entry point.
pub fn main() -> ExitCode {
    let cli = Cli::parse();
    match execute(&cli) {
        Ok((text, code)) => {
            let mut out = std::io::stdout().lock();
            if out.write_all(text.as_bytes()).and_then(|_| out.flush()).is_err() {
                return ExitCode::from(3);
            }
            code
        }
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
