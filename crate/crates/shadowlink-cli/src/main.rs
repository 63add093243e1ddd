//! `shadowlink` — V2V channel-model pipeline front end.
//!
//! Subcommands wire the library stages together: `ingest` turns packet logs
//! into binned channel-gain samples, `estimate` fits pathloss parameters,
//! `correlate` estimates auto- and cross-correlation of the large-scale
//! fading, and `simulate` generates correlated shadowing realizations and
//! fading-dip-duration CDFs, with presets for the bundled reference
//! comparisons.
//!
//! Exit codes: 0 success, 2 input parse error, 3 config/path error,
//! 4 optimizer non-convergence (outputs still written), 5 undefined
//! correlation (zero variance).

mod cmd_correlate;
mod cmd_estimate;
mod cmd_ingest;
mod cmd_simulate;
mod out;

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Parser, Subcommand, ValueEnum};

pub const EXIT_PARSE: u8 = 2;
pub const EXIT_CONFIG: u8 = 3;
pub const EXIT_NONCONVERGED: u8 = 4;
pub const EXIT_UNDEFINED_CORR: u8 = 5;

/// Error carrying the process exit code.
#[derive(Debug)]
pub struct CliError {
    pub code: u8,
    pub message: String,
}

impl CliError {
    pub fn parse(msg: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_PARSE,
            message: msg.to_string(),
        }
    }
    pub fn config(msg: impl std::fmt::Display) -> Self {
        Self {
            code: EXIT_CONFIG,
            message: msg.to_string(),
        }
    }
    pub fn other(msg: impl std::fmt::Display) -> Self {
        Self {
            code: 1,
            message: msg.to_string(),
        }
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::other(e)
    }
}

pub type CliResult = Result<(), CliError>;

#[derive(Parser)]
#[command(
    name = "shadowlink",
    version,
    about = "V2V multilink shadowing model pipeline"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ConditionArg {
    Los,
    Olos,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum MethodArg {
    Ols,
    Ml,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum ModeArg {
    Auto,
    Cross,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PolarizationArg {
    Vertical,
    Horizontal,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum PresetArg {
    Fig10,
    Fig11,
    Table2,
    Table3,
    Table4,
}

#[derive(Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum FormatArg {
    Csv,
    Json,
}

/// Geometry flags shared by estimate and correlate.
#[derive(clap::Args, Clone, Copy)]
pub struct GeomArgs {
    /// TX antenna height (m)
    #[arg(long, default_value_t = 1.60)]
    pub h_tx: f64,
    /// RX antenna height (m)
    #[arg(long, default_value_t = 1.45)]
    pub h_rx: f64,
    /// Carrier frequency (Hz)
    #[arg(long, default_value_t = 5.9e9)]
    pub carrier_hz: f64,
    /// Real part of the effective ground permittivity
    #[arg(long, default_value_t = 5.0)]
    pub eps_real: f64,
    /// Imaginary part of the effective ground permittivity
    #[arg(long, default_value_t = -0.2, allow_hyphen_values = true)]
    pub eps_imag: f64,
    /// Antenna polarization
    #[arg(long, value_enum, default_value_t = PolarizationArg::Vertical)]
    pub polarization: PolarizationArg,
}

impl GeomArgs {
    pub fn geometry(&self) -> shadowlink::LinkGeometry {
        shadowlink::config::GeometryConfig {
            h_tx_m: self.h_tx,
            h_rx_m: self.h_rx,
            carrier_hz: self.carrier_hz,
            eps_real: self.eps_real,
            eps_imag: self.eps_imag,
            polarization: match self.polarization {
                PolarizationArg::Vertical => shadowlink::Polarization::Vertical,
                PolarizationArg::Horizontal => shadowlink::Polarization::Horizontal,
            },
        }
        .into()
    }
}

#[derive(Subcommand)]
enum Command {
    /// Parse a packet log and write binned channel-gain samples
    Ingest {
        /// Packet log CSV
        #[arg(long)]
        log: PathBuf,
        /// Link config JSON (tx power, cable losses, censor level)
        #[arg(long)]
        config: Option<PathBuf>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
        /// Averaging bin duration (s)
        #[arg(long, default_value_t = 0.4)]
        bin_seconds: f64,
    },
    /// Fit pathloss model parameters from binned samples
    Estimate {
        /// Binned-sample CSV from `ingest`
        #[arg(long)]
        samples: PathBuf,
        /// Which propagation condition to fit
        #[arg(long, value_enum)]
        condition: ConditionArg,
        /// Estimation method
        #[arg(long, value_enum, default_value_t = MethodArg::Ml)]
        method: MethodArg,
        /// Link config JSON; provides the censoring bound
        #[arg(long)]
        config: Option<PathBuf>,
        #[command(flatten)]
        geom: GeomArgs,
        /// Stdout summary format: a table-style row or the full fit JSON
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Estimate fading correlation: autocorrelation or cross-correlation
    Correlate {
        #[arg(long, value_enum, default_value_t = ModeArg::Auto)]
        mode: ModeArg,
        /// Residual CSV (`traveled_m,residual_db`) from `estimate`
        #[arg(long)]
        residuals: Option<PathBuf>,
        /// Binned-sample CSV; requires --model
        #[arg(long)]
        samples: Option<PathBuf>,
        /// Pathloss model JSON (as written by `estimate`)
        #[arg(long)]
        model: Option<PathBuf>,
        /// Second residual series (cross mode)
        #[arg(long)]
        series_b: Option<PathBuf>,
        /// RX separation CSV (`delta_d_rx_m`), one row per aligned sample
        #[arg(long)]
        separation: Option<PathBuf>,
        /// Distance bin width (m)
        #[arg(long, default_value_t = 10.0)]
        bin_m: f64,
        /// Longest pair separation evaluated (m, auto mode)
        #[arg(long, default_value_t = 500.0)]
        max_lag_m: f64,
        #[command(flatten)]
        geom: GeomArgs,
        /// Stdout summary format: readable lines or the fit JSON
        #[arg(long, value_enum, default_value_t = FormatArg::Csv)]
        format: FormatArg,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
    /// Generate correlated shadowing traces and dip-duration CDFs
    Simulate {
        /// Scenario config JSON
        #[arg(long)]
        scenario: Option<PathBuf>,
        /// Built-in reproduction preset
        #[arg(long, value_enum)]
        preset: Option<PresetArg>,
        /// RNG seed (overrides scenario file and SHADOWLINK_SEED)
        #[arg(long)]
        seed: Option<u64>,
        /// Output directory
        #[arg(long)]
        out: PathBuf,
    },
}

/// Seed precedence: --seed flag, then SHADOWLINK_SEED, then the fallback.
pub fn resolve_seed(flag: Option<u64>, fallback: Option<u64>) -> Result<u64, CliError> {
    if let Some(s) = flag {
        return Ok(s);
    }
    if let Ok(v) = std::env::var("SHADOWLINK_SEED") {
        return v
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("SHADOWLINK_SEED is not an integer: `{v}`")));
    }
    Ok(fallback.unwrap_or(0))
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let result = match cli.command {
        Command::Ingest {
            log,
            config,
            out,
            bin_seconds,
        } => cmd_ingest::run(&log, config.as_deref(), &out, bin_seconds),
        Command::Estimate {
            samples,
            condition,
            method,
            config,
            geom,
            format,
            out,
        } => cmd_estimate::run(
            &samples,
            condition,
            method,
            config.as_deref(),
            &geom,
            format,
            &out,
        ),
        Command::Correlate {
            mode,
            residuals,
            samples,
            model,
            series_b,
            separation,
            bin_m,
            max_lag_m,
            geom,
            format,
            out,
        } => cmd_correlate::run(cmd_correlate::Args {
            mode,
            residuals,
            samples,
            model,
            series_b,
            separation,
            bin_m,
            max_lag_m,
            geom,
            format,
            out,
        }),
        Command::Simulate {
            scenario,
            preset,
            seed,
            out,
        } => cmd_simulate::run(scenario.as_deref(), preset, seed, &out),
    };
    match result {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {}", e.message);
            ExitCode::from(e.code)
        }
    }
}
