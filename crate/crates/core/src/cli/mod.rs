//! Command-line front end: argument parsing, run configuration, dispatch and
//! table serialisation.

mod emit;
mod run;

pub use emit::{emit, read_csv, read_json, render, Cell, Format, JsonDocument, Table};
pub use run::{run, Provenance, ResultEnvelope, TOOL_VERSION};

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::intermittency::{Axis, LogCorrectionOptions, Quantity};
use crate::norms::exact_grid_size;
use crate::series::{SeriesKind, SeriesSpec};

/// Environment variable naming the directory used when `--out` is absent.
pub const OUTPUT_DIR_ENV: &str = "RIEMANN_OUTPUT_DIR";

#[derive(Debug, Parser)]
#[command(
    name = "riemann",
    version,
    about = "Intermittency diagnostics for Riemann's non-differentiable function"
)]
pub struct Cli {
    /// Worker threads for sweeps (default: all cores).
    #[arg(long, global = true)]
    pub threads: Option<usize>,

    /// Output file; stdout unless set here or through RIEMANN_OUTPUT_DIR.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,

    #[arg(long, global = true, value_enum, default_value_t = Format::Csv)]
    pub format: Format,

    #[command(subcommand)]
    pub command: CliCommand,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum SeriesArg {
    Riemann,
    Gauss,
    Increment,
    Phi,
}

#[derive(Debug, Args)]
pub struct SeriesArgs {
    #[arg(long, value_enum, default_value_t = SeriesArg::Riemann)]
    pub series: SeriesArg,

    /// Frequency cutoff (number of terms for Gauss sums).
    #[arg(long, visible_alias = "truncation", default_value_t = 1 << 20)]
    pub kmax: u64,

    /// Increment scale, increment series only.
    #[arg(long)]
    pub shift: Option<f64>,
}

#[derive(Debug, Args)]
pub struct ScaleArgs {
    /// Powers of two in [a, b], as `a:b`. On the l axis each power P gives l = 1/P.
    #[arg(long)]
    pub dyadic: Option<String>,

    /// Explicit comma-separated scales.
    #[arg(long)]
    pub scales: Option<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum AxisArg {
    #[value(name = "N", alias = "n")]
    N,
    #[value(name = "l", alias = "ell")]
    L,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum QuantityArg {
    L2,
    L4,
    S2,
    S4,
    F,
    G,
}

#[derive(Debug, Subcommand)]
pub enum CliCommand {
    /// Evaluate a series on the uniform grid.
    Eval {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long)]
        grid: Option<usize>,
        #[arg(long, default_value_t = 1)]
        stride: usize,
    },
    /// L2 and L4 norms of high-pass filters over cutoffs N.
    FilterNorms {
        #[command(flatten)]
        series: SeriesArgs,
        #[command(flatten)]
        scales: ScaleArgs,
    },
    /// Structure functions S_p(l).
    Structure {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, default_value = "2,4")]
        p: String,
        #[command(flatten)]
        scales: ScaleArgs,
        #[arg(long)]
        grid: Option<u64>,
    },
    /// Flatness F(N) or G(l).
    Flatness {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, value_enum, default_value_t = AxisArg::N)]
        axis: AxisArg,
        #[command(flatten)]
        scales: ScaleArgs,
        #[arg(long)]
        grid: Option<u64>,
    },
    /// Gauss-sum integrals against psi_p(N).
    Zalcwasser {
        #[arg(long)]
        p: f64,
        /// Comma list of N, or `a:b` for powers of two.
        #[arg(long = "N", alias = "n")]
        ns: String,
    },
    /// Power-law fit, optionally with a log-correction test.
    Fit {
        #[command(flatten)]
        series: SeriesArgs,
        #[arg(long, value_enum)]
        quantity: QuantityArg,
        #[command(flatten)]
        scales: ScaleArgs,
        #[arg(long)]
        grid: Option<u64>,
        /// Fit window `lo:hi` in table scale units.
        #[arg(long)]
        window: Option<String>,
        /// Test for a log correction on top of this exponent.
        #[arg(long)]
        log_exponent: Option<f64>,
        #[arg(long, default_value_t = 0.2)]
        margin: f64,
        #[arg(long, default_value_t = 0.25)]
        min_growth: f64,
    },
    /// Legendre spectrum of the exponents 3p/4 (p <= 4), 1 + p/2 (p > 4).
    Spectrum {
        /// `lo:hi:step`
        #[arg(long)]
        alpha: String,
        #[arg(long, default_value_t = 12.0)]
        pmax: f64,
        #[arg(long, default_value_t = 0.01)]
        pstep: f64,
    },
    /// Samples (t, Re phi, Im phi) of the corner trajectory.
    Trajectory {
        #[arg(long, default_value_t = 1 << 20)]
        kmax: u64,
        #[arg(long, default_value_t = 4096)]
        points: usize,
    },
}

/// Fully expanded, validated configuration of one run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunConfig {
    pub command: CommandConfig,
    pub output: OutputConfig,
    #[serde(default)]
    pub threads: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OutputConfig {
    pub path: Option<PathBuf>,
    pub format: Format,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "command", rename_all = "kebab-case")]
pub enum CommandConfig {
    Eval {
        series: SeriesSpec,
        grid_size: usize,
        stride: usize,
    },
    FilterNorms {
        series: SeriesSpec,
        cutoffs: Vec<u64>,
    },
    Structure {
        series: SeriesSpec,
        ps: Vec<f64>,
        ells: Vec<f64>,
        grid_size: u64,
    },
    Flatness {
        series: SeriesSpec,
        axis: Axis,
        scales: Vec<f64>,
        grid_size: u64,
    },
    Zalcwasser {
        p: f64,
        ns: Vec<u64>,
    },
    Fit {
        series: SeriesSpec,
        quantity: Quantity,
        scales: Vec<f64>,
        grid_size: u64,
        window: Option<(f64, f64)>,
        log_exponent: Option<f64>,
        log_options: LogCorrectionOptions,
    },
    Spectrum {
        alphas: Vec<f64>,
        p_max: f64,
        p_step: f64,
    },
    Trajectory {
        k_max: u64,
        points: usize,
    },
}

impl CommandConfig {
    pub fn name(&self) -> &'static str {
        match self {
            CommandConfig::Eval { .. } => "eval",
            CommandConfig::FilterNorms { .. } => "filter-norms",
            CommandConfig::Structure { .. } => "structure",
            CommandConfig::Flatness { .. } => "flatness",
            CommandConfig::Zalcwasser { .. } => "zalcwasser",
            CommandConfig::Fit { .. } => "fit",
            CommandConfig::Spectrum { .. } => "spectrum",
            CommandConfig::Trajectory { .. } => "trajectory",
        }
    }
}

impl Cli {
    /// Expands ranges and defaults into a [`RunConfig`]. Errors here are usage
    /// errors.
    pub fn into_config(self) -> Result<RunConfig> {
        let command = match self.command {
            CliCommand::Eval {
                series,
                grid,
                stride,
            } => {
                let series = series_spec(&series)?;
                let grid_size = match grid {
                    Some(m) => m,
                    None => exact_grid_size(&series.build()?, 2.0),
                };
                check_grid(grid_size as u64)?;
                if stride == 0 {
                    return Err(invalid("--stride must be >= 1"));
                }
                CommandConfig::Eval {
                    series,
                    grid_size,
                    stride,
                }
            }
            CliCommand::FilterNorms { series, scales } => {
                let series = series_spec(&series)?;
                let cutoffs = integer_scales(&scales)?;
                CommandConfig::FilterNorms { series, cutoffs }
            }
            CliCommand::Structure {
                series,
                p,
                scales,
                grid,
            } => {
                let series = series_spec(&series)?;
                let ps = parse_list(&p)?;
                if ps.is_empty() {
                    return Err(invalid("--p needs at least one exponent"));
                }
                let ells = ell_scales(&scales)?;
                let grid_size = grid_or_default(grid, &series)?;
                CommandConfig::Structure {
                    series,
                    ps,
                    ells,
                    grid_size,
                }
            }
            CliCommand::Flatness {
                series,
                axis,
                scales,
                grid,
            } => {
                let series = series_spec(&series)?;
                let (axis, scales) = match axis {
                    AxisArg::N => (
                        Axis::FilterCutoffN,
                        integer_scales(&scales)?
                            .into_iter()
                            .map(|n| n as f64)
                            .collect(),
                    ),
                    AxisArg::L => (Axis::IncrementScaleL, ell_scales(&scales)?),
                };
                let grid_size = grid_or_default(grid, &series)?;
                CommandConfig::Flatness {
                    series,
                    axis,
                    scales,
                    grid_size,
                }
            }
            CliCommand::Zalcwasser { p, ns } => {
                let ns = parse_terms(&ns)?;
                CommandConfig::Zalcwasser { p, ns }
            }
            CliCommand::Fit {
                series,
                quantity,
                scales,
                grid,
                window,
                log_exponent,
                margin,
                min_growth,
            } => {
                let series = series_spec(&series)?;
                let quantity = match quantity {
                    QuantityArg::L2 => Quantity::L2Squared,
                    QuantityArg::L4 => Quantity::L4Fourth,
                    QuantityArg::S2 => Quantity::S2,
                    QuantityArg::S4 => Quantity::S4,
                    QuantityArg::F => Quantity::FilterFlatness,
                    QuantityArg::G => Quantity::StructureFlatness,
                };
                let scales = match quantity.axis() {
                    Axis::IncrementScaleL => ell_scales(&scales)?,
                    _ => integer_scales(&scales)?
                        .into_iter()
                        .map(|n| n as f64)
                        .collect(),
                };
                let window = window.as_deref().map(parse_window).transpose()?;
                let grid_size = grid_or_default(grid, &series)?;
                CommandConfig::Fit {
                    series,
                    quantity,
                    scales,
                    grid_size,
                    window,
                    log_exponent,
                    log_options: LogCorrectionOptions {
                        margin,
                        min_relative_growth: min_growth,
                    },
                }
            }
            CliCommand::Spectrum { alpha, pmax, pstep } => {
                let alphas = parse_alpha_range(&alpha)?;
                if !(pmax >= 1.0 && pstep > 0.0) {
                    return Err(invalid("--pmax must be >= 1 and --pstep > 0"));
                }
                CommandConfig::Spectrum {
                    alphas,
                    p_max: pmax,
                    p_step: pstep,
                }
            }
            CliCommand::Trajectory { kmax, points } => {
                if kmax == 0 || points == 0 {
                    return Err(invalid("--kmax and --points must be positive"));
                }
                CommandConfig::Trajectory {
                    k_max: kmax,
                    points,
                }
            }
        };
        let path = self.out.or_else(|| {
            std::env::var_os(OUTPUT_DIR_ENV).map(|dir| {
                PathBuf::from(dir).join(format!("{}.{}", command.name(), self.format.extension()))
            })
        });
        if self.threads == Some(0) {
            return Err(invalid("--threads must be >= 1"));
        }
        Ok(RunConfig {
            command,
            output: OutputConfig {
                path,
                format: self.format,
            },
            threads: self.threads,
        })
    }
}

fn series_spec(args: &SeriesArgs) -> Result<SeriesSpec> {
    let kind = match args.series {
        SeriesArg::Riemann => SeriesKind::RiemannR,
        SeriesArg::Gauss => SeriesKind::GaussSumD,
        SeriesArg::Increment => SeriesKind::IncrementI,
        SeriesArg::Phi => SeriesKind::TrajectoryPhi,
    };
    SeriesSpec::new(kind, args.kmax, args.shift)
}

fn grid_or_default(grid: Option<u64>, series: &SeriesSpec) -> Result<u64> {
    let m = match grid {
        Some(m) => m,
        None => exact_grid_size(&series.build()?, 4.0) as u64,
    };
    check_grid(m)?;
    Ok(m)
}

fn check_grid(m: u64) -> Result<()> {
    if m >= 2 && m.is_power_of_two() {
        Ok(())
    } else {
        Err(invalid(format!(
            "grid size must be a power of two >= 2, got {m}"
        )))
    }
}

fn parse_list(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<f64>()
                .map_err(|_| invalid(format!("not a number: {t:?}")))
        })
        .collect()
}

/// Powers of two in `[a, b]` from `a:b`.
pub fn parse_dyadic(s: &str) -> Result<Vec<u64>> {
    let (a, b) = s
        .split_once(':')
        .ok_or_else(|| invalid(format!("dyadic range must look like a:b, got {s:?}")))?;
    let parse = |t: &str| {
        t.trim()
            .parse::<u64>()
            .map_err(|_| invalid(format!("not a positive integer: {t:?}")))
    };
    let (a, b) = (parse(a)?, parse(b)?);
    let powers: Vec<u64> = (0..63)
        .map(|k| 1u64 << k)
        .filter(|&p| p >= a && p <= b)
        .collect();
    if powers.is_empty() {
        return Err(invalid(format!("no power of two in [{a}, {b}]")));
    }
    Ok(powers)
}

fn integer_scales(args: &ScaleArgs) -> Result<Vec<u64>> {
    match (&args.dyadic, &args.scales) {
        (Some(d), None) => parse_dyadic(d),
        (None, Some(list)) => {
            let v = parse_list(list)?;
            if v.is_empty() {
                return Err(invalid("empty scale list"));
            }
            v.into_iter()
                .map(|x| {
                    if x >= 1.0 && x.fract() == 0.0 {
                        Ok(x as u64)
                    } else {
                        Err(invalid(format!(
                            "cutoff must be a positive integer, got {x}"
                        )))
                    }
                })
                .collect()
        }
        _ => Err(invalid("give exactly one of --dyadic or --scales")),
    }
}

fn ell_scales(args: &ScaleArgs) -> Result<Vec<f64>> {
    match (&args.dyadic, &args.scales) {
        (Some(d), None) => Ok(parse_dyadic(d)?
            .into_iter()
            .map(|p| 1.0 / p as f64)
            .collect()),
        (None, Some(list)) => {
            let v = parse_list(list)?;
            if v.is_empty() {
                return Err(invalid("empty scale list"));
            }
            Ok(v)
        }
        _ => Err(invalid("give exactly one of --dyadic or --scales")),
    }
}

fn parse_terms(s: &str) -> Result<Vec<u64>> {
    if s.contains(':') {
        return parse_dyadic(s);
    }
    let v: Vec<u64> = s
        .split(',')
        .map(str::trim)
        .filter(|t| !t.is_empty())
        .map(|t| {
            t.parse::<u64>()
                .map_err(|_| invalid(format!("not a positive integer: {t:?}")))
        })
        .collect::<Result<_>>()?;
    if v.is_empty() {
        return Err(invalid("empty N list"));
    }
    Ok(v)
}

fn parse_window(s: &str) -> Result<(f64, f64)> {
    let v: Vec<f64> = s
        .split(':')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad window {s:?}")))
        })
        .collect::<Result<_>>()?;
    match v.as_slice() {
        [a, b] if a <= b => Ok((*a, *b)),
        [a, b] => Ok((*b, *a)),
        _ => Err(invalid(format!("window must look like lo:hi, got {s:?}"))),
    }
}

/// `lo:hi:step` expanded as `lo + i*step`, endpoints included.
pub fn parse_alpha_range(s: &str) -> Result<Vec<f64>> {
    let v: Vec<f64> = s
        .split(':')
        .map(|t| {
            t.trim()
                .parse::<f64>()
                .map_err(|_| invalid(format!("bad range {s:?}")))
        })
        .collect::<Result<_>>()?;
    let [lo, hi, step] = v.as_slice() else {
        return Err(invalid(format!(
            "alpha range must look like lo:hi:step, got {s:?}"
        )));
    };
    if !(step > &0.0 && lo <= hi) {
        return Err(invalid(format!("bad alpha range {s:?}")));
    }
    let count = ((hi - lo) / step + 1e-9).floor() as usize + 1;
    Ok((0..count).map(|i| lo + i as f64 * step).collect())
}
