use serde::{Deserialize, Serialize};

use super::emit::{Cell, Table};
use super::{CommandConfig, RunConfig};
use crate::error::{invalid, Error, Result};
use crate::intermittency::{
    detect_log_correction, fit_power_law, jaffard_zeta, legendre_spectrum, p_grid, sweep, Axis,
    FitResult, Quantity,
};
use crate::norms::{
    check_tail, l2_squared_exact, l4_fourth_exact, snap_ell, structure_table, Snap, P_RANGE,
};
use crate::series::{
    increment_on_grid, phi_samples, phi_tail_bound, SeriesKind, SeriesSpec, TrigPolynomial,
};
use crate::spectral::{band_filter, synthesize, BandSpec, MAX_GRID_SIZE};
use crate::zalcwasser::{bracket, ratio_sweep};

pub const TOOL_VERSION: &str = env!("CARGO_PKG_VERSION");

/// Truncation must reach this many times the largest cutoff (or `1/l_min`).
const TRUNCATION_FACTOR: u64 = 16;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Provenance {
    pub tool_version: String,
    pub truncation: Option<u64>,
    /// Bound on the discarded tail (squared L2, or sup norm for the trajectory).
    pub tail_bound: f64,
    /// Tail bound over the measured quantity it was checked against.
    pub tail_ratio: Option<f64>,
    pub grid_size: Option<u64>,
    #[serde(default)]
    pub snaps: Vec<Snap>,
    /// `(min, max)` of Gauss-sum ratios.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bracket: Option<(f64, f64)>,
}

impl Provenance {
    fn new(truncation: Option<u64>, tail_bound: f64) -> Self {
        Self {
            tool_version: TOOL_VERSION.to_string(),
            truncation,
            tail_bound,
            tail_ratio: None,
            grid_size: None,
            snaps: Vec::new(),
            bracket: None,
        }
    }
}

/// Everything one run produces.
#[derive(Debug, Clone, PartialEq)]
pub struct ResultEnvelope {
    pub config: RunConfig,
    pub provenance: Provenance,
    pub table: Table,
}

pub fn run(config: &RunConfig) -> Result<ResultEnvelope> {
    let (provenance, table) = match &config.command {
        CommandConfig::Eval {
            series,
            grid_size,
            stride,
        } => eval(series, *grid_size, *stride)?,
        CommandConfig::FilterNorms { series, cutoffs } => filter_norms(series, cutoffs)?,
        CommandConfig::Structure {
            series,
            ps,
            ells,
            grid_size,
        } => structure(series, ps, ells, *grid_size)?,
        CommandConfig::Flatness {
            series,
            axis,
            scales,
            grid_size,
        } => flatness(series, *axis, scales, *grid_size)?,
        CommandConfig::Zalcwasser { p, ns } => zalcwasser(*p, ns)?,
        CommandConfig::Fit {
            series,
            quantity,
            scales,
            grid_size,
            window,
            log_exponent,
            log_options,
        } => {
            let poly = series.build()?;
            let mut provenance = adequacy(series, &poly, quantity.axis(), scales, *grid_size)?;
            let scaling = sweep(&poly, quantity.axis(), scales, *quantity, *grid_size)?;
            provenance.snaps = scaling.snaps.clone();
            let mut table = fit_table();
            push_fit(
                &mut table,
                *quantity,
                "power_law",
                &fit_power_law(&scaling, *window)?,
            );
            if let Some(exponent) = log_exponent {
                let fit = detect_log_correction(&scaling, *exponent, *log_options)?;
                push_fit(&mut table, *quantity, "log_correction", &fit);
            }
            (provenance, table)
        }
        CommandConfig::Spectrum {
            alphas,
            p_max,
            p_step,
        } => {
            let grid = p_grid(P_RANGE.0, *p_max, *p_step)?;
            let mut table = Table::new(["alpha", "d"]);
            for &alpha in alphas {
                let d = legendre_spectrum(jaffard_zeta, alpha, &grid)?;
                table.push(vec![Cell::Float(alpha), Cell::Float(d)]);
            }
            (Provenance::new(None, 0.0), table)
        }
        CommandConfig::Trajectory { k_max, points } => {
            let t: Vec<f64> = (0..*points).map(|i| i as f64 / *points as f64).collect();
            let phi = phi_samples(&t, *k_max)?;
            let mut table = Table::new(["t", "re", "im"]);
            for (t, z) in t.iter().zip(&phi) {
                table.push(vec![Cell::Float(*t), Cell::Float(z.re), Cell::Float(z.im)]);
            }
            (Provenance::new(Some(*k_max), phi_tail_bound(*k_max)), table)
        }
    };
    Ok(ResultEnvelope {
        config: config.clone(),
        provenance,
        table,
    })
}

fn needs_truncation_check(series: &SeriesSpec) -> bool {
    matches!(series.kind, SeriesKind::RiemannR | SeriesKind::IncrementI)
}

/// Refuses truncations too short for the requested scales and reports the
/// tail ratio against the smallest-scale quantity.
fn adequacy(
    series: &SeriesSpec,
    poly: &TrigPolynomial,
    axis: Axis,
    scales: &[f64],
    grid_size: u64,
) -> Result<Provenance> {
    let mut provenance = Provenance::new(Some(series.truncation), series.l2_tail_bound());
    if !needs_truncation_check(series) {
        return Ok(provenance);
    }
    let k = series.truncation;
    match axis {
        Axis::FilterCutoffN => {
            let n_max = scales.iter().copied().fold(0.0, f64::max) as u64;
            if k < TRUNCATION_FACTOR.saturating_mul(n_max) {
                return Err(Error::TruncationInadequate(format!(
                    "truncation {k} is below {TRUNCATION_FACTOR} x N_max = {}",
                    TRUNCATION_FACTOR * n_max
                )));
            }
            let measured = l2_squared_exact(&band_filter(poly, &BandSpec::high_pass(n_max)));
            provenance.tail_ratio = Some(check_tail(
                provenance.tail_bound,
                measured,
                &format!("high-pass part above N = {n_max}"),
            )?);
        }
        Axis::IncrementScaleL => {
            let ell_min = scales.iter().copied().fold(f64::INFINITY, f64::min);
            let need = (TRUNCATION_FACTOR as f64 / ell_min).ceil();
            if (k as f64) < need {
                return Err(Error::TruncationInadequate(format!(
                    "truncation {k} is below {TRUNCATION_FACTOR}/l_min = {need}"
                )));
            }
            let snap = snap_ell(ell_min, grid_size)?;
            let measured = l2_squared_exact(&increment_on_grid(poly, snap.shift, grid_size)?);
            let tail = 4.0 * provenance.tail_bound;
            provenance.tail_ratio = Some(check_tail(
                tail,
                measured,
                &format!("S_2 at l = {}", snap.snapped),
            )?);
        }
        Axis::TermCount => {}
    }
    provenance.grid_size = Some(grid_size);
    Ok(provenance)
}

fn eval(series: &SeriesSpec, grid_size: usize, stride: usize) -> Result<(Provenance, Table)> {
    let poly = series.build()?;
    if grid_size > MAX_GRID_SIZE {
        return Err(Error::ResourceBudget(format!(
            "grid of {grid_size} points exceeds {MAX_GRID_SIZE}"
        )));
    }
    let signal = synthesize(&poly, grid_size)?;
    let mut provenance = Provenance::new(Some(series.truncation), series.l2_tail_bound());
    provenance.grid_size = Some(grid_size as u64);
    let energy = l2_squared_exact(&poly);
    if energy > 0.0 && needs_truncation_check(series) {
        provenance.tail_ratio = Some(provenance.tail_bound / energy);
    }
    let mut table = Table::new(["j", "x", "re", "im"]);
    for (j, z) in signal.samples().iter().enumerate().step_by(stride) {
        table.push(vec![
            Cell::Int(j as i64),
            Cell::Float(j as f64 / grid_size as f64),
            Cell::Float(z.re),
            Cell::Float(z.im),
        ]);
    }
    Ok((provenance, table))
}

fn filter_norms(series: &SeriesSpec, cutoffs: &[u64]) -> Result<(Provenance, Table)> {
    let poly = series.build()?;
    let scales: Vec<f64> = cutoffs.iter().map(|&n| n as f64).collect();
    let provenance = adequacy(series, &poly, Axis::FilterCutoffN, &scales, 0)?;
    let mut table = Table::new(["N", "l2_squared", "l4_fourth", "flatness"]);
    let rows: Vec<(u64, f64, f64)> = {
        use rayon::prelude::*;
        cutoffs
            .par_iter()
            .map(|&n| {
                let hp = band_filter(&poly, &BandSpec::high_pass(n));
                Ok((n, l2_squared_exact(&hp), l4_fourth_exact(&hp)?))
            })
            .collect::<Result<_>>()?
    };
    for (n, l2, l4) in rows {
        let flat = if l2 > 0.0 {
            Cell::Float(l4 / (l2 * l2))
        } else {
            Cell::Text("undefined".into())
        };
        table.push(vec![
            Cell::Int(n as i64),
            Cell::Float(l2),
            Cell::Float(l4),
            flat,
        ]);
    }
    Ok((provenance, table))
}

fn structure(
    series: &SeriesSpec,
    ps: &[f64],
    ells: &[f64],
    grid_size: u64,
) -> Result<(Provenance, Table)> {
    let poly = series.build()?;
    let mut provenance = adequacy(series, &poly, Axis::IncrementScaleL, ells, grid_size)?;
    let result = structure_table(&poly, ps, ells, grid_size)?;
    provenance.snaps = ells
        .iter()
        .map(|&l| snap_ell(l, grid_size))
        .collect::<Result<_>>()?;
    let mut table = Table::new(["p", "ell", "ell_requested", "value"]);
    for r in &result.rows {
        table.push(vec![
            Cell::Float(r.p),
            Cell::Float(r.ell),
            Cell::Float(r.ell_requested),
            Cell::Float(r.value),
        ]);
    }
    Ok((provenance, table))
}

fn flatness(
    series: &SeriesSpec,
    axis: Axis,
    scales: &[f64],
    grid_size: u64,
) -> Result<(Provenance, Table)> {
    let poly = series.build()?;
    let mut provenance = adequacy(series, &poly, axis, scales, grid_size)?;
    let (quantity, column) = match axis {
        Axis::FilterCutoffN => (Quantity::FilterFlatness, "N"),
        Axis::IncrementScaleL => (Quantity::StructureFlatness, "ell"),
        Axis::TermCount => return Err(invalid("flatness is defined on the N and l axes only")),
    };
    let result = sweep(&poly, axis, scales, quantity, grid_size)?;
    provenance.snaps = result.snaps.clone();
    let mut table = Table::new([column, quantity.label()]);
    for r in &result.rows {
        let scale = match axis {
            Axis::FilterCutoffN => Cell::Int(r.scale as i64),
            _ => Cell::Float(r.scale),
        };
        table.push(vec![scale, Cell::Float(r.value)]);
    }
    Ok((provenance, table))
}

fn zalcwasser(p: f64, ns: &[u64]) -> Result<(Provenance, Table)> {
    let ratios = ratio_sweep(p, ns)?;
    let mut provenance = Provenance::new(None, 0.0);
    provenance.bracket = Some(bracket(&ratios));
    let mut table = Table::new(["N", "ratio"]);
    for r in &ratios.rows {
        table.push(vec![Cell::Int(r.scale as i64), Cell::Float(r.value)]);
    }
    Ok((provenance, table))
}

fn fit_table() -> Table {
    Table::new([
        "quantity",
        "model",
        "exponent",
        "exponent_stderr",
        "intercept",
        "points",
        "window_lo",
        "window_hi",
        "half_exponent_lo",
        "half_exponent_hi",
        "stable",
        "curvature_flagged",
        "r2_power_only",
        "r2_with_log",
        "log_coefficient",
        "relative_growth",
        "log_correction",
    ])
}

fn push_fit(table: &mut Table, quantity: Quantity, model: &str, fit: &FitResult) {
    let half = |f: fn(&(f64, f64)) -> f64| match &fit.half_window_exponents {
        Some(h) => Cell::Float(f(h)),
        None => Cell::Text(String::new()),
    };
    let lc = &fit.log_correction;
    table.push(vec![
        Cell::Text(quantity.label().into()),
        Cell::Text(model.into()),
        Cell::Float(fit.exponent),
        Cell::Float(fit.exponent_stderr),
        Cell::Float(fit.intercept),
        Cell::Int(fit.points as i64),
        Cell::Float(fit.window.0),
        Cell::Float(fit.window.1),
        half(|h| h.0),
        half(|h| h.1),
        Cell::Bool(fit.stable),
        Cell::Bool(fit.curvature_flagged),
        Cell::Float(lc.r2_power_only),
        Cell::Float(lc.r2_with_log),
        Cell::Float(lc.log_coefficient),
        Cell::Float(lc.relative_growth),
        Cell::Bool(lc.enabled),
    ]);
}
