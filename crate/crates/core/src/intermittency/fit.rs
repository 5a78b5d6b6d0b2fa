use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::ScalingTable;
use crate::error::{invalid, Result};

/// Half-window slopes closer than this mark a fit as stable.
pub const STABILITY_TOL: f64 = 0.1;

/// Residual RMS (in log units) below which a power-law fit is treated as exact.
const EXACT_RMS: f64 = 1e-9;

/// Thresholds of the log-correction test.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogCorrectionOptions {
    /// Required r^2 gain of `a + b log(1/s)` over the constant model.
    pub margin: f64,
    /// Required relative change of the fitted log term across the window,
    /// `b * (x_max - x_min) / mean(y)`.
    pub min_relative_growth: f64,
}

impl Default for LogCorrectionOptions {
    fn default() -> Self {
        Self {
            margin: 0.2,
            min_relative_growth: 0.25,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LogCorrection {
    pub enabled: bool,
    pub r2_power_only: f64,
    pub r2_with_log: f64,
    pub log_coefficient: f64,
    pub relative_growth: f64,
}

/// Outcome of a scaling fit.
///
/// Exponents are slopes against the small-scale parameter (`l`, or `1/N` on
/// the cutoff axis), so `S_2(l) ~ l^{3/2}` and `||R_{>=N}||_2^2 ~ N^{-3/2}`
/// both report `3/2`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub exponent: f64,
    pub exponent_stderr: f64,
    pub intercept: f64,
    pub log_correction: LogCorrection,
    pub window: (f64, f64),
    pub residuals: Vec<f64>,
    pub half_window_exponents: Option<(f64, f64)>,
    pub stable: bool,
    pub curvature_flagged: bool,
    pub points: usize,
}

struct Line {
    intercept: f64,
    slope: f64,
    slope_stderr: f64,
    residuals: Vec<f64>,
    ssr: f64,
    sst: f64,
}

impl Line {
    fn r2(&self) -> f64 {
        r_squared(self.ssr, self.sst)
    }
}

fn r_squared(ssr: f64, sst: f64) -> f64 {
    if sst <= 0.0 {
        return 0.0;
    }
    (1.0 - ssr / sst).clamp(0.0, 1.0)
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

fn ols(x: &[f64], y: &[f64]) -> Line {
    let n = x.len() as f64;
    let (mx, my) = (mean(x), mean(y));
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residuals: Vec<f64> = x
        .iter()
        .zip(y)
        .map(|(a, b)| b - (intercept + slope * a))
        .collect();
    let ssr: f64 = residuals.iter().map(|r| r * r).sum();
    let sst: f64 = y.iter().map(|v| (v - my).powi(2)).sum();
    let slope_stderr = if n > 2.0 {
        (ssr / (n - 2.0) / sxx).sqrt()
    } else {
        0.0
    };
    Line {
        intercept,
        slope,
        slope_stderr,
        residuals,
        ssr,
        sst,
    }
}

/// Least squares with an arbitrary design matrix; returns (coefficients, SSR).
fn lstsq(columns: &[Vec<f64>], y: &[f64]) -> Option<(Vec<f64>, f64)> {
    let rows = y.len();
    let design = DMatrix::from_fn(rows, columns.len(), |i, j| columns[j][i]);
    let rhs = DVector::from_column_slice(y);
    let coef = design.clone().svd(true, true).solve(&rhs, 1e-14).ok()?;
    let ssr = (design * &coef - rhs).norm_squared();
    Some((coef.iter().copied().collect(), ssr))
}

/// Scales, values and bounds of the rows inside the window.
type Selection = (Vec<f64>, Vec<f64>, (f64, f64));

fn select(table: &ScalingTable, window: Option<(f64, f64)>) -> Result<Selection> {
    let (lo, hi) = match window {
        Some((a, b)) if a <= b => (a, b),
        Some((a, b)) => return Err(invalid(format!("empty fit window ({a}, {b})"))),
        None => {
            let s = table.scales();
            let lo = s.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = s.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    };
    let (scales, values): (Vec<f64>, Vec<f64>) = table
        .rows
        .iter()
        .filter(|r| r.scale >= lo && r.scale <= hi)
        .map(|r| (r.scale, r.value))
        .unzip();
    Ok((scales, values, (lo, hi)))
}

/// Ordinary least squares of `log(value)` on `log(small scale)` over the
/// window. Also reports the slopes of the two half-windows and whether adding
/// a `log log(1/s)` term removes most of the residual (curvature flag).
pub fn fit_power_law(table: &ScalingTable, window: Option<(f64, f64)>) -> Result<FitResult> {
    let (scales, values, window) = select(table, window)?;
    if scales.len() < 4 {
        return Err(invalid(format!(
            "power-law fit needs at least 4 rows in the window, got {}",
            scales.len()
        )));
    }
    let small: Vec<f64> = scales.iter().map(|&s| table.axis.small_scale(s)).collect();
    let x: Vec<f64> = small.iter().map(|s| s.ln()).collect();
    let y: Vec<f64> = values.iter().map(|v| v.ln()).collect();
    let line = ols(&x, &y);

    let n = x.len();
    let half = n.div_ceil(2);
    let first = ols(&x[..half], &y[..half]).slope;
    let second = ols(&x[n - half..], &y[n - half..]).slope;
    let stable = (first - second).abs() < STABILITY_TOL;

    let (r2_with_log, log_coefficient, curvature_flagged) = if small.iter().all(|&s| s < 1.0) {
        let loglog: Vec<f64> = small.iter().map(|s| (-s.ln()).ln()).collect();
        match lstsq(&[vec![1.0; n], x.clone(), loglog], &y) {
            Some((coef, ssr_aug)) => {
                let rms = (line.ssr / n as f64).sqrt();
                let flagged = rms > EXACT_RMS && ssr_aug <= 0.5 * line.ssr;
                (r_squared(ssr_aug, line.sst), coef[2], flagged)
            }
            None => (line.r2(), 0.0, false),
        }
    } else {
        (line.r2(), 0.0, false)
    };

    Ok(FitResult {
        exponent: line.slope,
        exponent_stderr: line.slope_stderr,
        intercept: line.intercept,
        log_correction: LogCorrection {
            enabled: false,
            r2_power_only: line.r2(),
            r2_with_log,
            log_coefficient,
            relative_growth: 0.0,
        },
        window,
        residuals: line.residuals,
        half_window_exponents: Some((first, second)),
        stable,
        curvature_flagged,
        points: n,
    })
}

/// Tests for a logarithmic correction on top of a given power law.
///
/// The compensated values `y = value / s^exponent` are regressed on
/// `x = log(1/s)`. The correction is reported when the linear model's r^2
/// beats the constant model's by `margin`, the coefficient is positive, and
/// the fitted log term moves `y` by at least `min_relative_growth` of its mean
/// across the window. The last gate separates a genuine `log(1/s)` factor from
/// a power law that is still converging to its constant.
pub fn detect_log_correction(
    table: &ScalingTable,
    exponent: f64,
    options: LogCorrectionOptions,
) -> Result<FitResult> {
    let (scales, values, window) = select(table, None)?;
    if scales.len() < 3 {
        return Err(invalid("log-correction test needs at least 3 rows"));
    }
    let small: Vec<f64> = scales.iter().map(|&s| table.axis.small_scale(s)).collect();
    let x: Vec<f64> = small.iter().map(|s| -s.ln()).collect();
    let y: Vec<f64> = small
        .iter()
        .zip(&values)
        .map(|(s, v)| v / s.powf(exponent))
        .collect();
    let line = ols(&x, &y);
    let r2_power_only = 0.0;
    let r2_with_log = line.r2();
    let span = x.iter().copied().fold(f64::NEG_INFINITY, f64::max)
        - x.iter().copied().fold(f64::INFINITY, f64::min);
    let relative_growth = line.slope * span / mean(&y);
    let enabled = r2_with_log - r2_power_only >= options.margin
        && line.slope > 0.0
        && relative_growth >= options.min_relative_growth;

    Ok(FitResult {
        exponent,
        exponent_stderr: 0.0,
        intercept: line.intercept,
        log_correction: LogCorrection {
            enabled,
            r2_power_only,
            r2_with_log,
            log_coefficient: line.slope,
            relative_growth,
        },
        window,
        residuals: line.residuals,
        half_window_exponents: None,
        stable: true,
        curvature_flagged: false,
        points: scales.len(),
    })
}
