//! Flatness in the high-pass and structure-function senses, scale sweeps,
//! exponent fitting and the multifractal formulas.

mod fit;
mod multifractal;

pub use fit::{
    detect_log_correction, fit_power_law, FitResult, LogCorrection, LogCorrectionOptions,
    STABILITY_TOL,
};
pub use multifractal::{jaffard_zeta, legendre_spectrum, p_grid};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::norms::{l2_squared_exact, l4_fourth_exact, snap_ell, Snap};
use crate::series::{increment_on_grid, TrigPolynomial};
use crate::spectral::{band_filter, BandSpec};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    /// High-pass cutoff `N`; the small-scale parameter is `1/N`.
    FilterCutoffN,
    /// Increment scale `l`.
    IncrementScaleL,
    /// Number of terms `N` of a Gauss sum; the small-scale parameter is `1/N`.
    TermCount,
}

impl Axis {
    /// Maps a table scale onto the small-scale parameter (`1/N` or `l`).
    pub fn small_scale(&self, scale: f64) -> f64 {
        match self {
            Axis::FilterCutoffN | Axis::TermCount => 1.0 / scale,
            Axis::IncrementScaleL => scale,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Quantity {
    /// `||f_{>=N}||_2^2`
    L2Squared,
    /// `||f_{>=N}||_4^4`
    L4Fourth,
    /// `S_2(l)`
    S2,
    /// `S_4(l)`
    S4,
    /// `F(N)`
    FilterFlatness,
    /// `G(l)`
    StructureFlatness,
    /// `int |D_N|^p / psi_p(N)`
    GaussSumRatio,
}

impl Quantity {
    pub fn axis(&self) -> Axis {
        match self {
            Quantity::L2Squared | Quantity::L4Fourth | Quantity::FilterFlatness => {
                Axis::FilterCutoffN
            }
            Quantity::S2 | Quantity::S4 | Quantity::StructureFlatness => Axis::IncrementScaleL,
            Quantity::GaussSumRatio => Axis::TermCount,
        }
    }

    pub fn label(&self) -> &'static str {
        match self {
            Quantity::L2Squared => "l2_squared",
            Quantity::L4Fourth => "l4_fourth",
            Quantity::S2 => "s2",
            Quantity::S4 => "s4",
            Quantity::FilterFlatness => "flatness_f",
            Quantity::StructureFlatness => "flatness_g",
            Quantity::GaussSumRatio => "gauss_ratio",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScalingRow {
    pub scale: f64,
    pub value: f64,
}

/// `(scale, value)` records of one quantity along one axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScalingTable {
    pub axis: Axis,
    pub quantity: Quantity,
    pub rows: Vec<ScalingRow>,
    /// Grid snaps of the requested scales, empty on the cutoff axis.
    #[serde(default)]
    pub snaps: Vec<Snap>,
}

impl ScalingTable {
    pub fn new(axis: Axis, quantity: Quantity, rows: Vec<ScalingRow>) -> Result<Self> {
        check_rows(&rows)?;
        Ok(Self {
            axis,
            quantity,
            rows,
            snaps: Vec::new(),
        })
    }

    pub fn scales(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.scale).collect()
    }

    pub fn values(&self) -> Vec<f64> {
        self.rows.iter().map(|r| r.value).collect()
    }
}

fn check_rows(rows: &[ScalingRow]) -> Result<()> {
    if let Some(r) = rows
        .iter()
        .find(|r| !(r.scale > 0.0 && r.scale.is_finite()))
    {
        return Err(invalid(format!("scales must be positive, got {}", r.scale)));
    }
    if let Some(r) = rows
        .iter()
        .find(|r| !(r.value > 0.0 && r.value.is_finite()))
    {
        return Err(invalid(format!(
            "values must be positive, got {} at scale {}",
            r.value, r.scale
        )));
    }
    check_monotone(&rows.iter().map(|r| r.scale).collect::<Vec<_>>())
}

fn check_monotone(scales: &[f64]) -> Result<()> {
    let up = scales.windows(2).all(|w| w[0] < w[1]);
    let down = scales.windows(2).all(|w| w[0] > w[1]);
    if up || down {
        Ok(())
    } else {
        Err(invalid("scales must be strictly monotone"))
    }
}

/// `F(N) = ||f_{>=N}||_4^4 / ||f_{>=N}||_2^4`.
pub fn flatness_filter(poly: &TrigPolynomial, cutoff: u64) -> Result<f64> {
    let hp = band_filter(poly, &BandSpec::high_pass(cutoff));
    flatness_of(&hp).map_err(|_| {
        Error::UndefinedFlatness(format!(
            "high-pass part above N = {cutoff} is empty (max frequency {})",
            poly.max_freq()
        ))
    })
}

/// `G(l) = S_4(l) / S_2(l)^2` at the grid snap of `l`.
pub fn flatness_structure(poly: &TrigPolynomial, ell: f64, grid_size: u64) -> Result<f64> {
    flatness_structure_snapped(poly, ell, grid_size).map(|(_, g)| g)
}

/// Like [`flatness_structure`], also returning the snap that was used.
pub fn flatness_structure_snapped(
    poly: &TrigPolynomial,
    ell: f64,
    grid_size: u64,
) -> Result<(Snap, f64)> {
    let snap = snap_ell(ell, grid_size)?;
    let inc = increment_on_grid(poly, snap.shift, grid_size)?;
    let g = flatness_of(&inc).map_err(|_| {
        Error::UndefinedFlatness(format!(
            "increment at l = {} vanishes identically",
            snap.snapped
        ))
    })?;
    Ok((snap, g))
}

fn flatness_of(poly: &TrigPolynomial) -> Result<f64> {
    let l2 = l2_squared_exact(poly);
    if l2 == 0.0 {
        return Err(Error::UndefinedFlatness("zero L2 norm".into()));
    }
    Ok(l4_fourth_exact(poly)? / (l2 * l2))
}

/// Evaluates `quantity` at every scale, in parallel, preserving order.
///
/// Cutoff-axis scales must be positive integers. Increment-axis scales are
/// snapped to `m / grid_size`; the snapped values become the table scales
/// and the snaps are recorded on the table.
pub fn sweep(
    poly: &TrigPolynomial,
    axis: Axis,
    scales: &[f64],
    quantity: Quantity,
    grid_size: u64,
) -> Result<ScalingTable> {
    if quantity.axis() != axis {
        return Err(invalid(format!(
            "quantity {} is not defined on the {:?} axis",
            quantity.label(),
            axis
        )));
    }
    check_monotone(scales)?;
    match axis {
        Axis::TermCount => Err(invalid(
            "Gauss-sum ratios are produced by zalcwasser::ratio_sweep",
        )),
        Axis::FilterCutoffN => {
            let cutoffs = scales
                .iter()
                .map(|&s| as_cutoff(s))
                .collect::<Result<Vec<u64>>>()?;
            let rows = cutoffs
                .par_iter()
                .map(|&n| {
                    let value = match quantity {
                        Quantity::L2Squared => Ok(l2_squared_exact(&band_filter(
                            poly,
                            &BandSpec::high_pass(n),
                        ))),
                        Quantity::L4Fourth => {
                            l4_fourth_exact(&band_filter(poly, &BandSpec::high_pass(n)))
                        }
                        _ => flatness_filter(poly, n),
                    }?;
                    Ok(ScalingRow {
                        scale: n as f64,
                        value,
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            ScalingTable::new(axis, quantity, rows)
        }
        Axis::IncrementScaleL => {
            let results = scales
                .par_iter()
                .map(|&l| {
                    let snap = snap_ell(l, grid_size)?;
                    let inc = increment_on_grid(poly, snap.shift, grid_size)?;
                    let value = match quantity {
                        Quantity::S2 => l2_squared_exact(&inc),
                        Quantity::S4 => l4_fourth_exact(&inc)?,
                        _ => flatness_of(&inc).map_err(|_| {
                            Error::UndefinedFlatness(format!(
                                "increment at l = {} vanishes identically",
                                snap.snapped
                            ))
                        })?,
                    };
                    Ok((snap, value))
                })
                .collect::<Result<Vec<_>>>()?;
            let rows = results
                .iter()
                .map(|(s, v)| ScalingRow {
                    scale: s.snapped,
                    value: *v,
                })
                .collect();
            let mut table = ScalingTable::new(axis, quantity, rows)?;
            table.snaps = results.into_iter().map(|(s, _)| s).collect();
            Ok(table)
        }
    }
}

fn as_cutoff(scale: f64) -> Result<u64> {
    if scale >= 1.0 && scale.fract() == 0.0 && scale < u64::MAX as f64 {
        Ok(scale as u64)
    } else {
        Err(invalid(format!(
            "filter cutoffs must be positive integers, got {scale}"
        )))
    }
}
