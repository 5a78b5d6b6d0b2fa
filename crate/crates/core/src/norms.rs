//! L^p norms of trigonometric polynomials and structure functions.
//!
//! For `p = 2` and `p = 4` the norms are computed exactly from the
//! coefficients: Parseval for the former, and `||f||_4^4 = ||f^2||_2^2` with a
//! sparse self-convolution for the latter. Any other `p` goes through uniform
//! grid quadrature, which is itself exact for even `p` once the grid resolves
//! `|f|^p`.

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::series::{increment_on_grid, SeriesSpec, TrigPolynomial};
use crate::spectral::{synthesize, GridSignal, MAX_GRID_SIZE};
use crate::sum::NeumaierSum;

/// Largest number of coefficient pairs the exact L4 path will visit.
pub const PAIR_BUDGET: u128 = 1 << 28;

/// Truncated tails must stay below this fraction of the measured quantity.
pub const ADEQUACY_RATIO: f64 = 1e-3;

/// Relative change allowed between grid sizes `M` and `2M` on the
/// non-exact quadrature path.
pub const GRID_CONVERGENCE_TOL: f64 = 1e-6;

/// Exponent range accepted by the structure-function routines.
pub const P_RANGE: (f64, f64) = (1.0, 12.0);

const WINDOW: i64 = 1 << 16;

/// `sum_n |c_n|^2`.
pub fn l2_squared_exact(poly: &TrigPolynomial) -> f64 {
    poly.iter()
        .map(|(_, c)| c.norm_sqr())
        .collect::<NeumaierSum>()
        .value()
}

/// `||f||_4^4 = sum_k |sum_n c_n c_{k-n}|^2`.
///
/// The self-convolution is accumulated densely one output window at a time;
/// each window only visits the pairs whose frequency sum lands inside it, so
/// memory stays at one window regardless of the span of the support. The
/// pair order within a window and the order in which window partials are
/// merged are both fixed, so the result does not depend on the thread count.
pub fn l4_fourth_exact(poly: &TrigPolynomial) -> Result<f64> {
    let terms = poly.terms();
    let support = terms.len() as u128;
    if support * support > PAIR_BUDGET {
        return Err(Error::ResourceBudget(format!(
            "exact L4 convolution over {support} coefficients visits {} pairs \
             (budget {PAIR_BUDGET}); use grid quadrature instead",
            support * support
        )));
    }
    let (Some(&(lo, _)), Some(&(hi, _))) = (terms.first(), terms.last()) else {
        return Ok(0.0);
    };
    let freqs: Vec<i64> = terms.iter().map(|t| t.0).collect();
    let (out_lo, out_hi) = (2 * lo, 2 * hi);
    let windows = ((out_hi - out_lo) / WINDOW + 1) as usize;

    let partials: Vec<NeumaierSum> = (0..windows)
        .into_par_iter()
        .map(|w| {
            let start = out_lo + w as i64 * WINDOW;
            let end = (start + WINDOW).min(out_hi + 1);
            let mut acc = vec![Complex64::new(0.0, 0.0); (end - start) as usize];
            for &(fi, ci) in &terms {
                let a = freqs.partition_point(|&f| f < start - fi);
                let b = freqs.partition_point(|&f| f < end - fi);
                for &(fj, cj) in &terms[a..b] {
                    acc[(fi + fj - start) as usize] += ci * cj;
                }
            }
            acc.iter().map(|v| v.norm_sqr()).collect()
        })
        .collect();

    let mut total = NeumaierSum::new();
    for p in &partials {
        total.merge(p);
    }
    Ok(total.value())
}

/// `(1/M) sum_j |f_j|^p`, the quadrature of `|f|^p`.
pub fn grid_lp_power(signal: &GridSignal, p: f64) -> Result<f64> {
    check_p(p)?;
    let half = p / 2.0;
    let acc: NeumaierSum = if p == 2.0 {
        signal.samples().iter().map(|s| s.norm_sqr()).collect()
    } else if p == 4.0 {
        signal
            .samples()
            .iter()
            .map(|s| s.norm_sqr().powi(2))
            .collect()
    } else if half.fract() == 0.0 {
        let k = half as i32;
        signal
            .samples()
            .iter()
            .map(|s| s.norm_sqr().powi(k))
            .collect()
    } else {
        signal
            .samples()
            .iter()
            .map(|s| s.norm_sqr().powf(half))
            .collect()
    };
    Ok(acc.value() / signal.grid_size() as f64)
}

/// `((1/M) sum_j |f_j|^p)^{1/p}`.
pub fn lp_norm_grid(signal: &GridSignal, p: f64) -> Result<f64> {
    Ok(grid_lp_power(signal, p)?.powf(1.0 / p))
}

fn check_p(p: f64) -> Result<()> {
    if p >= 1.0 && p.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "norm exponent must be a finite p >= 1, got {p}"
        )))
    }
}

pub fn is_even_integer(p: f64) -> bool {
    p.is_finite() && p > 0.0 && (p / 2.0).fract() == 0.0
}

/// Smallest power-of-two grid on which quadrature of `|f|^p` is exact for
/// even `p`: `M >= p * max_freq + 1`. For other `p` the next even integer is
/// used.
pub fn exact_grid_size(poly: &TrigPolynomial, p: f64) -> usize {
    let p_even = 2.0 * (p / 2.0).ceil().max(1.0);
    let need = (p_even as u128) * poly.max_freq() as u128 + 1;
    (need.max(2) as usize).next_power_of_two()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormMethod {
    ExactParseval,
    ExactConvolution,
    GridQuadrature,
}

/// A request for `||f||_p^p` by a particular method.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormRequest {
    pub p: f64,
    pub method: NormMethod,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub grid_size: Option<usize>,
}

impl NormRequest {
    pub fn new(p: f64, method: NormMethod, grid_size: Option<usize>) -> Result<Self> {
        check_p(p)?;
        match method {
            NormMethod::ExactParseval if p != 2.0 => {
                Err(invalid("Parseval path only computes p = 2"))
            }
            NormMethod::ExactConvolution if p != 4.0 => {
                Err(invalid("convolution path only computes p = 4"))
            }
            NormMethod::GridQuadrature if grid_size.is_none() => {
                Err(invalid("grid quadrature needs a grid size"))
            }
            _ => Ok(Self {
                p,
                method,
                grid_size,
            }),
        }
    }

    /// Preferred request for `p`: exact where an identity exists.
    pub fn auto(p: f64, poly: &TrigPolynomial) -> Result<Self> {
        if p == 2.0 {
            Self::new(p, NormMethod::ExactParseval, None)
        } else if p == 4.0 {
            Self::new(p, NormMethod::ExactConvolution, None)
        } else {
            Self::new(
                p,
                NormMethod::GridQuadrature,
                Some(exact_grid_size(poly, p)),
            )
        }
    }
}

/// `||f||_p^p` by the requested method.
pub fn norm_power(poly: &TrigPolynomial, request: &NormRequest) -> Result<f64> {
    match request.method {
        NormMethod::ExactParseval => Ok(l2_squared_exact(poly)),
        NormMethod::ExactConvolution => l4_fourth_exact(poly),
        NormMethod::GridQuadrature => {
            let m = request
                .grid_size
                .ok_or_else(|| invalid("missing grid size"))?;
            quadrature_power(poly, request.p, m)
        }
    }
}

/// Grid quadrature of `|f|^p`. Exact (single evaluation) for even `p` on a
/// large enough grid; otherwise evaluated at `M` and `2M` and required to
/// agree to [`GRID_CONVERGENCE_TOL`].
pub fn quadrature_power(poly: &TrigPolynomial, p: f64, grid_size: usize) -> Result<f64> {
    check_p(p)?;
    if poly.is_empty() {
        return Ok(0.0);
    }
    let coarse = grid_lp_power(&synthesize(poly, grid_size)?, p)?;
    if is_even_integer(p) && grid_size >= exact_grid_size(poly, p) {
        return Ok(coarse);
    }
    let fine = grid_lp_power(&synthesize(poly, 2 * grid_size)?, p)?;
    let change = relative_change(coarse, fine);
    if change >= GRID_CONVERGENCE_TOL {
        return Err(Error::NotConverged {
            grid_size,
            relative_change: change,
        });
    }
    Ok(fine)
}

fn relative_change(a: f64, b: f64) -> f64 {
    let scale = a.abs().max(b.abs());
    if scale == 0.0 {
        0.0
    } else {
        (a - b).abs() / scale
    }
}

/// Result of snapping a continuous scale onto the grid fraction `m / M`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Snap {
    pub requested: f64,
    pub snapped: f64,
    pub shift: u64,
    pub grid_size: u64,
}

/// Nearest grid fraction `m/M` to `ell`; must land strictly inside (0,1).
pub fn snap_ell(ell: f64, grid_size: u64) -> Result<Snap> {
    if !(ell > 0.0 && ell < 1.0) {
        return Err(invalid(format!(
            "structure-function scale must lie in (0,1), got {ell}"
        )));
    }
    if grid_size < 2 || !grid_size.is_power_of_two() {
        return Err(invalid(format!(
            "grid size must be a power of two >= 2, got {grid_size}"
        )));
    }
    let m = (ell * grid_size as f64).round() as u64;
    if m == 0 || m >= grid_size {
        return Err(invalid(format!(
            "scale {ell} snaps to {m}/{grid_size}, outside (0,1); refine the grid"
        )));
    }
    Ok(Snap {
        requested: ell,
        snapped: m as f64 / grid_size as f64,
        shift: m,
        grid_size,
    })
}

/// One structure-function evaluation `S_p(l) = ||I(l)||_p^p`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureSample {
    pub p: f64,
    pub snap: Snap,
    pub value: f64,
}

/// `S_p(l)` through the increment polynomial at the snapped scale. Uses
/// Parseval for `p = 2`, exact convolution for `p = 4` and grid quadrature
/// on the `M`-point grid otherwise.
pub fn structure_function(
    poly: &TrigPolynomial,
    p: f64,
    ell: f64,
    grid_size: u64,
) -> Result<StructureSample> {
    check_structure_p(p)?;
    let snap = snap_ell(ell, grid_size)?;
    let inc = increment_on_grid(poly, snap.shift, grid_size)?;
    let value = if p == 2.0 {
        l2_squared_exact(&inc)
    } else if p == 4.0 {
        l4_fourth_exact(&inc)?
    } else {
        let m = usize::try_from(grid_size)
            .ok()
            .filter(|m| *m <= MAX_GRID_SIZE)
            .ok_or_else(|| Error::ResourceBudget(format!("grid size {grid_size} too large")))?;
        quadrature_power(&inc, p, m)?
    };
    Ok(StructureSample { p, snap, value })
}

fn check_structure_p(p: f64) -> Result<()> {
    if p >= P_RANGE.0 && p <= P_RANGE.1 {
        Ok(())
    } else {
        Err(invalid(format!(
            "structure-function exponent must lie in [{}, {}], got {p}",
            P_RANGE.0, P_RANGE.1
        )))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StructureRow {
    pub ell: f64,
    pub ell_requested: f64,
    pub p: f64,
    pub value: f64,
}

/// `S_p(l)` over a grid of exponents and scales, sorted by `(p, l)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct StructureFunctionTable {
    pub rows: Vec<StructureRow>,
    pub grid_size: u64,
    pub truncation: Option<u64>,
    pub series: Option<SeriesSpec>,
}

impl StructureFunctionTable {
    pub fn with_series(mut self, spec: SeriesSpec) -> Self {
        self.truncation = Some(spec.truncation);
        self.series = Some(spec);
        self
    }

    pub fn values_for(&self, p: f64) -> impl Iterator<Item = &StructureRow> {
        self.rows.iter().filter(move |r| r.p == p)
    }
}

/// Evaluates every `(p, l)` pair in parallel.
pub fn structure_table(
    poly: &TrigPolynomial,
    ps: &[f64],
    ells: &[f64],
    grid_size: u64,
) -> Result<StructureFunctionTable> {
    let pairs: Vec<(f64, f64)> = ps
        .iter()
        .flat_map(|&p| ells.iter().map(move |&l| (p, l)))
        .collect();
    let samples: Vec<StructureSample> = pairs
        .par_iter()
        .map(|&(p, l)| structure_function(poly, p, l, grid_size))
        .collect::<Result<_>>()?;
    let mut rows: Vec<StructureRow> = samples
        .into_iter()
        .map(|s| StructureRow {
            ell: s.snap.snapped,
            ell_requested: s.snap.requested,
            p: s.p,
            value: s.value,
        })
        .collect();
    rows.sort_by(|a, b| a.p.total_cmp(&b.p).then(a.ell.total_cmp(&b.ell)));
    Ok(StructureFunctionTable {
        rows,
        grid_size,
        truncation: None,
        series: None,
    })
}

/// Checks that a truncated tail of squared L2 size `tail` is negligible
/// against `measured`, returning the ratio.
pub fn check_tail(tail: f64, measured: f64, what: &str) -> Result<f64> {
    if measured <= 0.0 {
        return Err(Error::TruncationInadequate(format!(
            "{what}: measured quantity is zero, tail ratio undefined"
        )));
    }
    let ratio = tail / measured;
    if ratio >= ADEQUACY_RATIO {
        return Err(Error::TruncationInadequate(format!(
            "{what}: tail bound {tail:e} is {ratio:e} of the measured {measured:e} \
             (limit {ADEQUACY_RATIO:e}); raise the truncation"
        )));
    }
    Ok(ratio)
}
