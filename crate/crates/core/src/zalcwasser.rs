//! L^p norms of quadratic Gauss sums against the growth law `psi_p(N)`:
//! `N^{p/2}` below `p = 4`, `N^2 log N` at `p = 4` and `N^{p-2}` above.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::intermittency::{Axis, Quantity, ScalingRow, ScalingTable};
use crate::norms::{grid_lp_power, is_even_integer, l4_fourth_exact, quadrature_power};
use crate::series::gauss_sum_coefficients;
use crate::spectral::{synthesize, MAX_GRID_SIZE};

/// Above this many terms the `p = 4` integral switches from the exact
/// convolution to grid quadrature.
pub const CONVOLUTION_MAX_TERMS: u64 = 4096;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PsiBranch {
    Subcritical,
    Critical,
    Supercritical,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PsiLaw {
    pub p: f64,
    pub branch: PsiBranch,
}

impl PsiLaw {
    pub fn new(p: f64) -> Result<Self> {
        if !(p > 0.0 && p.is_finite()) {
            return Err(invalid(format!("psi needs p > 0, got {p}")));
        }
        let branch = if p < 4.0 {
            PsiBranch::Subcritical
        } else if p == 4.0 {
            PsiBranch::Critical
        } else {
            PsiBranch::Supercritical
        };
        Ok(Self { p, branch })
    }

    /// The critical branch needs `N >= 2` so that `log N > 0`; the power
    /// branches are defined for every `N >= 1`.
    pub fn eval(&self, n: u64) -> Result<f64> {
        let min = if self.branch == PsiBranch::Critical {
            2
        } else {
            1
        };
        if n < min {
            return Err(invalid(format!("psi_{} needs N >= {min}, got {n}", self.p)));
        }
        let x = n as f64;
        Ok(match self.branch {
            PsiBranch::Subcritical => x.powf(self.p / 2.0),
            PsiBranch::Critical => x * x * x.ln(),
            PsiBranch::Supercritical => x.powf(self.p - 2.0),
        })
    }
}

pub fn psi(p: f64, n: u64) -> Result<f64> {
    PsiLaw::new(p)?.eval(n)
}

/// Grid on which quadrature of `|D_N|^p` is exact for even `p`:
/// `|D_N|^2` has frequencies in `(-N^2, N^2)`, so `M > (p/2)(N^2 - 1)`.
pub fn gauss_exact_grid_size(n: u64, p: f64) -> u128 {
    let p_even = 2.0 * (p / 2.0).ceil().max(1.0);
    let half = (p_even / 2.0) as u128;
    let need = (half * (n as u128 * n as u128) + 1).max(2 * (n as u128 * n as u128) + 1);
    need.next_power_of_two()
}

/// `int_0^1 |D_N(x)|^p dx`.
///
/// `p = 2` is exactly `N`; `p = 4` uses the exact convolution up to
/// [`CONVOLUTION_MAX_TERMS`]; everything else is grid quadrature, exact for
/// even `p` on a large enough grid and convergence-checked otherwise.
pub fn gauss_sum_lp_power(n: u64, p: f64, grid_size: Option<usize>) -> Result<f64> {
    if !(p > 0.0 && p.is_finite()) {
        return Err(invalid(format!("exponent must be positive, got {p}")));
    }
    let d = gauss_sum_coefficients(n)?;
    if p == 2.0 {
        return Ok(n as f64);
    }
    if p == 4.0 && n <= CONVOLUTION_MAX_TERMS && grid_size.is_none() {
        return l4_fourth_exact(&d);
    }
    let exact = gauss_exact_grid_size(n, p);
    let m = match grid_size {
        Some(m) => {
            if is_even_integer(p) && (m as u128) < exact {
                return Err(invalid(format!(
                    "grid of {m} points is too coarse for exact |D_{n}|^{p} quadrature (need {exact})"
                )));
            }
            m as u128
        }
        None if is_even_integer(p) => exact,
        // |D_N|^p is not band-limited; start well above the smooth-case grid
        None => 4 * exact,
    };
    if m > MAX_GRID_SIZE as u128 {
        return Err(Error::ResourceBudget(format!(
            "|D_{n}|^{p} needs a {m}-point grid (limit {MAX_GRID_SIZE}); \
             use a smaller N or, for p = 4, the convolution path"
        )));
    }
    let m = m as usize;
    if is_even_integer(p) {
        grid_lp_power(&synthesize(&d, m)?, p)
    } else if p >= 1.0 {
        quadrature_power(&d, p, m)
    } else {
        Err(invalid(format!("grid quadrature supports p >= 1, got {p}")))
    }
}

/// Rows `(N, int |D_N|^p / psi_p(N))` for increasing `N`. The spread of the
/// ratios is the empirical stand-in for the constants of the two-sided bound.
pub fn ratio_sweep(p: f64, ns: &[u64]) -> Result<ScalingTable> {
    let law = PsiLaw::new(p)?;
    let rows = ns
        .par_iter()
        .map(|&n| {
            let integral = gauss_sum_lp_power(n, p, None)?;
            Ok(ScalingRow {
                scale: n as f64,
                value: integral / law.eval(n)?,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    ScalingTable::new(Axis::TermCount, Quantity::GaussSumRatio, rows)
}

/// `(min, max)` of the table values.
pub fn bracket(table: &ScalingTable) -> (f64, f64) {
    table
        .rows
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), r| {
            (lo.min(r.value), hi.max(r.value))
        })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn psi_branches() {
        assert_eq!(psi(2.0, 100).unwrap(), 100.0);
        assert!((psi(4.0, 8).unwrap() - 64.0 * 8f64.ln()).abs() < 1e-12);
        assert!((psi(4.0, 8).unwrap() - 133.084).abs() < 1e-3);
        assert_eq!(psi(6.0, 10).unwrap(), 1e4);
        assert!(psi(4.0, 1).is_err());
        assert!(psi(0.0, 10).is_err());
        assert_eq!(psi(2.0, 1).unwrap(), 1.0);
    }

    #[test]
    fn small_integrals() {
        for n in [1, 5, 33] {
            assert_eq!(gauss_sum_lp_power(n, 2.0, None).unwrap(), n as f64);
        }
        assert_eq!(gauss_sum_lp_power(2, 4.0, None).unwrap(), 6.0);
        assert_eq!(gauss_sum_lp_power(3, 4.0, None).unwrap(), 15.0);
        // grid path at p = 4 agrees with the convolution
        let g = gauss_sum_lp_power(3, 4.0, Some(32)).unwrap();
        assert!((g - 15.0).abs() < 1e-12);
        assert!(gauss_sum_lp_power(3, 4.0, Some(8)).is_err());
    }

    #[test]
    fn fourth_moment_monotone_in_n() {
        let vals: Vec<f64> = (1..=256)
            .map(|n| gauss_sum_lp_power(n, 4.0, None).unwrap())
            .collect();
        assert!(vals.windows(2).all(|w| w[1] >= w[0]));
    }

    #[test]
    fn non_integer_p_converges() {
        let v = gauss_sum_lp_power(16, 3.0, None).unwrap();
        let (two, four) = (16.0, gauss_sum_lp_power(16, 4.0, None).unwrap());
        // log-convexity in p
        assert!(v * v <= two * four);
        assert!(v > two);
    }

    #[test]
    fn parseval_ratios_are_one() {
        let t = ratio_sweep(2.0, &[1, 2, 4, 8]).unwrap();
        assert!(t.rows.iter().all(|r| r.value == 1.0));
        assert!(ratio_sweep(4.0, &[1, 2]).is_err());
    }
}
