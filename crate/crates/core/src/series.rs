//! Coefficient sequences of Riemann's function, quadratic Gauss sums,
//! increments and the corner trajectory, stored as sparse trigonometric
//! polynomials.

use std::collections::BTreeMap;
use std::f64::consts::PI;

use num_complex::Complex64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Result};
use crate::sum::NeumaierSum;

/// Finite Fourier series `sum_n c_n e^{2 pi i n x}`.
///
/// Coefficients are kept in a frequency-ordered map. Exact zeros are never
/// stored, so `len()` is the support size.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct TrigPolynomial {
    coeffs: BTreeMap<i64, Complex64>,
}

impl TrigPolynomial {
    pub fn new() -> Self {
        Self::default()
    }

    /// Builds a polynomial from `(frequency, coefficient)` pairs. Repeated
    /// frequencies are summed; exact zeros are dropped.
    pub fn from_terms<I: IntoIterator<Item = (i64, Complex64)>>(terms: I) -> Self {
        let mut coeffs = BTreeMap::new();
        for (n, c) in terms {
            *coeffs.entry(n).or_insert(Complex64::new(0.0, 0.0)) += c;
        }
        coeffs.retain(|_, c: &mut Complex64| !is_exact_zero(*c));
        Self { coeffs }
    }

    pub fn from_real_terms<I: IntoIterator<Item = (i64, f64)>>(terms: I) -> Self {
        Self::from_terms(terms.into_iter().map(|(n, c)| (n, Complex64::new(c, 0.0))))
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    /// Largest `|n|` over the support; zero for the empty polynomial.
    pub fn max_freq(&self) -> u64 {
        self.coeffs
            .keys()
            .map(|n| n.unsigned_abs())
            .max()
            .unwrap_or(0)
    }

    pub fn min_frequency(&self) -> Option<i64> {
        self.coeffs.keys().next().copied()
    }

    pub fn max_frequency(&self) -> Option<i64> {
        self.coeffs.keys().next_back().copied()
    }

    pub fn has_nonnegative_support(&self) -> bool {
        self.min_frequency().is_none_or(|n| n >= 0)
    }

    pub fn coefficient(&self, n: i64) -> Complex64 {
        self.coeffs
            .get(&n)
            .copied()
            .unwrap_or(Complex64::new(0.0, 0.0))
    }

    /// Iterates `(frequency, coefficient)` in increasing frequency order.
    pub fn iter(&self) -> impl DoubleEndedIterator<Item = (i64, Complex64)> + '_ {
        self.coeffs.iter().map(|(n, c)| (*n, *c))
    }

    pub fn terms(&self) -> Vec<(i64, Complex64)> {
        self.iter().collect()
    }

    /// Keeps the terms whose frequency satisfies `keep`.
    pub fn filter_frequencies(&self, mut keep: impl FnMut(i64) -> bool) -> Self {
        Self {
            coeffs: self
                .coeffs
                .iter()
                .filter(|(n, _)| keep(**n))
                .map(|(n, c)| (*n, *c))
                .collect(),
        }
    }

    pub fn scaled(&self, factor: Complex64) -> Self {
        Self::from_terms(self.iter().map(|(n, c)| (n, c * factor)))
    }

    /// Coefficient-wise sum.
    pub fn add(&self, other: &TrigPolynomial) -> Self {
        Self::from_terms(self.iter().chain(other.iter()))
    }

    /// Coefficient-wise transform; results that are exactly zero are dropped.
    pub fn map_coefficients(&self, mut f: impl FnMut(i64, Complex64) -> Complex64) -> Self {
        Self::from_terms(self.iter().map(|(n, c)| (n, f(n, c))))
    }
}

fn is_exact_zero(c: Complex64) -> bool {
    c.re == 0.0 && c.im == 0.0
}

/// Coefficients of Riemann's function, `c_k = 1/k` for perfect squares
/// `k <= k_max`.
pub fn riemann_coefficients(k_max: u64) -> Result<TrigPolynomial> {
    if k_max == 0 {
        return Err(invalid("riemann_coefficients requires k_max >= 1"));
    }
    let roots = isqrt(k_max);
    Ok(TrigPolynomial::from_real_terms((1..=roots).map(|n| {
        let k = n * n;
        (k as i64, 1.0 / k as f64)
    })))
}

/// Coefficients of the quadratic Gauss sum `D_N(x) = sum_{m<=N} e^{2 pi i m^2 x}`.
pub fn gauss_sum_coefficients(terms: u64) -> Result<TrigPolynomial> {
    if terms == 0 {
        return Err(invalid("gauss_sum_coefficients requires N >= 1"));
    }
    Ok(TrigPolynomial::from_real_terms(
        (1..=terms).map(|m| ((m * m) as i64, 1.0)),
    ))
}

/// Symmetric increment `f(x + l/2) - f(x - l/2)`, i.e. coefficients
/// multiplied by `2i sin(pi k l)`.
pub fn increment_coefficients(base: &TrigPolynomial, ell: f64) -> Result<TrigPolynomial> {
    if !(ell > 0.0 && ell < 1.0) {
        return Err(invalid(format!(
            "increment scale must lie in (0,1), got {ell}"
        )));
    }
    check_nonnegative(base, "increment_coefficients")?;
    Ok(base.map_coefficients(|k, c| c * Complex64::new(0.0, 2.0 * sin_pi_real(k, ell))))
}

/// Increment at the grid fraction `m / grid_size`. The sine is evaluated from
/// `k*m mod 2M` in integer arithmetic, so `m` and `M - m` give coefficients of
/// bitwise identical modulus.
pub(crate) fn increment_on_grid(
    base: &TrigPolynomial,
    m: u64,
    grid_size: u64,
) -> Result<TrigPolynomial> {
    if m == 0 || m >= grid_size {
        return Err(invalid(format!(
            "grid shift {m}/{grid_size} does not lie strictly inside (0,1)"
        )));
    }
    check_nonnegative(base, "increment_on_grid")?;
    Ok(base.map_coefficients(|k, c| {
        c * Complex64::new(0.0, 2.0 * sin_pi_fraction(k as u64, m, grid_size))
    }))
}

fn check_nonnegative(base: &TrigPolynomial, op: &str) -> Result<()> {
    if base.has_nonnegative_support() {
        Ok(())
    } else {
        Err(invalid(format!(
            "{op} needs a polynomial with nonnegative frequencies"
        )))
    }
}

/// `sin(pi * k * ell)` with reduction of `k*ell` modulo 2 and folding onto
/// `[0, 1/2]` before calling `sin`.
fn sin_pi_real(k: i64, ell: f64) -> f64 {
    let t = (k as f64 * ell).rem_euclid(2.0);
    let (sign, r) = if t < 1.0 { (1.0, t) } else { (-1.0, t - 1.0) };
    let folded = r.min(1.0 - r);
    sign * (PI * folded).sin()
}

/// `sin(pi * k * m / M)` computed from `k*m mod 2M`.
fn sin_pi_fraction(k: u64, m: u64, grid_size: u64) -> f64 {
    let two_m = 2 * grid_size as u128;
    let q = ((k as u128) * (m as u128) % two_m) as u64;
    let (sign, r) = if q < grid_size {
        (1.0, q)
    } else {
        (-1.0, q - grid_size)
    };
    let folded = r.min(grid_size - r);
    if folded == 0 {
        return 0.0;
    }
    sign * (PI * folded as f64 / grid_size as f64).sin()
}

/// Samples of the corner trajectory
/// `phi(t) = 2 pi i t + 2 sum_{k^2 <= K} (e^{2 pi i k^2 t} - 1)/k^2 + pi^2/3`.
pub fn phi_samples(t_grid: &[f64], k_max: u64) -> Result<Vec<Complex64>> {
    if k_max == 0 {
        return Err(invalid("phi_samples requires k_max >= 1"));
    }
    let roots = isqrt(k_max);
    Ok(t_grid.par_iter().map(|&t| phi_at(t, roots)).collect())
}

fn phi_at(t: f64, roots: u64) -> Complex64 {
    let mut re = NeumaierSum::new();
    let mut im = NeumaierSum::new();
    for k in 1..=roots {
        let k2 = (k * k) as f64;
        let frac = (k2 * t).rem_euclid(1.0);
        let (s, c) = (2.0 * PI * frac).sin_cos();
        re.add((c - 1.0) / k2);
        im.add(s / k2);
    }
    Complex64::new(
        2.0 * re.value() + PI * PI / 3.0,
        2.0 * PI * t + 2.0 * im.value(),
    )
}

/// Uniform bound on the truncation error of [`phi_samples`]:
/// `sum_{k > s} |2(e^{i theta} - 1)/k^2| <= 4/s` with `s = floor(sqrt(K))`.
pub fn phi_tail_bound(k_max: u64) -> f64 {
    4.0 / isqrt(k_max.max(1)) as f64
}

/// Bound on `sum_{n > s} n^{-4}` with `s = floor(sqrt(K))`, the squared L2
/// mass Riemann's function loses when truncated at frequency `K`.
pub fn riemann_l2_tail_bound(k_max: u64) -> f64 {
    let s = isqrt(k_max.max(1)) as f64;
    1.0 / (3.0 * s * s * s)
}

pub(crate) fn isqrt(n: u64) -> u64 {
    let mut r = (n as f64).sqrt() as u64;
    while r * r > n {
        r -= 1;
    }
    while (r + 1) * (r + 1) <= n {
        r += 1;
    }
    r
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SeriesKind {
    RiemannR,
    GaussSumD,
    IncrementI,
    TrajectoryPhi,
}

/// Which series to build and where to truncate it.
///
/// `truncation` is the frequency cutoff for Riemann, increment and trajectory
/// series and the number of terms for Gauss sums.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SeriesSpec {
    pub kind: SeriesKind,
    pub truncation: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shift: Option<f64>,
}

impl SeriesSpec {
    pub fn new(kind: SeriesKind, truncation: u64, shift: Option<f64>) -> Result<Self> {
        let spec = Self {
            kind,
            truncation,
            shift,
        };
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.truncation == 0 {
            return Err(invalid("series truncation must be >= 1"));
        }
        match (self.kind, self.shift) {
            (SeriesKind::IncrementI, None) => Err(invalid("increment series needs a shift")),
            (SeriesKind::IncrementI, Some(l)) if !(l > 0.0 && l < 1.0) => Err(invalid(format!(
                "increment shift must lie in (0,1), got {l}"
            ))),
            (SeriesKind::IncrementI, Some(_)) => Ok(()),
            (_, Some(_)) => Err(invalid("shift is only meaningful for the increment series")),
            _ => Ok(()),
        }
    }

    /// Coefficients of the series. The trajectory is not a trigonometric
    /// polynomial (it carries a linear drift) and is rejected here.
    pub fn build(&self) -> Result<TrigPolynomial> {
        self.validate()?;
        match self.kind {
            SeriesKind::RiemannR => riemann_coefficients(self.truncation),
            SeriesKind::GaussSumD => gauss_sum_coefficients(self.truncation),
            SeriesKind::IncrementI => {
                let base = riemann_coefficients(self.truncation)?;
                increment_coefficients(&base, self.shift.unwrap_or_default())
            }
            SeriesKind::TrajectoryPhi => Err(invalid(
                "the trajectory series has no finite coefficient representation; use phi_samples",
            )),
        }
    }

    /// Bound on the squared L2 norm of the discarded tail.
    pub fn l2_tail_bound(&self) -> f64 {
        match self.kind {
            SeriesKind::RiemannR => riemann_l2_tail_bound(self.truncation),
            SeriesKind::IncrementI => 4.0 * riemann_l2_tail_bound(self.truncation),
            SeriesKind::GaussSumD => 0.0,
            SeriesKind::TrajectoryPhi => phi_tail_bound(self.truncation).powi(2),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn riemann_small_cutoffs() {
        let p = riemann_coefficients(4).unwrap();
        assert_eq!(p.terms(), vec![(1, c(1.0, 0.0)), (4, c(0.25, 0.0))]);
        let p = riemann_coefficients(10).unwrap();
        assert_eq!(p.len(), 3);
        assert_eq!(p.coefficient(9), c(1.0 / 9.0, 0.0));
        assert_eq!(p.max_freq(), 9);
        assert_eq!(riemann_coefficients(1_000_000).unwrap().len(), 1000);
        assert!(riemann_coefficients(0).is_err());
    }

    #[test]
    fn gauss_small_sums() {
        assert_eq!(
            gauss_sum_coefficients(1).unwrap().terms(),
            vec![(1, c(1.0, 0.0))]
        );
        let d3 = gauss_sum_coefficients(3).unwrap();
        assert_eq!(d3.len(), 3);
        assert_eq!(d3.max_freq(), 9);
        assert!(d3.iter().all(|(_, v)| v == c(1.0, 0.0)));
        assert!(gauss_sum_coefficients(0).is_err());
    }

    #[test]
    fn increment_single_mode_and_zero_drop() {
        let base = TrigPolynomial::from_real_terms([(1, 1.0)]);
        let inc = increment_coefficients(&base, 0.5).unwrap();
        assert_eq!(inc.terms(), vec![(1, c(0.0, 2.0))]);

        let inc = increment_coefficients(&riemann_coefficients(4).unwrap(), 0.5).unwrap();
        assert_eq!(inc.terms(), vec![(1, c(0.0, 2.0))]);
    }

    #[test]
    fn increment_rejects_bad_shift() {
        let base = riemann_coefficients(16).unwrap();
        for l in [0.0, 1.0, -0.1, 1.5, f64::NAN] {
            assert!(increment_coefficients(&base, l).is_err());
        }
        let neg = TrigPolynomial::from_real_terms([(-1, 1.0)]);
        assert!(increment_coefficients(&neg, 0.25).is_err());
    }

    #[test]
    fn grid_increment_is_symmetric_bitwise() {
        let base = riemann_coefficients(1 << 12).unwrap();
        let m = 1 << 10;
        let a = increment_on_grid(&base, 37, m).unwrap();
        let b = increment_on_grid(&base, m - 37, m).unwrap();
        assert_eq!(a.len(), b.len());
        for ((n1, c1), (n2, c2)) in a.iter().zip(b.iter()) {
            assert_eq!(n1, n2);
            assert_eq!(c1.norm_sqr(), c2.norm_sqr());
        }
    }

    #[test]
    fn grid_and_real_increments_agree() {
        let base = riemann_coefficients(1 << 14).unwrap();
        let a = increment_on_grid(&base, 3, 1 << 8).unwrap();
        let b = increment_coefficients(&base, 3.0 / 256.0).unwrap();
        for ((_, x), (_, y)) in a.iter().zip(b.iter()) {
            assert!((x - y).norm() <= 1e-15);
        }
    }

    #[test]
    fn phi_endpoints() {
        let v = phi_samples(&[0.0, 1.0], 100).unwrap();
        assert_eq!(v[0], c(PI * PI / 3.0, 0.0));
        assert_eq!(v[1] - v[0], c(0.0, 2.0 * PI));
        assert!(phi_samples(&[], 10).unwrap().is_empty());
    }

    #[test]
    fn phi_quarter_matches_rational_oracle() {
        // e^{2 pi i k^2 / 4} is 1 for even k and i for odd k, so
        // phi(1/4) = i pi/2 + 2 (i - 1) sum_{k odd <= 9} 1/k^2 + pi^2/3.
        // 99225 = 81 * 25 * 49 is a common denominator of the odd sum.
        let num: u64 = [1u64, 9, 25, 49, 81].iter().map(|d| 99_225 / d).sum();
        let odd = num as f64 / 99_225.0;
        let expected = c(PI * PI / 3.0 - 2.0 * odd, PI / 2.0 + 2.0 * odd);
        let got = phi_samples(&[0.25], 100).unwrap()[0];
        assert!((got - expected).norm() < 1e-14, "{got} vs {expected}");
    }

    #[test]
    fn series_spec_validation() {
        assert!(SeriesSpec::new(SeriesKind::RiemannR, 0, None).is_err());
        assert!(SeriesSpec::new(SeriesKind::IncrementI, 16, None).is_err());
        assert!(SeriesSpec::new(SeriesKind::RiemannR, 16, Some(0.5)).is_err());
        let inc = SeriesSpec::new(SeriesKind::IncrementI, 16, Some(0.5)).unwrap();
        assert_eq!(inc.build().unwrap().len(), 2);
        assert!(SeriesSpec::new(SeriesKind::TrajectoryPhi, 16, None)
            .unwrap()
            .build()
            .is_err());
    }

    #[test]
    fn isqrt_exact_on_squares() {
        for n in [1u64, 2, 3, 4, 15, 16, 17, 1 << 40, (1 << 40) - 1] {
            let r = isqrt(n);
            assert!(r * r <= n && (r + 1) * (r + 1) > n);
        }
    }
}
