//! Grid synthesis, exact coefficient filters and Littlewood-Paley blocks.

use num_complex::Complex64;
use rustfft::FftPlanner;
use serde::{Deserialize, Serialize};

use crate::error::{invalid, Error, Result};
use crate::series::TrigPolynomial;

/// Largest grid any routine will allocate (2^24 complex samples, 256 MiB).
pub const MAX_GRID_SIZE: usize = 1 << 24;

/// Samples `f(j/M)` for `j = 0..M` on a power-of-two grid.
#[derive(Debug, Clone, PartialEq)]
pub struct GridSignal {
    samples: Vec<Complex64>,
}

impl GridSignal {
    pub fn new(samples: Vec<Complex64>) -> Result<Self> {
        let m = samples.len();
        if m < 2 || !m.is_power_of_two() {
            return Err(invalid(format!(
                "grid size must be a power of two >= 2, got {m}"
            )));
        }
        Ok(Self { samples })
    }

    pub fn grid_size(&self) -> usize {
        self.samples.len()
    }

    pub fn samples(&self) -> &[Complex64] {
        &self.samples
    }

    pub fn into_samples(self) -> Vec<Complex64> {
        self.samples
    }
}

/// Evaluates `poly` at `x_j = j/M` by scattering its coefficients into a
/// length-`M` spectrum and running an inverse FFT.
pub fn synthesize(poly: &TrigPolynomial, grid_size: usize) -> Result<GridSignal> {
    if grid_size < 2 || !grid_size.is_power_of_two() {
        return Err(invalid(format!(
            "grid size must be a power of two >= 2, got {grid_size}"
        )));
    }
    let max_freq = poly.max_freq();
    if grid_size as u128 <= 2 * max_freq as u128 {
        return Err(Error::Aliasing {
            max_freq,
            grid_size,
        });
    }
    if grid_size > MAX_GRID_SIZE {
        return Err(Error::ResourceBudget(format!(
            "grid of {grid_size} samples exceeds the limit of {MAX_GRID_SIZE}"
        )));
    }
    let m = grid_size as i64;
    let mut buf = vec![Complex64::new(0.0, 0.0); grid_size];
    for (n, c) in poly.iter() {
        buf[n.rem_euclid(m) as usize] += c;
    }
    // rustfft's inverse transform is unnormalised: x_j = sum_k X_k e^{+2 pi i jk/M}
    let fft = FftPlanner::new().plan_fft_inverse(grid_size);
    fft.process(&mut buf);
    Ok(GridSignal { samples: buf })
}

/// Rotates the samples so that `out[j] = in[(j + m) mod M]`, the exact grid
/// realisation of `x -> x + m/M`.
pub fn circular_shift(signal: &GridSignal, m: i64) -> GridSignal {
    let len = signal.grid_size();
    let shift = m.rem_euclid(len as i64) as usize;
    let mut samples = signal.samples.clone();
    samples.rotate_left(shift);
    GridSignal { samples }
}

/// Selection of frequency moduli `|n|`. `hi = None` means unbounded.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BandSpec {
    pub lo: u64,
    pub hi: Option<u64>,
    pub lo_inclusive: bool,
    pub hi_inclusive: bool,
}

impl BandSpec {
    pub fn new(lo: u64, hi: Option<u64>, lo_inclusive: bool, hi_inclusive: bool) -> Result<Self> {
        let band = Self {
            lo,
            hi,
            lo_inclusive,
            hi_inclusive,
        };
        if band.is_empty() {
            return Err(invalid(format!("empty frequency band {band:?}")));
        }
        Ok(band)
    }

    /// `|n| >= cutoff`
    pub fn high_pass(cutoff: u64) -> Self {
        Self {
            lo: cutoff,
            hi: None,
            lo_inclusive: true,
            hi_inclusive: false,
        }
    }

    /// `|n| > cutoff`
    pub fn high_pass_strict(cutoff: u64) -> Self {
        Self {
            lo: cutoff,
            hi: None,
            lo_inclusive: false,
            hi_inclusive: false,
        }
    }

    /// `|n| <= cutoff`
    pub fn low_pass(cutoff: u64) -> Self {
        Self {
            lo: 0,
            hi: Some(cutoff),
            lo_inclusive: true,
            hi_inclusive: true,
        }
    }

    /// `|n| < cutoff`; empty when `cutoff == 0`.
    pub fn low_pass_strict(cutoff: u64) -> Result<Self> {
        Self::new(0, Some(cutoff), true, false)
    }

    /// Half-open `[lo, hi)`.
    pub fn half_open(lo: u64, hi: u64) -> Result<Self> {
        Self::new(lo, Some(hi), true, false)
    }

    fn is_empty(&self) -> bool {
        let first = if self.lo_inclusive {
            Some(self.lo)
        } else {
            self.lo.checked_add(1)
        };
        let Some(first) = first else { return true };
        match self.hi {
            None => false,
            Some(hi) => {
                if self.hi_inclusive {
                    first > hi
                } else {
                    first >= hi
                }
            }
        }
    }

    pub fn contains(&self, modulus: u64) -> bool {
        let above = if self.lo_inclusive {
            modulus >= self.lo
        } else {
            modulus > self.lo
        };
        let below = match self.hi {
            None => true,
            Some(hi) if self.hi_inclusive => modulus <= hi,
            Some(hi) => modulus < hi,
        };
        above && below
    }
}

/// Keeps exactly the coefficients with `|n|` in `band`.
pub fn band_filter(poly: &TrigPolynomial, band: &BandSpec) -> TrigPolynomial {
    poly.filter_frequencies(|n| band.contains(n.unsigned_abs()))
}

/// Littlewood-Paley partition with base `A`: block 0 is `[0, A)`, block
/// `j >= 1` is `[A^j, A^{j+1})`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockPlan {
    pub base: f64,
    pub blocks: Vec<BlockRange>,
}

/// Real frequency range `[lower, upper)` of one block.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BlockRange {
    pub index: usize,
    pub lower: f64,
    pub upper: f64,
}

impl BlockRange {
    /// Integer band equivalent of this block.
    pub fn band(&self) -> BandSpec {
        let lo = self.lower.ceil() as u64;
        let hi = self.upper.ceil() as u64;
        BandSpec {
            lo,
            hi: Some(hi),
            lo_inclusive: true,
            hi_inclusive: false,
        }
    }
}

impl BlockPlan {
    /// Blocks needed to cover `[0, max_freq]`.
    pub fn new(base: f64, max_freq: u64) -> Result<Self> {
        check_base(base)?;
        let last = block_index(base, max_freq.max(1));
        let blocks = (0..=last)
            .map(|j| BlockRange {
                index: j,
                lower: if j == 0 { 0.0 } else { base.powi(j as i32) },
                upper: base.powi(j as i32 + 1),
            })
            .collect();
        Ok(Self { base, blocks })
    }
}

fn check_base(base: f64) -> Result<()> {
    if base > 1.0 && base.is_finite() {
        Ok(())
    } else {
        Err(invalid(format!(
            "Littlewood-Paley base must exceed 1, got {base}"
        )))
    }
}

/// Index `j` with `A^j <= n < A^{j+1}` (0 for `n < A`).
pub fn block_index(base: f64, modulus: u64) -> usize {
    let n = modulus as f64;
    if n < base {
        return 0;
    }
    let mut j = (n.ln() / base.ln()).floor().max(0.0) as i32;
    while j > 0 && base.powi(j) > n {
        j -= 1;
    }
    while base.powi(j + 1) <= n {
        j += 1;
    }
    j as usize
}

/// Splits `poly` into its Littlewood-Paley blocks. The returned vector has one
/// entry per block of [`BlockPlan::new`], empty blocks included, and the
/// blocks sum back to `poly` exactly.
pub fn littlewood_paley_blocks(poly: &TrigPolynomial, base: f64) -> Result<Vec<TrigPolynomial>> {
    check_base(base)?;
    if !poly.has_nonnegative_support() {
        return Err(invalid(
            "Littlewood-Paley blocks need a polynomial with nonnegative frequencies",
        ));
    }
    let plan = BlockPlan::new(base, poly.max_freq())?;
    let mut parts: Vec<Vec<(i64, Complex64)>> = vec![Vec::new(); plan.blocks.len()];
    for (n, c) in poly.iter() {
        parts[block_index(base, n as u64)].push((n, c));
    }
    Ok(parts.into_iter().map(TrigPolynomial::from_terms).collect())
}
