//! Numerical toolkit for the intermittency of Riemann's non-differentiable
//! function `R(x) = sum_n e^{2 pi i n^2 x} / n^2`.
//!
//! * [`series`] builds the coefficient sequences (Riemann, Gauss sums,
//!   increments, the corner trajectory).
//! * [`spectral`] synthesises them on grids, filters and splits them into
//!   Littlewood-Paley blocks.
//! * [`norms`] computes exact L2/L4 norms and structure functions.
//! * [`intermittency`] evaluates both flatness diagnostics, fits scaling
//!   exponents and evaluates the multifractal formulas.
//! * [`zalcwasser`] measures Gauss-sum norms against their growth law.
//! * [`cli`] drives all of the above from the command line.

pub mod cli;
pub mod error;
pub mod intermittency;
pub mod norms;
pub mod series;
pub mod spectral;
pub mod sum;
pub mod zalcwasser;

pub use error::{Error, Result};
pub use series::{SeriesKind, SeriesSpec, TrigPolynomial};
