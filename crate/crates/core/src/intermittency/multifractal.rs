use crate::error::{invalid, Result};

/// Structure-function exponents of Riemann's function: `3p/4` for `p <= 4`
/// and `1 + p/2` beyond.
pub fn jaffard_zeta(p: f64) -> f64 {
    if p <= 4.0 {
        0.75 * p
    } else {
        1.0 + 0.5 * p
    }
}

/// `d(alpha) = min_p (alpha p - zeta(p) + 1)` over a finite grid of exponents.
pub fn legendre_spectrum(zeta: impl Fn(f64) -> f64, alpha: f64, p_grid: &[f64]) -> Result<f64> {
    if p_grid.is_empty() {
        return Err(invalid("Legendre transform needs a nonempty p grid"));
    }
    Ok(p_grid
        .iter()
        .map(|&p| alpha * p - zeta(p) + 1.0)
        .fold(f64::INFINITY, f64::min))
}

/// `p_min, p_min + step, ... <= p_max`, with the kink `p = 4` always present
/// when it lies in range.
pub fn p_grid(p_min: f64, p_max: f64, step: f64) -> Result<Vec<f64>> {
    if !(step > 0.0 && p_min <= p_max && p_min.is_finite() && p_max.is_finite()) {
        return Err(invalid(format!(
            "bad p grid [{p_min}, {p_max}] step {step}"
        )));
    }
    let count = ((p_max - p_min) / step + 1e-9).floor() as usize + 1;
    let mut grid: Vec<f64> = (0..count).map(|i| p_min + i as f64 * step).collect();
    if (p_min..=p_max).contains(&4.0) {
        grid.push(4.0);
    }
    grid.sort_by(f64::total_cmp);
    grid.dedup();
    Ok(grid)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zeta_branches() {
        assert_eq!(jaffard_zeta(2.0), 1.5);
        assert_eq!(jaffard_zeta(4.0), 3.0);
        assert!((jaffard_zeta(4.0 + 1e-12) - 3.0).abs() < 1e-11);
        assert_eq!(jaffard_zeta(6.0), 4.0);
    }

    #[test]
    fn spectrum_reference_points() {
        let grid = p_grid(1.0, 12.0, 0.01).unwrap();
        assert!(grid.contains(&4.0));
        let d = |a| legendre_spectrum(jaffard_zeta, a, &grid).unwrap();
        assert!((d(0.75) - 1.0).abs() < 1e-12);
        assert!(d(0.5).abs() < 1e-12);
        assert!((d(0.625) - 0.5).abs() < 1e-12);
    }

    #[test]
    fn kink_attains_the_infimum() {
        let grid = p_grid(1.0, 12.0, 0.01).unwrap();
        let alpha = 0.625;
        let (argmin, _) = grid
            .iter()
            .map(|&p| (p, alpha * p - jaffard_zeta(p) + 1.0))
            .fold(
                (f64::NAN, f64::INFINITY),
                |acc, x| if x.1 < acc.1 { x } else { acc },
            );
        assert_eq!(argmin, 4.0);
    }

    #[test]
    fn grid_always_has_four() {
        // a step that would skip 4
        let g = p_grid(1.0, 8.0, 0.7).unwrap();
        assert!(g.contains(&4.0));
        assert!(g.windows(2).all(|w| w[0] < w[1]));
        assert!(!p_grid(5.0, 8.0, 0.5).unwrap().contains(&4.0));
        assert!(p_grid(1.0, 8.0, 0.0).is_err());
        assert!(legendre_spectrum(jaffard_zeta, 0.6, &[]).is_err());
    }
}
