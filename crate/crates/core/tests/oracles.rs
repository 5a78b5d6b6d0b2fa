use std::f64::consts::PI;

use num_complex::Complex64;
use riemann_intermittency::intermittency::{
    fit_power_law, jaffard_zeta, legendre_spectrum, p_grid, sweep, Axis, Quantity,
};
use riemann_intermittency::norms::{
    grid_lp_power, l2_squared_exact, l4_fourth_exact, structure_function,
};
use riemann_intermittency::series::{
    gauss_sum_coefficients, increment_coefficients, phi_samples, phi_tail_bound,
    riemann_coefficients,
};
use riemann_intermittency::spectral::{
    band_filter, circular_shift, littlewood_paley_blocks, synthesize, BandSpec,
};

fn direct(poly: &riemann_intermittency::TrigPolynomial, m: usize) -> Vec<Complex64> {
    (0..m)
        .map(|j| {
            poly.iter()
                .map(|(n, c)| {
                    let k = (n.rem_euclid(m as i64) as u64 * j as u64) % m as u64;
                    c * Complex64::from_polar(1.0, 2.0 * PI * k as f64 / m as f64)
                })
                .sum()
        })
        .collect()
}

#[test]
fn fast_synthesis_matches_direct_sum() {
    for (k, m) in [(1 << 10, 1 << 12), (5000, 1 << 14)] {
        let r = riemann_coefficients(k).unwrap();
        let fast = synthesize(&r, m).unwrap();
        let slow = direct(&r, m);
        let err = fast
            .samples()
            .iter()
            .zip(&slow)
            .map(|(a, b)| (a - b).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-9, "K = {k}: {err:e}");
    }
}

#[test]
fn l4_convolution_matches_grid() {
    let r = riemann_coefficients(1 << 20).unwrap();
    for n in [16u64, 256, 4096] {
        let hp = band_filter(&r, &BandSpec::high_pass(n));
        let exact = l4_fourth_exact(&hp).unwrap();
        let grid = grid_lp_power(&synthesize(&hp, 1 << 23).unwrap(), 4.0).unwrap();
        assert!(
            (exact - grid).abs() / exact < 1e-9,
            "N = {n}: {exact} vs {grid}"
        );
    }
}

#[test]
fn gauss_fourth_moment_counts_representations() {
    // int |D_N|^4 = #{(a,b,c,d) in [1,N]^4 : a^2 + b^2 = c^2 + d^2}
    for n in 1..=40u64 {
        let mut counts = std::collections::HashMap::new();
        for a in 1..=n {
            for b in 1..=n {
                *counts.entry(a * a + b * b).or_insert(0u64) += 1;
            }
        }
        let want: u64 = counts.values().map(|c| c * c).sum();
        let got = l4_fourth_exact(&gauss_sum_coefficients(n).unwrap()).unwrap();
        assert!((got - want as f64).abs() < 1e-9 * want as f64, "N = {n}");
    }
}

#[test]
fn shift_is_modulation() {
    let r = riemann_coefficients(1 << 12).unwrap();
    let m = 1usize << 14;
    let base = synthesize(&r, m).unwrap();
    for shift in [1i64, 7, 1000, 16383] {
        let modulated = r.map_coefficients(|n, c| {
            let k = (n * shift).rem_euclid(m as i64) as f64;
            c * Complex64::from_polar(1.0, 2.0 * PI * k / m as f64)
        });
        let a = synthesize(&modulated, m).unwrap();
        let b = circular_shift(&base, shift);
        let err = a
            .samples()
            .iter()
            .zip(b.samples())
            .map(|(x, y)| (x - y).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "shift {shift}: {err:e}");
    }
}

#[test]
fn increment_equals_shifted_difference() {
    let r = riemann_coefficients(1 << 12).unwrap();
    let m = 1usize << 14;
    let base = synthesize(&r, m).unwrap();
    // the coefficients give the centred difference f(x + l/2) - f(x - l/2)
    for shift in [2u64, 64, 5462] {
        let ell = shift as f64 / m as f64;
        let centred = synthesize(&increment_coefficients(&r, ell).unwrap(), m).unwrap();
        let inc = circular_shift(&centred, (shift / 2) as i64);
        let moved = circular_shift(&base, shift as i64);
        let err = inc
            .samples()
            .iter()
            .zip(moved.samples().iter().zip(base.samples()))
            .map(|(i, (a, b))| (i - (a - b)).norm())
            .fold(0.0, f64::max);
        assert!(err < 1e-10, "shift {shift}: {err:e}");
    }
}

#[test]
fn structure_function_symmetric_in_ell() {
    let r = riemann_coefficients(1 << 16).unwrap();
    let m = 1u64 << 19;
    for k in 1..12 {
        let ell = 2f64.powi(-k);
        for p in [2.0, 4.0] {
            let a = structure_function(&r, p, ell, m).unwrap().value;
            let b = structure_function(&r, p, 1.0 - ell, m).unwrap().value;
            assert_eq!(a.to_bits(), b.to_bits(), "p = {p}, l = {ell}");
        }
    }
}

#[test]
fn phi_half_within_tail_bound() {
    // e^{pi i k^2} = (-1)^k, so the untruncated value is
    // pi^2/3 - 4 sum_{k odd} 1/k^2 + i pi = -pi^2/6 + i pi.
    let want = Complex64::new(-PI * PI / 6.0, PI);
    for k in [100u64, 10_000, 1_000_000] {
        let got = phi_samples(&[0.5], k).unwrap()[0];
        assert!((got - want).norm() <= phi_tail_bound(k), "K = {k}: {got}");
    }
    let ends = phi_samples(&[0.0, 1.0], 1 << 20).unwrap();
    assert!((ends[0] - Complex64::new(PI * PI / 3.0, 0.0)).norm() < 1e-14);
    assert!((ends[1] - ends[0] - Complex64::new(0.0, 2.0 * PI)).norm() < 1e-12);
}

#[test]
fn littlewood_paley_fourth_power_band() {
    // sum_j ||Delta_j R||_4^4 against ||R_{>=N}||_4^4 for dyadic blocks: the
    // ratio sits in a fixed band across cutoffs (measured 0.37 to 0.49).
    let r = riemann_coefficients(1 << 20).unwrap();
    let mut ratios = Vec::new();
    for k in 4..=12 {
        let hp = band_filter(&r, &BandSpec::high_pass(1 << k));
        let blocks = littlewood_paley_blocks(&hp, 2.0).unwrap();
        let sum: f64 = blocks.iter().map(|b| l4_fourth_exact(b).unwrap()).sum();
        ratios.push(sum / l4_fourth_exact(&hp).unwrap());
    }
    for q in &ratios {
        assert!((0.35..=0.52).contains(q), "{ratios:?}");
    }
}

#[test]
fn cutoff_and_increment_exponents_agree() {
    let r = riemann_coefficients(1 << 20).unwrap();
    let ns: Vec<f64> = (4..=12).map(|k| 2f64.powi(k)).collect();
    let ls: Vec<f64> = (6..=16).map(|k| 2f64.powi(-k)).collect();
    let l2 = sweep(&r, Axis::FilterCutoffN, &ns, Quantity::L2Squared, 0).unwrap();
    let s2 = sweep(&r, Axis::IncrementScaleL, &ls, Quantity::S2, 1 << 23).unwrap();
    let a = fit_power_law(&l2, None).unwrap().exponent;
    let b = fit_power_law(&s2, None).unwrap().exponent;
    assert!((a - b).abs() < 0.1, "{a} vs {b}");
    assert!((a - 1.5).abs() < 0.1);
}

#[test]
fn legendre_spectrum_concave_and_bounded() {
    let grid = p_grid(1.0, 12.0, 0.01).unwrap();
    let alphas: Vec<f64> = (0..=25).map(|i| 0.5 + i as f64 * 0.01).collect();
    let d: Vec<f64> = alphas
        .iter()
        .map(|&a| legendre_spectrum(jaffard_zeta, a, &grid).unwrap())
        .collect();
    assert!(d.iter().all(|&x| x <= 1.0 + 1e-12));
    for w in d.windows(3) {
        assert!(w[1] >= 0.5 * (w[0] + w[2]) - 1e-12);
    }
}

#[test]
fn parseval_tail_closed_form() {
    let r = riemann_coefficients(1 << 20).unwrap();
    let tail = l2_squared_exact(&band_filter(&r, &BandSpec::high_pass(2)));
    assert!((tail - (PI.powi(4) / 90.0 - 1.0)).abs() < 1e-9);
    let s = structure_function(&r, 2.0, 0.5, 1 << 21).unwrap().value;
    assert!((s - PI.powi(4) / 24.0).abs() < 1e-9);
}
