use num_complex::Complex64;
use proptest::prelude::*;
use riemann_intermittency::norms::{
    grid_lp_power, l2_squared_exact, l4_fourth_exact, lp_norm_grid,
};
use riemann_intermittency::spectral::{
    band_filter, circular_shift, littlewood_paley_blocks, synthesize, BandSpec,
};
use riemann_intermittency::TrigPolynomial;

const M: usize = 1 << 10;

fn poly_strategy(nonnegative: bool) -> impl Strategy<Value = TrigPolynomial> {
    let lo = if nonnegative { 0 } else { -200 };
    prop::collection::vec((lo..=200i64, -1.0..1.0f64, -1.0..1.0f64), 1..40)
        .prop_map(|terms| {
            TrigPolynomial::from_terms(
                terms
                    .into_iter()
                    .map(|(n, re, im)| (n, Complex64::new(re, im))),
            )
        })
        .prop_filter("nonzero", |p| !p.is_empty())
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1e-300)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn filters_are_complementary(p in poly_strategy(false), n in 1u64..300) {
        let lo = band_filter(&p, &BandSpec::low_pass_strict(n).unwrap());
        let hi = band_filter(&p, &BandSpec::high_pass(n));
        prop_assert_eq!(lo.add(&hi), p.clone());
        prop_assert_eq!(lo.len() + hi.len(), p.len());
    }

    #[test]
    fn blocks_partition(p in poly_strategy(true), base in 1.5f64..5.0) {
        let blocks = littlewood_paley_blocks(&p, base).unwrap();
        let total: usize = blocks.iter().map(|b| b.len()).sum();
        prop_assert_eq!(total, p.len());
        let sum = blocks.iter().fold(TrigPolynomial::default(), |acc, b| acc.add(b));
        prop_assert_eq!(sum, p);
    }

    #[test]
    fn parseval_on_grid(p in poly_strategy(false)) {
        let grid = grid_lp_power(&synthesize(&p, M).unwrap(), 2.0).unwrap();
        prop_assert!(close(grid, l2_squared_exact(&p), 1e-12));
    }

    #[test]
    fn fourth_power_on_grid(p in poly_strategy(false)) {
        let grid = grid_lp_power(&synthesize(&p, M * 2).unwrap(), 4.0).unwrap();
        prop_assert!(close(grid, l4_fourth_exact(&p).unwrap(), 1e-10));
    }

    #[test]
    fn shift_preserves_norms(p in poly_strategy(false), m in -2000i64..2000, q in 1.0f64..8.0) {
        let s = synthesize(&p, M).unwrap();
        let a = lp_norm_grid(&s, q).unwrap();
        let b = lp_norm_grid(&circular_shift(&s, m), q).unwrap();
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn holder_ordering(p in poly_strategy(false), q1 in 1.0f64..6.0, dq in 0.1f64..6.0) {
        let s = synthesize(&p, M).unwrap();
        let a = lp_norm_grid(&s, q1).unwrap();
        let b = lp_norm_grid(&s, q1 + dq).unwrap();
        prop_assert!(a <= b * (1.0 + 1e-12));
    }

    #[test]
    fn homogeneity(p in poly_strategy(false), re in -3.0f64..3.0, im in -3.0f64..3.0, q in 1.0f64..8.0) {
        let c = Complex64::new(re, im);
        prop_assume!(c.norm() > 1e-6);
        let a = lp_norm_grid(&synthesize(&p.scaled(c), M).unwrap(), q).unwrap();
        let b = c.norm() * lp_norm_grid(&synthesize(&p, M).unwrap(), q).unwrap();
        prop_assert!(close(a, b, 1e-12));
    }

    #[test]
    fn triangle_inequality(f in poly_strategy(false), g in poly_strategy(false), q in 1.0f64..8.0) {
        let sum = lp_norm_grid(&synthesize(&f.add(&g), M).unwrap(), q).unwrap();
        let parts = lp_norm_grid(&synthesize(&f, M).unwrap(), q).unwrap()
            + lp_norm_grid(&synthesize(&g, M).unwrap(), q).unwrap();
        prop_assert!(sum <= parts * (1.0 + 1e-12));
    }
}
