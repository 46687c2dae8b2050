use std::f64::consts::PI;

use proptest::prelude::*;

use evospec_core::evospec::GridEstimator;
use evospec_core::simulate::{model_catalog, simulate, ModelId};
use evospec_core::specialfn::{chi2_quantile, digamma, trigamma, QuantileQuery};
use evospec_core::stattest::{anova, psr_test, rs_test, LogSpectraTable};
use evospec_core::taper::{compute_dpss, TaperSpec};
use evospec_core::tradeoff::{characteristic_width, Tradeoff};

fn table(max_rows: usize, max_cols: usize) -> impl Strategy<Value = Vec<Vec<f64>>> {
    (2..=max_rows, 2..=max_cols)
        .prop_flat_map(|(i, j)| prop::collection::vec(prop::collection::vec(-5.0..5.0f64, j), i))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn anova_sums_decompose_total(values in table(10, 8)) {
        let t = LogSpectraTable::from_values(values.clone(), 5).unwrap();
        let p = anova(&t);
        let total: f64 = values.iter().flatten().map(|v| (v - p.grand_mean).powi(2)).sum();
        prop_assert!((total - p.s_t - p.s_f - p.s_ir).abs() < 1e-9 * total.max(1.0));
        prop_assert!(p.s_t >= 0.0 && p.s_f >= 0.0 && p.s_ir >= 0.0);
    }

    #[test]
    fn interaction_ignores_additive_effects(
        values in table(8, 6),
        shifts in prop::collection::vec(-3.0..3.0f64, 16),
    ) {
        let (ni, nj) = (values.len(), values[0].len());
        let shifted: Vec<Vec<f64>> = (0..ni)
            .map(|i| (0..nj).map(|j| values[i][j] + shifts[i] + shifts[8 + j]).collect())
            .collect();
        let a = anova(&LogSpectraTable::from_values(values, 5).unwrap());
        let b = anova(&LogSpectraTable::from_values(shifted, 5).unwrap());
        prop_assert!((a.s_ir - b.s_ir).abs() < 1e-9 * a.s_ir.max(1.0));
    }

    #[test]
    fn rank_test_ignores_monotone_column_maps(values in table(9, 6), powers in prop::collection::vec(-20i32..20, 6)) {
        // power-of-two scaling is exact, so no ties are created or broken
        let mapped: Vec<Vec<f64>> = values
            .iter()
            .map(|row| row.iter().zip(&powers).map(|(v, &e)| v * 2f64.powi(e)).collect())
            .collect();
        let a = rs_test(&LogSpectraTable::from_values(values, 5).unwrap(), 0.05).unwrap();
        let b = rs_test(&LogSpectraTable::from_values(mapped, 5).unwrap(), 0.05).unwrap();
        prop_assert_eq!(a.t_r, b.t_r);
    }

    #[test]
    fn row_permutation_preserves_statistics(values in table(9, 6), rot in 1usize..8) {
        let mut perm = values.clone();
        let r = rot % perm.len();
        perm.rotate_left(r);
        let a = LogSpectraTable::from_values(values, 5).unwrap();
        let b = LogSpectraTable::from_values(perm, 5).unwrap();
        let (pa, pb) = (psr_test(&a, 0.05).unwrap(), psr_test(&b, 0.05).unwrap());
        prop_assert!((pa.s_t - pb.s_t).abs() < 1e-9 && (pa.s_ir - pb.s_ir).abs() < 1e-9);
        prop_assert!((rs_test(&a, 0.05).unwrap().t_r - rs_test(&b, 0.05).unwrap().t_r).abs() < 1e-9);
    }

    #[test]
    fn rejection_is_monotone_in_alpha(values in table(9, 6), a1 in 0.001..0.5f64, gap in 0.0..0.4f64) {
        let t = LogSpectraTable::from_values(values, 5).unwrap();
        let a2 = a1 + gap;
        if psr_test(&t, a1).unwrap().decision.rejects_stationarity() {
            prop_assert!(psr_test(&t, a2).unwrap().decision.rejects_stationarity());
        }
        if rs_test(&t, a1).unwrap().decision.rejects_stationarity() {
            prop_assert!(rs_test(&t, a2).unwrap().decision.rejects_stationarity());
        }
    }

    #[test]
    fn rank_statistic_is_bounded(values in table(9, 6)) {
        let (ni, nj) = (values.len() as f64, values[0].len() as f64);
        let r = rs_test(&LogSpectraTable::from_values(values, 5).unwrap(), 0.05).unwrap();
        // all columns in identical order attains the maximum J(I−1)
        prop_assert!(r.t_r >= 0.0 && r.t_r <= nj * (ni - 1.0) + 1e-9);
    }

    #[test]
    fn quantile_monotone_in_p_and_df(p in 0.01..0.98f64, dp in 0.001..0.01f64, df in 1u32..150) {
        let q = |p, df| chi2_quantile(QuantileQuery::new(p, df).unwrap()).unwrap();
        prop_assert!(q(p + dp, df) > q(p, df));
        prop_assert!(q(p, df + 1) > q(p, df));
    }

    #[test]
    fn polygamma_recurrences(x in 0.05..200.0f64) {
        prop_assert!((digamma(x + 1.0).unwrap() - digamma(x).unwrap() - 1.0 / x).abs() < 1e-10 * (1.0 / x).max(1.0));
        prop_assert!((trigamma(x).unwrap() - trigamma(x + 1.0).unwrap() - 1.0 / (x * x)).abs() < 1e-10 * (1.0 / (x * x)).max(1.0));
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn tapers_are_orthonormal_and_ordered(half in 2usize..50, shannon in 2usize..6, k_frac in 0.2..1.0f64) {
        let n = 2 * half + 1;
        prop_assume!(shannon * 2 < n);
        let w = shannon as f64 * PI / n as f64;
        let k = ((shannon as f64 * k_frac).ceil() as usize).max(1);
        let ts = compute_dpss(TaperSpec::new(n, w, k).unwrap());
        for a in 0..k {
            for b in 0..=a {
                let dot = 2.0 * PI * ts.taper(a).iter().zip(ts.taper(b)).map(|(x, y)| x * y).sum::<f64>();
                let target = if a == b { 1.0 } else { 0.0 };
                prop_assert!((dot - target).abs() < 1e-9, "N={} k=({},{}) dot={}", n, a, b, dot);
            }
        }
        let ev = ts.eigenvalues();
        prop_assert!(ev.iter().all(|&l| l > 0.0 && l < 1.0 + 1e-12));
        prop_assert!(ev.windows(2).all(|p| p[0] >= p[1]));
    }

    #[test]
    fn estimates_scale_quadratically(seed in 0u64..1000, c in 0.1..20.0f64) {
        let est = GridEstimator::new(256, 5, None, 0.7).unwrap();
        let x = simulate(&model_catalog(ModelId::D), 256, seed).unwrap();
        let base = est.estimate(&x).unwrap();
        let scaled = est.estimate(&x.scaled(c).unwrap()).unwrap();
        for (a, b) in base.values().iter().flatten().zip(scaled.values().iter().flatten()) {
            prop_assert!(*a >= 0.0);
            prop_assert!((b - c * c * a).abs() <= 1e-9 * c * c * a.max(1e-300));
        }
    }

    #[test]
    fn full_surrogate_dominates_reduced(half in 3usize..30, k_frac in 0.0..1.0f64) {
        let n = 2 * half + 1;
        let t = Tradeoff::new(Some(characteristic_width(200.0).unwrap())).unwrap();
        let k = 2 + ((n - 3) as f64 * k_frac) as usize;
        let p = t.point(n, k, 0.0).unwrap();
        prop_assert!(p.term1 >= 0.0 && p.term2 >= 0.0 && p.term3 >= 0.0);
        prop_assert!(p.term4.unwrap() > 0.0);
        prop_assert!(p.mse_full.unwrap() > p.mse_reduced);
        prop_assert!((p.mse_reduced - t.mse_reduced(n, k).unwrap()).abs() < 1e-15);
    }
}
