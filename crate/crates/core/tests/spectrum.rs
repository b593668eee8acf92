mod common;

use common::signs;
use detperm::linalg::{log_det_lu, singular_values};
use detperm::spectrum::{
    default_epsilon, detsmall_bound_check, sigma_min_survey, small_sv_count_survey, spectrum_split,
};
use detperm::stats::median;
use detperm::{DenseMatrix, EntryModel, MatrixFamily, SeededSource};
use proptest::prelude::*;

fn rademacher() -> MatrixFamily {
    MatrixFamily::Model(EntryModel::rademacher(1.0).unwrap())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn split_is_exact_and_monotone(n in 2usize..30, stream in 0u64..1000, e1 in 0.05f64..5.0, e2 in 0.05f64..5.0) {
        let a = signs(n, stream);
        let (lo, hi) = if e1 <= e2 { (e1, e2) } else { (e2, e1) };
        let s_lo = spectrum_split(&a, lo).unwrap();
        let s_hi = spectrum_split(&a, hi).unwrap();
        let det = log_det_lu(&a).unwrap();
        if !det.is_zero() {
            prop_assert!((s_lo.log_abs_det() - det.log_abs()).abs() <= 1e-9);
        }
        prop_assert!(s_lo.log_det_small <= 0.0);
        prop_assert!(s_lo.log_det_trunc <= s_hi.log_det_trunc + 1e-12);
        prop_assert!(s_lo.log_det_small >= s_hi.log_det_small - 1e-12);
        prop_assert!(s_lo.s_eps <= s_hi.s_eps);
        let (lhs, rhs) = detsmall_bound_check(&a, lo).unwrap();
        prop_assert!(lhs <= 0.0 && lhs >= rhs - 1e-12);
    }
}

#[test]
fn split_matches_lu_at_size_100() {
    let eps = default_epsilon(100);
    assert!((eps - 100f64.powf(1.0 / 6.0)).abs() < 1e-15);
    let a = signs(100, 7);
    let s = spectrum_split(&a, eps).unwrap();
    assert!((s.log_abs_det() - log_det_lu(&a).unwrap().log_abs()).abs() < 1e-8);
}

#[test]
fn detsmall_holds_on_50x50_signs() {
    let eps = default_epsilon(50);
    for stream in 0..100 {
        let (lhs, rhs) = detsmall_bound_check(&signs(50, 1000 + stream), eps).unwrap();
        assert!(0.0 >= lhs && lhs >= rhs, "stream {stream}: {lhs} {rhs}");
    }
}

#[test]
fn two_by_two_sign_matrices_half_singular() {
    let mut singular = 0;
    for mask in 0u32..16 {
        let e: Vec<f64> = (0..4)
            .map(|k| if mask >> k & 1 == 1 { -1.0 } else { 1.0 })
            .collect();
        let a = DenseMatrix::from_row_major(2, 2, e).unwrap();
        if singular_values(&a).min() < 1e-12 {
            singular += 1;
        }
    }
    assert_eq!(singular, 8);
}

#[test]
fn sigma_min_floor_at_100() {
    let s = sigma_min_survey(&rademacher(), 100, 200, 5.0, SeededSource::new(61, 0)).unwrap();
    assert_eq!(s.below_floor, 0);
    assert!(s.min_sigma_min > 1e-10);
}

#[test]
fn small_singular_value_count_grows_slowly() {
    // Median s_eps at eps = n^(1/6) stays below 3 sqrt(n) eps.
    for (k, n) in [50usize, 100, 200].into_iter().enumerate() {
        let eps = default_epsilon(n);
        let counts: Vec<f64> = (0..30)
            .map(|t| {
                let a = rademacher()
                    .sample(n, SeededSource::new(71, ((k as u64) << 32) + t))
                    .unwrap();
                spectrum_split(&a, eps).unwrap().s_eps as f64
            })
            .collect();
        let bound = 3.0 * (n as f64).sqrt() * eps;
        assert!(median(&counts) <= bound, "n = {n}: {} > {bound}", median(&counts));
    }
}

#[test]
fn small_sv_survey_observational_probe() {
    // r = 20 sits far below log^4(200); the lemma's event is still not seen.
    let s = small_sv_count_survey(&rademacher(), 200, 20, 100, 1.0, SeededSource::new(81, 0)).unwrap();
    println!(
        "n = 200, r = 20: {} of {} trials under {:.4}",
        s.violations, s.trials, s.threshold
    );
    assert_eq!(s.violations, 0);
}
