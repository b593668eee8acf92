use detperm::experiments::{
    clt_experiment, clt_route_comparison, run_experiment, trunc_concentration_experiment,
    typical_value_experiment, typical_value_scaling, CltRoute, ExperimentSpec,
};
use detperm::report::render;
use detperm::spectrum::default_epsilon;
use detperm::{EntryModel, MatrixFamily, SeededSource};

#[test]
fn typical_value_at_n1_is_chi_square_median() {
    // Median of chi^2(1), from scipy.stats.chi2.median(1).
    let chi2_median = 0.454_936_423_119_572;
    let trials = 20_000;
    let r = typical_value_experiment(1, trials, SeededSource::new(3, 0)).unwrap();
    // SE of a sample median: sqrt(1/4 / T) / f(m), f the chi^2(1) density.
    let density = (-chi2_median / 2.0f64).exp() / (2.0 * std::f64::consts::PI * chi2_median).sqrt();
    let se = (0.25 / trials as f64).sqrt() / density;
    assert!(
        (r.median_ratio - chi2_median).abs() < 5.0 * se,
        "{} vs {chi2_median}",
        r.median_ratio
    );
}

#[test]
fn typical_value_is_reproducible() {
    let s = SeededSource::new(12, 4);
    let a = typical_value_experiment(15, 50, s).unwrap();
    let b = typical_value_experiment(15, 50, s).unwrap();
    assert_eq!(a.log_median_ratio.to_bits(), b.log_median_ratio.to_bits());
}

#[test]
fn typical_value_slope_small_sizes() {
    let fit = typical_value_scaling(&[10, 20, 40], 400, SeededSource::new(5, 0)).unwrap();
    assert!((-1.5..=-0.5).contains(&fit.slope), "slope {}", fit.slope);
}

#[test]
fn chi_construction_matches_direct_route_at_30() {
    let (_, _, ks) = clt_route_comparison(30, 1000, SeededSource::new(90, 0)).unwrap();
    // Critical distance at alpha = 0.001 for 1000 vs 1000 is 1.95 sqrt(2/1000) ~ 0.087.
    assert!(ks.distance < 0.087, "{ks:?}");
}

#[test]
fn clt_statistic_shift_is_visible_at_desk_scale() {
    // Finite-n mean of the statistic is (E ln|det| - 1/2 ln (n-1)!)/scale with
    // E ln|det| = 1/2 sum_k (digamma(k/2) + ln 2); about -0.35 at n = 100.
    let r = clt_experiment(100, 500, CltRoute::ChiConstruction, SeededSource::new(1, 0)).unwrap();
    let mean = detperm::stats::mean(&r.samples);
    let sd = detperm::stats::std_dev(&r.samples);
    assert!((mean + 0.348).abs() < 5.0 * 1.27 / (500f64).sqrt(), "mean {mean}");
    assert!(sd > 1.1 && sd < 1.45, "sd {sd}");
}

#[test]
fn trunc_concentration_at_100() {
    let family = MatrixFamily::Model(EntryModel::rademacher(1.0).unwrap());
    let eps = default_epsilon(100);
    let r = trunc_concentration_experiment(&family, 100, 500, eps, SeededSource::new(33, 0)).unwrap();
    assert!((r.bound - 21.3).abs() < 0.1, "bound {}", r.bound);
    assert!(r.std <= r.bound, "{} > {}", r.std, r.bound);
    let again = trunc_concentration_experiment(&family, 100, 500, eps, SeededSource::new(33, 0)).unwrap();
    assert_eq!(r.std.to_bits(), again.std.to_bits());
}

#[test]
fn experiment_specs_render_identically() {
    let specs = [
        r#"{"name": "clt", "experiment": {"type": "clt", "route": "chi_construction"}, "sizes": [12], "trials": 100, "seed": {"seed": 2}}"#,
        r#"{"name": "trunc", "experiment": {"type": "trunc_concentration"}, "sizes": [10, 14], "trials": 100,
            "epsilon_rule": {"fixed_value": 1.5}, "seed": {"seed": 2}}"#,
        r#"{"name": "ratio", "experiment": {"type": "ratio_scaling"}, "sizes": [3, 5], "trials": 40, "seed": {"seed": 2}}"#,
        r#"{"name": "smin", "experiment": {"type": "sigma_min_survey", "floor_exponent": 3}, "sizes": [8], "trials": 30,
            "model": {"kind": "gaussian_scaled", "scale": 2.0}, "seed": {"seed": 2}}"#,
        r#"{"name": "ssv", "experiment": {"type": "small_sv_survey", "r": 2, "c_bound": 1.0}, "sizes": [10], "trials": 30, "seed": {"seed": 2}}"#,
        r#"{"name": "cmp", "experiment": {"type": "clt_route_comparison"}, "sizes": [10], "trials": 100, "seed": {"seed": 2}}"#,
    ];
    for text in specs {
        let spec = ExperimentSpec::from_json(text).unwrap();
        let a = run_experiment(&spec).unwrap();
        let b = run_experiment(&spec).unwrap();
        assert_eq!(render(&a.report), render(&b.report), "{}", spec.name);
        assert_eq!(a.report["name"], spec.name.as_str());
        assert!(a.report["per_size_results"]
            .as_array()
            .is_some_and(|v| !v.is_empty()));
    }
}
