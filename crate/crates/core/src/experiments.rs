//! Seeded Monte Carlo experiments on random determinants.
//!
//! Every experiment is a pure function of its inputs and seed: size index
//! `k` draws from lane `k` of the source, and trial `t` within it from
//! stream `t` of that lane.

use std::fmt::Write as _;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::error::{Error, Result};
use crate::estimators::{approximation_ratio_sweep, Aggregation, EstimatorConfig, EstimatorKind, RatioRow};
use crate::linalg::log_det_lu;
use crate::model::{EntryModel, MatrixFamily};
use crate::par::try_map_indexed;
use crate::rng::SeededSource;
use crate::spectrum::{default_epsilon, sigma_min_survey, small_sv_count_survey, truncated_log_statistic};
use crate::stats::{self, ks_one_sample, ks_two_sample, least_squares, ln_factorial, KsResult};
use crate::sum::log_median;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CltRoute {
    /// `ln|det A|` of an iid standard Gaussian matrix.
    DirectMatrix,
    /// `1/2 sum ln d_i^2` with independent `d_i^2 ~ chi^2(n - i + 1)`.
    ChiConstruction,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct CltSample {
    pub n: usize,
    /// `(ln|det A| - 1/2 ln((n-1)!)) / sqrt(1/2 ln n)`.
    pub statistic: f64,
    pub route: CltRoute,
}

/// The centring and scale of the log-determinant CLT for size `n`.
pub fn clt_normalization(n: usize) -> (f64, f64) {
    (0.5 * ln_factorial(n - 1), (0.5 * (n as f64).ln()).sqrt())
}

/// `ln|det A|` for a standard Gaussian `n x n` matrix, by either route.
pub fn gaussian_log_abs_det(n: usize, route: CltRoute, source: SeededSource) -> Result<f64> {
    match route {
        CltRoute::DirectMatrix => {
            let a = EntryModel::gaussian(1.0)?.sample(n, source)?;
            Ok(log_det_lu(&a)?.log_abs())
        }
        CltRoute::ChiConstruction => {
            let mut g = source.generator();
            Ok(0.5 * (1..=n).map(|i| g.chi_square(n - i + 1).ln()).sum::<f64>())
        }
    }
}

/// One normalized draw. Needs `n >= 2` so the scale is positive.
pub fn clt_sample(n: usize, route: CltRoute, source: SeededSource) -> Result<CltSample> {
    if n < 2 {
        return Err(Error::Config(format!("CLT statistic needs n >= 2, got {n}")));
    }
    let (centre, scale) = clt_normalization(n);
    let log_abs = gaussian_log_abs_det(n, route, source)?;
    Ok(CltSample {
        n,
        statistic: (log_abs - centre) / scale,
        route,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CltReport {
    pub n: usize,
    pub route: CltRoute,
    pub samples: Vec<f64>,
    /// Against the standard normal.
    pub ks: KsResult,
}

/// `trials` normalized log-determinants compared with N(0, 1).
/// Requires `n >= 10` and `trials >= 100`.
pub fn clt_experiment(n: usize, trials: usize, route: CltRoute, source: SeededSource) -> Result<CltReport> {
    if n < 10 {
        return Err(Error::Config(format!("CLT experiment needs n >= 10, got {n}")));
    }
    if trials < 100 {
        return Err(Error::Config(format!(
            "CLT experiment needs at least 100 trials, got {trials}"
        )));
    }
    let samples = try_map_indexed(trials, |t| {
        clt_sample(n, route, source.offset(t as u64)).map(|s| s.statistic)
    })?;
    if samples.iter().any(|s| !s.is_finite()) {
        return Err(Error::Degenerate("a sampled determinant was zero".into()));
    }
    let ks = ks_one_sample(&samples, stats::standard_normal_cdf);
    Ok(CltReport {
        n,
        route,
        samples,
        ks,
    })
}

/// Two-sample KS between the direct and chi-square routes (lanes 0 and 1).
pub fn clt_route_comparison(
    n: usize,
    trials: usize,
    source: SeededSource,
) -> Result<(CltReport, CltReport, KsResult)> {
    let direct = clt_experiment(n, trials, CltRoute::DirectMatrix, source.lane(0))?;
    let chi = clt_experiment(n, trials, CltRoute::ChiConstruction, source.lane(1))?;
    let ks = ks_two_sample(&direct.samples, &chi.samples);
    Ok((direct, chi, ks))
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalValue {
    pub n: usize,
    pub trials: usize,
    /// `ln(median det(A)^2) - ln(n!)`.
    pub log_median_ratio: f64,
    pub median_ratio: f64,
    #[serde(skip)]
    pub log_det_sq: Vec<f64>,
}

/// Median of `det(A)^2 / n!` over standard Gaussian `n x n` matrices; `n!`
/// is `E det(A)^2`.
pub fn typical_value_experiment(n: usize, trials: usize, source: SeededSource) -> Result<TypicalValue> {
    if trials == 0 || n == 0 {
        return Err(Error::Config("need n >= 1 and trials >= 1".into()));
    }
    let model = EntryModel::gaussian(1.0)?;
    let log_det_sq = try_map_indexed(trials, |t| {
        Ok::<_, Error>(
            log_det_lu(&model.sample(n, source.offset(t as u64))?)?
                .square()
                .log_abs(),
        )
    })?;
    let log_median_ratio = log_median(&log_det_sq) - ln_factorial(n);
    Ok(TypicalValue {
        n,
        trials,
        log_median_ratio,
        median_ratio: log_median_ratio.exp(),
        log_det_sq,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TypicalScaling {
    pub rows: Vec<TypicalValue>,
    /// Least-squares slope of `ln(median ratio)` against `ln n`.
    pub slope: f64,
}

pub fn typical_value_scaling(sizes: &[usize], trials: usize, source: SeededSource) -> Result<TypicalScaling> {
    if sizes.len() < 2 {
        return Err(Error::Config("a slope fit needs at least two sizes".into()));
    }
    let rows = sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| typical_value_experiment(n, trials, source.lane(k as u32)))
        .collect::<Result<Vec<_>>>()?;
    let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
    let ys: Vec<f64> = rows.iter().map(|r| r.log_median_ratio).collect();
    let (slope, _) = least_squares(&xs, &ys);
    Ok(TypicalScaling { rows, slope })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TruncConcentration {
    pub n: usize,
    pub epsilon: f64,
    pub trials: usize,
    pub mean: f64,
    pub std: f64,
    /// `sqrt(n) ln n / epsilon`.
    pub bound: f64,
    #[serde(skip)]
    pub statistics: Vec<f64>,
}

/// Spread of the truncated-log statistic over `trials` draws, next to the
/// deviation scale `sqrt(n) ln n / epsilon`. Requires `trials >= 100`.
pub fn trunc_concentration_experiment(
    family: &MatrixFamily,
    n: usize,
    trials: usize,
    epsilon: f64,
    source: SeededSource,
) -> Result<TruncConcentration> {
    if trials < 100 {
        return Err(Error::Config(format!("need at least 100 trials, got {trials}")));
    }
    let statistics = try_map_indexed(trials, |t| {
        truncated_log_statistic(&family.sample(n, source.offset(t as u64))?, epsilon)
    })?;
    Ok(TruncConcentration {
        n,
        epsilon,
        trials,
        mean: stats::mean(&statistics),
        std: stats::std_dev(&statistics),
        bound: (n as f64).sqrt() * (n as f64).ln() / epsilon,
        statistics,
    })
}

/// Godsil-Gutman ratio sweep over the all-ones matrix and one uniform
/// `[1, 2]` matrix per size.
pub fn ratio_scaling_experiment(
    sizes: &[usize],
    trials: usize,
    source: SeededSource,
) -> Result<Vec<RatioRow>> {
    let families = [
        MatrixFamily::AllOnes,
        MatrixFamily::Uniform { low: 1.0, high: 2.0 },
    ];
    let mut rows = Vec::new();
    for (f, family) in families.iter().enumerate() {
        let seed = SeededSource::new(source.seed, source.stream.wrapping_add((f as u64) << 48));
        let cfg = EstimatorConfig::new(EstimatorKind::GodsilGutman, trials, Aggregation::Mean, seed);
        rows.extend(approximation_ratio_sweep(family, sizes, trials, &cfg)?);
    }
    Ok(rows)
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EpsilonRule {
    FixedValue(f64),
    /// `n^(1/6)`.
    PaperRule,
}

impl EpsilonRule {
    pub fn resolve(self, n: usize) -> f64 {
        match self {
            EpsilonRule::FixedValue(e) => e,
            EpsilonRule::PaperRule => default_epsilon(n),
        }
    }
}

fn default_epsilon_rule() -> EpsilonRule {
    EpsilonRule::PaperRule
}

fn default_model() -> EntryModel {
    EntryModel::rademacher(1.0).expect("unit Rademacher model is valid")
}

fn default_seed() -> SeededSource {
    SeededSource::new(crate::DEFAULT_SEED, 0)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum ExperimentKind {
    Clt { route: CltRoute },
    CltRouteComparison,
    TypicalValue,
    TruncConcentration,
    RatioScaling,
    SigmaMinSurvey { floor_exponent: f64 },
    SmallSvSurvey { r: usize, c_bound: f64 },
}

/// An experiment description, read from JSON.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentSpec {
    pub name: String,
    pub experiment: ExperimentKind,
    #[serde(default = "default_model")]
    pub model: EntryModel,
    pub sizes: Vec<usize>,
    pub trials: usize,
    #[serde(default = "default_epsilon_rule")]
    pub epsilon_rule: EpsilonRule,
    #[serde(default = "default_seed")]
    pub seed: SeededSource,
    /// Directory for the report and CSV; stdout when absent.
    #[serde(default)]
    pub outputs: Option<PathBuf>,
}

impl ExperimentSpec {
    pub fn from_json(text: &str) -> Result<Self> {
        let spec: Self = serde_json::from_str(text).map_err(|e| Error::Parse {
            line: e.line(),
            column: e.column(),
            message: e.to_string(),
        })?;
        spec.validate()?;
        Ok(spec)
    }

    pub fn validate(&self) -> Result<()> {
        if self.sizes.is_empty() {
            return Err(Error::Config("sizes must be nonempty".into()));
        }
        if self.trials < 30 {
            return Err(Error::Config(format!(
                "distributional experiments need at least 30 trials, got {}",
                self.trials
            )));
        }
        Ok(())
    }
}

/// A finished experiment: the JSON report and, where the experiment has
/// per-trial statistics, a CSV of them.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentOutput {
    pub report: Value,
    pub csv: Option<String>,
}

fn csv_rows<'a>(header: &str, rows: impl Iterator<Item = (usize, &'a [f64])>) -> String {
    let mut out = format!("{header}\n");
    for (n, values) in rows {
        for (t, v) in values.iter().enumerate() {
            writeln!(out, "{n},{t},{v:.16e}").unwrap();
        }
    }
    out
}

pub fn run_experiment(spec: &ExperimentSpec) -> Result<ExperimentOutput> {
    spec.validate()?;
    let lane = |k: usize| spec.seed.lane(k as u32);
    let family = MatrixFamily::Model(spec.model.clone());
    let (per_size, csv): (Vec<Value>, Option<String>) = match &spec.experiment {
        ExperimentKind::Clt { route } => {
            let reports = spec
                .sizes
                .iter()
                .enumerate()
                .map(|(k, &n)| clt_experiment(n, spec.trials, *route, lane(k)))
                .collect::<Result<Vec<_>>>()?;
            let csv = csv_rows(
                "n,trial,statistic",
                reports.iter().map(|r| (r.n, r.samples.as_slice())),
            );
            let rows = reports
                .iter()
                .map(|r| {
                    json!({"n": r.n, "route": r.route, "ks_distance": r.ks.distance, "ks_pvalue": r.ks.pvalue,
                    "mean": stats::mean(&r.samples), "std": stats::std_dev(&r.samples)})
                })
                .collect();
            (rows, Some(csv))
        }
        ExperimentKind::CltRouteComparison => {
            let rows = spec
                .sizes
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    let (direct, chi, ks) = clt_route_comparison(n, spec.trials, lane(k))?;
                    Ok(json!({"n": n, "two_sample_ks_distance": ks.distance, "two_sample_ks_pvalue": ks.pvalue,
                        "direct_ks_pvalue": direct.ks.pvalue, "chi_ks_pvalue": chi.ks.pvalue}))
                })
                .collect::<Result<Vec<_>>>()?;
            (rows, None)
        }
        ExperimentKind::TypicalValue => {
            let rows = spec
                .sizes
                .iter()
                .enumerate()
                .map(|(k, &n)| typical_value_experiment(n, spec.trials, lane(k)))
                .collect::<Result<Vec<_>>>()?;
            let csv = csv_rows(
                "n,trial,log_det_sq",
                rows.iter().map(|r| (r.n, r.log_det_sq.as_slice())),
            );
            let mut values: Vec<Value> = rows.iter().map(|r| serde_json::to_value(r).unwrap()).collect();
            if rows.len() >= 2 {
                let xs: Vec<f64> = rows.iter().map(|r| (r.n as f64).ln()).collect();
                let ys: Vec<f64> = rows.iter().map(|r| r.log_median_ratio).collect();
                values.push(json!({"fit": "log_median_ratio vs ln n", "slope": least_squares(&xs, &ys).0}));
            }
            (values, Some(csv))
        }
        ExperimentKind::TruncConcentration => {
            let rows = spec
                .sizes
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    trunc_concentration_experiment(
                        &family,
                        n,
                        spec.trials,
                        spec.epsilon_rule.resolve(n),
                        lane(k),
                    )
                })
                .collect::<Result<Vec<_>>>()?;
            let csv = csv_rows(
                "n,trial,statistic",
                rows.iter().map(|r| (r.n, r.statistics.as_slice())),
            );
            (
                rows.iter().map(|r| serde_json::to_value(r).unwrap()).collect(),
                Some(csv),
            )
        }
        ExperimentKind::RatioScaling => {
            let rows = ratio_scaling_experiment(&spec.sizes, spec.trials, spec.seed)?;
            (
                rows.iter().map(|r| serde_json::to_value(r).unwrap()).collect(),
                None,
            )
        }
        ExperimentKind::SigmaMinSurvey { floor_exponent } => {
            let rows = spec
                .sizes
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    let s = sigma_min_survey(&family, n, spec.trials, *floor_exponent, lane(k))?;
                    Ok(json!({"n": n, "survey": s}))
                })
                .collect::<Result<Vec<_>>>()?;
            (rows, None)
        }
        ExperimentKind::SmallSvSurvey { r, c_bound } => {
            let rows = spec
                .sizes
                .iter()
                .enumerate()
                .map(|(k, &n)| {
                    let s = small_sv_count_survey(&family, n, *r, spec.trials, *c_bound, lane(k))?;
                    Ok(json!({"n": n, "r": r, "observational": true, "survey": s}))
                })
                .collect::<Result<Vec<_>>>()?;
            (rows, None)
        }
    };
    let report = json!({
        "name": spec.name,
        "spec": spec,
        "per_size_results": per_size,
        "seed": spec.seed,
    });
    Ok(ExperimentOutput { report, csv })
}
