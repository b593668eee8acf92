//! Godsil-Gutman and Barvinok permanent estimators.
//!
//! Each trial lifts `M` to a random `A` and records `det(A)^2`, whose
//! expectation is `per(M)`. Trials are aggregated in the linear domain
//! (log-sum-exp for the mean), so the headline number estimates the
//! expectation rather than the geometric mean.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::linalg::log_det_lu;
use crate::logval::LogSignedValue;
use crate::matrix::DenseMatrix;
use crate::model::{barvinok_lift, godsil_gutman_lift, MatrixFamily};
use crate::par::try_map_indexed;
use crate::permanent::{permanent_naive, permanent_ryser, PermanentValue, RYSER_LIMIT};
use crate::rng::SeededSource;
use crate::stats::quantile_sorted;
use crate::sum::{log_median, log_sum_exp, CompensatedSum};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EstimatorKind {
    /// Fair random signs.
    GodsilGutman,
    /// Standard normal multipliers.
    Barvinok,
}

impl EstimatorKind {
    pub fn lift(self, m: &DenseMatrix, source: SeededSource) -> Result<DenseMatrix> {
        match self {
            EstimatorKind::GodsilGutman => godsil_gutman_lift(m, source),
            EstimatorKind::Barvinok => barvinok_lift(m, source),
        }
    }

    pub fn name(self) -> &'static str {
        match self {
            EstimatorKind::GodsilGutman => "gg",
            EstimatorKind::Barvinok => "barvinok",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Aggregation {
    Mean,
    Median,
    Single,
}

impl Aggregation {
    pub fn name(self) -> &'static str {
        match self {
            Aggregation::Mean => "mean",
            Aggregation::Median => "median",
            Aggregation::Single => "single",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorConfig {
    pub kind: EstimatorKind,
    pub trials: usize,
    pub aggregation: Aggregation,
    pub seed: SeededSource,
}

impl EstimatorConfig {
    pub fn new(kind: EstimatorKind, trials: usize, aggregation: Aggregation, seed: SeededSource) -> Self {
        Self {
            kind,
            trials,
            aggregation,
            seed,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.trials == 0 {
            return Err(Error::Config("trials must be at least 1".into()));
        }
        if self.aggregation == Aggregation::Single && self.trials != 1 {
            return Err(Error::Config(format!(
                "single aggregation needs exactly one trial, got {}",
                self.trials
            )));
        }
        Ok(())
    }
}

/// Streams `[start, end)` under `seed` that produced a report.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
pub struct SeedProvenance {
    pub seed: u64,
    pub stream_start: u64,
    pub stream_end: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct EstimateReport {
    pub kind: EstimatorKind,
    pub aggregation: Aggregation,
    pub trials: usize,
    /// Aggregated `det(A)^2`.
    pub estimate: LogSignedValue,
    pub per_trial: Vec<LogSignedValue>,
    pub exact: Option<PermanentValue>,
    /// `ln(estimate) - ln(per M)` when both are positive.
    pub log_ratio: Option<f64>,
    pub trials_zero: usize,
    pub seed: SeedProvenance,
    /// Set when `n` exceeds the exact-oracle limit and no comparison exists.
    pub estimate_only: bool,
}

/// `det(A)^2` for one lifted draw, in the log domain.
pub fn det_squared(a: &DenseMatrix) -> Result<LogSignedValue> {
    Ok(log_det_lu(a)?.square())
}

/// Draws `cfg.trials` lifts of `m` and aggregates `det(A)^2`. Attaches the
/// Ryser permanent and the log ratio when `n <= 30`.
pub fn estimate_permanent(m: &DenseMatrix, cfg: &EstimatorConfig) -> Result<EstimateReport> {
    let exact = if m.is_square() && m.rows() <= RYSER_LIMIT {
        Some(exact_permanent(m)?)
    } else {
        None
    };
    estimate_with_exact(m, cfg, exact)
}

fn exact_permanent(m: &DenseMatrix) -> Result<PermanentValue> {
    if m.rows() <= 8 {
        permanent_naive(m)
    } else {
        permanent_ryser(m)
    }
}

/// [`estimate_permanent`] with a caller-supplied exact value (or none).
pub fn estimate_with_exact(
    m: &DenseMatrix,
    cfg: &EstimatorConfig,
    exact: Option<PermanentValue>,
) -> Result<EstimateReport> {
    cfg.validate()?;
    // Surface shape and sign errors once rather than per trial.
    cfg.kind.lift(m, cfg.seed)?;
    let per_trial = try_map_indexed(cfg.trials, |t| {
        det_squared(&cfg.kind.lift(m, cfg.seed.offset(t as u64))?)
    })?;
    let trials_zero = per_trial.iter().filter(|v| v.is_zero()).count();
    let logs: Vec<f64> = per_trial.iter().map(|v| v.log_abs()).collect();
    let log_estimate = match cfg.aggregation {
        Aggregation::Mean => log_sum_exp(&logs) - (cfg.trials as f64).ln(),
        Aggregation::Median => log_median(&logs),
        Aggregation::Single => logs[0],
    };
    let estimate = LogSignedValue::new(1, log_estimate);
    let log_ratio = match (estimate.ln(), exact.and_then(|e| e.ln())) {
        (Some(est), Some(per)) => Some(est - per),
        _ => None,
    };
    Ok(EstimateReport {
        kind: cfg.kind,
        aggregation: cfg.aggregation,
        trials: cfg.trials,
        estimate,
        per_trial,
        estimate_only: exact.is_none(),
        exact,
        log_ratio,
        trials_zero,
        seed: SeedProvenance {
            seed: cfg.seed.seed,
            stream_start: cfg.seed.stream,
            stream_end: cfg.seed.stream.wrapping_add(cfg.trials as u64),
        },
    })
}

/// Average of `det(A)^2` over every sign pattern `u in {-1,1}^(n x n)`,
/// paired with `per(M)`. The two agree exactly in exact arithmetic.
/// Limited to `n <= 4` (65536 patterns).
pub fn unbiasedness_exhaustive(m: &DenseMatrix) -> Result<(f64, f64)> {
    const LIMIT: usize = 4;
    let n = m.rows();
    if m.is_square() && n > LIMIT {
        return Err(Error::Size {
            operation: "unbiasedness_exhaustive",
            n,
            limit: LIMIT,
            hint: "",
        });
    }
    // Validates shape and sign.
    godsil_gutman_lift(m, SeededSource::new(0, 0))?;
    let roots = m.map(f64::sqrt)?;
    let cells = n * n;
    let patterns = 1u64 << cells;
    let mut acc = CompensatedSum::new();
    for mask in 0..patterns {
        let entries = roots
            .entries()
            .iter()
            .enumerate()
            .map(|(k, r)| if mask >> k & 1 == 1 { -r } else { *r })
            .collect();
        let a = DenseMatrix::from_row_major(n, n, entries)?;
        acc.add(det_squared(&a)?.to_f64());
    }
    let average = acc.value() / patterns as f64;
    let per = permanent_naive(m)?.value.to_f64();
    Ok((average, per))
}

/// One row of an approximation-ratio sweep.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RatioRow {
    pub n: usize,
    pub family: String,
    pub trials: usize,
    /// Trials with `det(A) = 0`; excluded from the quantiles.
    pub trials_zero: usize,
    pub log_permanent: f64,
    pub q50: f64,
    pub q90: f64,
    pub q99: f64,
    /// `n^(2/3) ln n`.
    pub envelope: f64,
}

/// `n^(2/3) ln n`.
pub fn ratio_envelope(n: usize) -> f64 {
    let n = n as f64;
    n.powf(2.0 / 3.0) * n.ln()
}

/// For each size, draws one matrix from `family`, runs the estimator
/// `trials_per_size` times, and summarizes `|ln(det(A)^2 / per M)|` over the
/// nonzero trials. `cfg.trials` is ignored.
pub fn approximation_ratio_sweep(
    family: &MatrixFamily,
    sizes: &[usize],
    trials_per_size: usize,
    cfg: &EstimatorConfig,
) -> Result<Vec<RatioRow>> {
    if let Some(&n) = sizes.iter().find(|&&n| n > RYSER_LIMIT) {
        return Err(Error::Size {
            operation: "approximation_ratio_sweep",
            n,
            limit: RYSER_LIMIT,
            hint: "",
        });
    }
    sizes
        .iter()
        .enumerate()
        .map(|(k, &n)| {
            let m = family.sample(n, cfg.seed.lane(2 * k as u32 + 1))?;
            let per = exact_permanent(&m)?;
            let log_per = per.ln().ok_or_else(|| {
                Error::Degenerate(format!("permanent of the size-{n} matrix is not positive"))
            })?;
            let trial_cfg = EstimatorConfig {
                trials: trials_per_size,
                aggregation: Aggregation::Mean,
                seed: cfg.seed.lane(2 * k as u32 + 2),
                ..*cfg
            };
            let report = estimate_with_exact(&m, &trial_cfg, Some(per))?;
            let mut ratios: Vec<f64> = report
                .per_trial
                .iter()
                .filter_map(|v| v.ln())
                .map(|l| (l - log_per).abs())
                .collect();
            ratios.sort_by(f64::total_cmp);
            Ok(RatioRow {
                n,
                family: family.label(),
                trials: trials_per_size,
                trials_zero: report.trials_zero,
                log_permanent: log_per,
                q50: quantile_sorted(&ratios, 0.5),
                q90: quantile_sorted(&ratios, 0.9),
                q99: quantile_sorted(&ratios, 0.99),
                envelope: ratio_envelope(n),
            })
        })
        .collect()
}
