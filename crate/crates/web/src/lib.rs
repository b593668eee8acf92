//! Browser bindings for the `www/` demo. Every export returns a JSON string.

use detperm::estimators::{estimate_permanent, Aggregation, EstimatorConfig, EstimatorKind};
use detperm::experiments::{clt_experiment, CltRoute};
use detperm::report::render;
use detperm::spectrum::{default_epsilon, spectrum_split};
use detperm::{EntryModel, MatrixFamily, Result, SeededSource};
use serde_json::{json, Value};
use wasm_bindgen::prelude::*;

fn respond(result: Result<Value>) -> std::result::Result<String, JsError> {
    result
        .map(|v| render(&v))
        .map_err(|e| JsError::new(&e.to_string()))
}

fn family(name: &str) -> Result<MatrixFamily> {
    match name {
        "ones" => Ok(MatrixFamily::AllOnes),
        "uniform" => Ok(MatrixFamily::Uniform { low: 1.0, high: 2.0 }),
        "rademacher" => Ok(MatrixFamily::Model(EntryModel::rademacher(1.0)?)),
        other => Err(detperm::Error::Config(format!("unknown matrix family {other:?}"))),
    }
}

/// Per-trial `ln det(A)^2 - ln per(M)` for one sampled `n x n` matrix.
pub fn estimator_trials(n: usize, trials: usize, kind: &str, matrix: &str, seed: u64) -> Result<Value> {
    let kind = match kind {
        "gg" => EstimatorKind::GodsilGutman,
        "barvinok" => EstimatorKind::Barvinok,
        other => return Err(detperm::Error::Config(format!("unknown estimator {other:?}"))),
    };
    let source = SeededSource::new(seed, 0);
    let m = family(matrix)?.sample(n, source.lane(0))?;
    let cfg = EstimatorConfig::new(kind, trials, Aggregation::Mean, source.lane(1));
    let report = estimate_permanent(&m, &cfg)?;
    let exact_log = report.exact.and_then(|e| e.ln());
    let log_ratios: Vec<Option<f64>> = report
        .per_trial
        .iter()
        .map(|v| match (v.ln(), exact_log) {
            (Some(l), Some(p)) => Some(l - p),
            _ => None,
        })
        .collect();
    Ok(json!({
        "n": n,
        "exact_log": exact_log,
        "mean_log_ratio": report.log_ratio,
        "trials_zero": report.trials_zero,
        "log_ratios": log_ratios,
    }))
}

/// Singular values and the truncated/small split of a random sign matrix.
/// `epsilon <= 0` selects the default `n^(1/6)`.
pub fn spectrum_demo(n: usize, epsilon: f64, seed: u64) -> Result<Value> {
    let a = EntryModel::rademacher(1.0)?.sample(n, SeededSource::new(seed, 0))?;
    let eps = if epsilon > 0.0 {
        epsilon
    } else {
        default_epsilon(n)
    };
    Ok(spectrum_split(&a, eps)?.to_json())
}

/// Normalized Gaussian log-determinants and their KS distance from N(0, 1).
pub fn clt_demo(n: usize, trials: usize, chi: bool, seed: u64) -> Result<Value> {
    let route = if chi {
        CltRoute::ChiConstruction
    } else {
        CltRoute::DirectMatrix
    };
    let report = clt_experiment(n, trials, route, SeededSource::new(seed, 0))?;
    Ok(json!({
        "n": n,
        "samples": report.samples,
        "ks_distance": report.ks.distance,
        "ks_pvalue": report.ks.pvalue,
    }))
}

#[wasm_bindgen(js_name = estimatorTrials)]
pub fn estimator_trials_js(
    n: usize,
    trials: usize,
    kind: &str,
    matrix: &str,
    seed: u64,
) -> std::result::Result<String, JsError> {
    respond(estimator_trials(n, trials, kind, matrix, seed))
}

#[wasm_bindgen(js_name = spectrumDemo)]
pub fn spectrum_demo_js(n: usize, epsilon: f64, seed: u64) -> std::result::Result<String, JsError> {
    respond(spectrum_demo(n, epsilon, seed))
}

#[wasm_bindgen(js_name = cltDemo)]
pub fn clt_demo_js(n: usize, trials: usize, chi: bool, seed: u64) -> std::result::Result<String, JsError> {
    respond(clt_demo(n, trials, chi, seed))
}
