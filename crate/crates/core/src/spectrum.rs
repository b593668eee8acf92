//! The truncated/small split of `|det A|` over the singular values, and
//! surveys of the smallest singular values of random ensembles.
//!
//! Singular values are indexed ascending: `sigma[0]` is the smallest
//! (`sigma_min`), `kth_smallest(k)` is the k-th smallest. For a threshold
//! `eps > 0`,
//!
//! ```text
//! ln det_trunc = 1/2 sum max(2 ln eps, ln sigma_i^2)
//! ln det_small = 1/2 sum min(ln(sigma_i^2 / eps^2), 0)
//! ```
//!
//! so the two logs add up to `ln |det A|` term by term.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::linalg::{singular_values, SingularValues};
use crate::matrix::DenseMatrix;
use crate::model::MatrixFamily;
use crate::par::try_map_indexed;
use crate::rng::SeededSource;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectrumSummary {
    pub epsilon: f64,
    pub sigma: SingularValues,
    pub log_det_trunc: f64,
    /// `-inf` exactly when `sigma_min = 0`.
    pub log_det_small: f64,
    pub s_eps: usize,
    pub sigma_min: f64,
}

impl SpectrumSummary {
    pub fn log_abs_det(&self) -> f64 {
        self.log_det_trunc + self.log_det_small
    }
}

/// `eps = n^(1/6)`.
pub fn default_epsilon(n: usize) -> f64 {
    (n as f64).powf(1.0 / 6.0)
}

fn check_epsilon(epsilon: f64) -> Result<()> {
    if epsilon > 0.0 && epsilon.is_finite() {
        Ok(())
    } else {
        Err(Error::Domain(format!("epsilon must be positive, got {epsilon}")))
    }
}

/// `log^eps(x) = max(2 ln eps, ln x)`, with `log^eps(0) = 2 ln eps`.
pub fn truncated_log(x: f64, epsilon: f64) -> f64 {
    let floor = 2.0 * epsilon.ln();
    if x <= 0.0 {
        floor
    } else {
        x.ln().max(floor)
    }
}

pub fn summarize(sigma: SingularValues, epsilon: f64) -> Result<SpectrumSummary> {
    check_epsilon(epsilon)?;
    let log_eps = epsilon.ln();
    let log_det_trunc = 0.5
        * sigma
            .sigma
            .iter()
            .map(|s| truncated_log(s * s, epsilon))
            .sum::<f64>();
    let log_det_small = sigma
        .sigma
        .iter()
        .map(|&s| {
            if s == 0.0 {
                f64::NEG_INFINITY
            } else {
                (s.ln() - log_eps).min(0.0)
            }
        })
        .sum();
    let s_eps = sigma.sigma.iter().filter(|&&s| s <= epsilon).count();
    let sigma_min = sigma.min();
    Ok(SpectrumSummary {
        epsilon,
        sigma,
        log_det_trunc,
        log_det_small,
        s_eps,
        sigma_min,
    })
}

/// Splits `ln|det A|` at threshold `epsilon`.
pub fn spectrum_split(a: &DenseMatrix, epsilon: f64) -> Result<SpectrumSummary> {
    if !a.is_square() {
        return Err(Error::Config(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )));
    }
    check_epsilon(epsilon)?;
    let tol = 1e-12 * a.max_norm() * a.rows() as f64;
    let mut sigma = singular_values(a);
    for s in sigma.sigma.iter_mut().filter(|s| **s <= tol) {
        *s = 0.0;
    }
    summarize(sigma, epsilon)
}

/// `ln det_trunc A = 1/2 sum over spec(AA^T) of log^eps`.
pub fn truncated_log_statistic(a: &DenseMatrix, epsilon: f64) -> Result<f64> {
    Ok(spectrum_split(a, epsilon)?.log_det_trunc)
}

/// `(ln det_small A, s_eps * min(0, ln(sigma_min / eps)))`; the first is
/// always between the second and 0.
pub fn detsmall_bound_check(a: &DenseMatrix, epsilon: f64) -> Result<(f64, f64)> {
    let s = spectrum_split(a, epsilon)?;
    let rhs = if s.s_eps == 0 {
        0.0
    } else {
        s.s_eps as f64 * (s.sigma_min.ln() - epsilon.ln()).min(0.0)
    };
    Ok((s.log_det_small, rhs))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SigmaMinSurvey {
    pub trials: usize,
    pub min_sigma_min: f64,
    pub floor: f64,
    pub below_floor: usize,
}

/// Smallest `sigma_min` over `trials` draws, and how many fall strictly
/// below `n^(-floor_exponent)`. Trial `t` uses stream `source + t`.
pub fn sigma_min_survey(
    family: &MatrixFamily,
    n: usize,
    trials: usize,
    floor_exponent: f64,
    source: SeededSource,
) -> Result<SigmaMinSurvey> {
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let floor = (n as f64).powf(-floor_exponent);
    let mins = try_map_indexed(trials, |t| {
        Ok::<_, Error>(singular_values(&family.sample(n, source.offset(t as u64))?).min())
    })?;
    Ok(SigmaMinSurvey {
        trials,
        min_sigma_min: mins.iter().copied().fold(f64::INFINITY, f64::min),
        floor,
        below_floor: mins.iter().filter(|&&s| s < floor).count(),
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct SmallSvSurvey {
    pub trials: usize,
    pub threshold: f64,
    /// Trials where `sigma_2r <= threshold`.
    pub violations: usize,
}

/// Counts trials where the `2r`-th smallest singular value is at most
/// `r c^2 / (2 sqrt(n - r))`.
pub fn small_sv_count_survey(
    family: &MatrixFamily,
    n: usize,
    r: usize,
    trials: usize,
    c_bound: f64,
    source: SeededSource,
) -> Result<SmallSvSurvey> {
    if r == 0 || 2 * r > n {
        return Err(Error::Domain(format!("need 1 <= 2r <= n, got r = {r}, n = {n}")));
    }
    if trials == 0 {
        return Err(Error::Config("trials must be at least 1".into()));
    }
    let threshold = r as f64 * c_bound * c_bound / (2.0 * ((n - r) as f64).sqrt());
    let hits = try_map_indexed(trials, |t| {
        let sigma = singular_values(&family.sample(n, source.offset(t as u64))?);
        Ok::<_, Error>(sigma.kth_smallest(2 * r) <= threshold)
    })?;
    Ok(SmallSvSurvey {
        trials,
        threshold,
        violations: hits.into_iter().filter(|&h| h).count(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64) -> bool {
        (a - b).abs() < 1e-13
    }

    #[test]
    fn split_examples() {
        let s = spectrum_split(&DenseMatrix::identity(3), 0.5).unwrap();
        assert_eq!((s.log_det_trunc, s.log_det_small, s.s_eps), (0.0, 0.0, 0));

        let a = DenseMatrix::diagonal(&[2.0, 0.1]).unwrap();
        let s = spectrum_split(&a, 0.5).unwrap();
        assert!(close(s.log_det_trunc, 2f64.ln() + 0.5f64.ln()));
        assert!(close(s.log_det_small, (0.1f64 / 0.5).ln()));
        assert!(close(s.log_abs_det(), 0.2f64.ln()));
        assert_eq!(s.s_eps, 1);
        assert!(close(s.sigma_min, 0.1));
    }

    #[test]
    fn epsilon_must_be_positive() {
        let a = DenseMatrix::identity(2);
        assert!(matches!(spectrum_split(&a, 0.0), Err(Error::Domain(_))));
        assert!(matches!(detsmall_bound_check(&a, -1.0), Err(Error::Domain(_))));
        assert!(truncated_log_statistic(&a, f64::NAN).is_err());
    }

    #[test]
    fn truncated_log_examples() {
        assert_eq!(
            truncated_log_statistic(&DenseMatrix::zeros(2, 2), 1.0).unwrap(),
            0.0
        );
        let v = truncated_log_statistic(&DenseMatrix::identity(2), 2.0).unwrap();
        assert!(close(v, 2.0 * 2f64.ln()));
        let v = truncated_log_statistic(&DenseMatrix::diagonal(&[10.0, 10.0]).unwrap(), 1.0).unwrap();
        assert!(close(v, 100f64.ln()));
        assert_eq!(truncated_log(0.0, 3.0), 2.0 * 3f64.ln());
    }

    #[test]
    fn singular_matrix_has_zero_small_part() {
        let a = DenseMatrix::from_rows(&[[1.0, 1.0], [1.0, 1.0]]).unwrap();
        let s = spectrum_split(&a, 1.0).unwrap();
        assert_eq!(s.sigma_min, 0.0);
        assert_eq!(s.log_det_small, f64::NEG_INFINITY);
        assert!((s.log_det_trunc - 2f64.ln()).abs() < 1e-14);
        let (lhs, rhs) = detsmall_bound_check(&DenseMatrix::zeros(2, 2), 1.0).unwrap();
        assert!(lhs <= 0.0 && lhs >= rhs);
    }

    #[test]
    fn detsmall_examples() {
        assert_eq!(
            detsmall_bound_check(&DenseMatrix::identity(2), 0.5).unwrap(),
            (0.0, 0.0)
        );
        let (l, r) = detsmall_bound_check(&DenseMatrix::diagonal(&[1.0, 0.1]).unwrap(), 0.5).unwrap();
        assert!(close(l, 0.2f64.ln()) && close(r, 0.2f64.ln()));
    }

    #[test]
    fn survey_examples() {
        let rad = MatrixFamily::Model(crate::model::EntryModel::rademacher(1.0).unwrap());
        let s = sigma_min_survey(&rad, 1, 10, 2.0, SeededSource::new(1, 0)).unwrap();
        assert_eq!(s.min_sigma_min, 1.0);
        assert_eq!(s.below_floor, 0);

        let scaled = MatrixFamily::Fixed(DenseMatrix::diagonal(&[10.0, 10.0]).unwrap());
        let s = small_sv_count_survey(&scaled, 2, 1, 5, 1.0, SeededSource::new(1, 0)).unwrap();
        assert!(close(s.threshold, 0.5));
        assert_eq!(s.violations, 0);

        let zero = MatrixFamily::Fixed(DenseMatrix::zeros(4, 4));
        let s = small_sv_count_survey(&zero, 4, 2, 7, 1.0, SeededSource::new(1, 0)).unwrap();
        assert_eq!(s.violations, 7);

        assert!(matches!(
            small_sv_count_survey(&zero, 4, 3, 1, 1.0, SeededSource::new(1, 0)),
            Err(Error::Domain(_))
        ));
        assert!(small_sv_count_survey(&zero, 4, 0, 1, 1.0, SeededSource::new(1, 0)).is_err());
    }
}
