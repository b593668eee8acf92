//! Log-domain determinants by two independent routes, row distances, and
//! singular values.
//!
//! `log_det_lu` uses partially pivoted Gaussian elimination. `log_det_distances`
//! orthogonalizes the rows in order with classical Gram-Schmidt applied twice
//! per row (CGS2), which keeps the computed basis orthogonal to working
//! precision. Singular values come from nalgebra's bidiagonal SVD.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logval::LogSignedValue;
use crate::matrix::DenseMatrix;

/// Pivots or distances at or below this are treated as exact zeros.
fn rank_tolerance(a: &DenseMatrix) -> f64 {
    1e-12 * a.max_norm() * a.rows().max(a.cols()) as f64
}

fn require_square(a: &DenseMatrix) -> Result<()> {
    if a.is_square() {
        Ok(())
    } else {
        Err(Error::Config(format!(
            "expected a square matrix, got {}x{}",
            a.rows(),
            a.cols()
        )))
    }
}

/// `det A` as (sign, log|det|) from a row-pivoted LU factorization.
///
/// Singular input (a pivot below the rank tolerance) yields zero. Fails only
/// on non-square input.
pub fn log_det_lu(a: &DenseMatrix) -> Result<LogSignedValue> {
    require_square(a)?;
    let n = a.rows();
    let tol = rank_tolerance(a);
    let mut lu = a.entries().to_vec();
    let mut sign = 1i8;
    let mut log_abs = 0.0;
    for k in 0..n {
        let (p, pivot) = (k..n)
            .map(|i| (i, lu[i * n + k].abs()))
            .fold((k, -1.0), |best, cur| if cur.1 > best.1 { cur } else { best });
        if pivot <= tol {
            return Ok(LogSignedValue::ZERO);
        }
        if p != k {
            for j in 0..n {
                lu.swap(k * n + j, p * n + j);
            }
            sign = -sign;
        }
        let pivot = lu[k * n + k];
        if pivot < 0.0 {
            sign = -sign;
        }
        log_abs += pivot.abs().ln();
        let (head, tail) = lu.split_at_mut((k + 1) * n);
        let pivot_row = &head[k * n..];
        for row in tail.chunks_exact_mut(n) {
            let factor = row[k] / pivot;
            if factor != 0.0 {
                for j in k + 1..n {
                    row[j] -= factor * pivot_row[j];
                }
            }
        }
    }
    Ok(LogSignedValue::new(sign, log_abs))
}

/// Distances from each row to the span of the rows before it.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RowDistances {
    pub d: Vec<f64>,
}

impl RowDistances {
    /// `sum ln d_i`; `-inf` if any distance is zero.
    pub fn log_product(&self) -> f64 {
        self.d.iter().map(|d| d.ln()).sum()
    }
}

/// An orthonormal basis grown one vector at a time with CGS2.
struct OrthoBasis {
    dim: usize,
    vectors: Vec<f64>,
}

impl OrthoBasis {
    fn new(dim: usize) -> Self {
        Self {
            dim,
            vectors: Vec::new(),
        }
    }

    fn len(&self) -> usize {
        self.vectors.len() / self.dim
    }

    /// Removes the components of `v` along the basis, twice.
    fn project_out(&self, v: &mut [f64]) {
        let mut coeffs = vec![0.0; self.len()];
        for _ in 0..2 {
            for (c, q) in coeffs.iter_mut().zip(self.vectors.chunks_exact(self.dim)) {
                *c = dot(q, v);
            }
            for (c, q) in coeffs.iter().zip(self.vectors.chunks_exact(self.dim)) {
                for (x, y) in v.iter_mut().zip(q) {
                    *x -= c * y;
                }
            }
        }
    }

    /// Orthogonalizes `v` against the basis, returns its residual norm and
    /// appends the normalized residual when it exceeds `tol`.
    fn push(&mut self, mut v: Vec<f64>, tol: f64) -> f64 {
        self.project_out(&mut v);
        let norm = dot(&v, &v).sqrt();
        if norm > tol {
            self.vectors.extend(v.iter().map(|x| x / norm));
            norm
        } else {
            0.0
        }
    }
}

fn dot(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}

/// Distances of each row to the span of the preceding rows, for any shape.
/// Distances at or below the rank tolerance are reported as 0.
pub fn row_distances(a: &DenseMatrix) -> RowDistances {
    let tol = rank_tolerance(a);
    let mut basis = OrthoBasis::new(a.cols());
    let d = (0..a.rows())
        .map(|i| basis.push(a.row(i).to_vec(), tol))
        .collect();
    RowDistances { d }
}

/// `|det A| = prod d_i`, with the sign taken from [`log_det_lu`].
pub fn log_det_distances(a: &DenseMatrix) -> Result<(LogSignedValue, RowDistances)> {
    require_square(a)?;
    let distances = row_distances(a);
    let lu = log_det_lu(a)?;
    let log_abs = distances.log_product();
    let value = if lu.is_zero() {
        LogSignedValue::ZERO
    } else {
        LogSignedValue::new(lu.sign(), log_abs)
    };
    Ok((value, distances))
}

/// Singular values in ascending order.
#[derive(Debug, Clone, PartialEq, Serialize)]
#[serde(transparent)]
pub struct SingularValues {
    pub sigma: Vec<f64>,
}

impl SingularValues {
    pub fn min(&self) -> f64 {
        self.sigma[0]
    }

    pub fn max(&self) -> f64 {
        *self.sigma.last().unwrap()
    }

    /// `sum ln sigma_i`.
    pub fn log_product(&self) -> f64 {
        self.sigma.iter().map(|s| s.ln()).sum()
    }

    /// The `k`-th smallest, 1-based.
    pub fn kth_smallest(&self, k: usize) -> f64 {
        self.sigma[k - 1]
    }
}

/// The `min(rows, cols)` singular values of `a`, ascending.
pub fn singular_values(a: &DenseMatrix) -> SingularValues {
    let svd = a.to_nalgebra().svd(false, false);
    let mut sigma: Vec<f64> = svd.singular_values.iter().copied().collect();
    sigma.sort_by(f64::total_cmp);
    SingularValues { sigma }
}

/// Distance from each row to the span of all the other rows.
pub fn complement_distances(a: &DenseMatrix) -> Vec<f64> {
    let tol = rank_tolerance(a);
    (0..a.rows())
        .map(|i| {
            let mut basis = OrthoBasis::new(a.cols());
            for k in (0..a.rows()).filter(|&k| k != i) {
                basis.push(a.row(k).to_vec(), tol);
            }
            let mut v = a.row(i).to_vec();
            basis.project_out(&mut v);
            let d = dot(&v, &v).sqrt();
            if d > tol {
                d
            } else {
                0.0
            }
        })
        .collect()
}

/// Both sides of `sum d_i^-2 = sum sigma_i^-2` over the first `m` rows of `a`,
/// where `d_i` is the distance from row `i` to the span of the other rows.
///
/// Requires `m <= cols` and full row rank.
pub fn distance_identity_check(a: &DenseMatrix, m: usize) -> Result<(f64, f64)> {
    if m > a.cols() {
        return Err(Error::Config(format!(
            "need m <= n, got m = {m} for {} columns",
            a.cols()
        )));
    }
    let top = a.top_rows(m)?;
    let d = complement_distances(&top);
    let sigma = singular_values(&top);
    let tol = rank_tolerance(&top);
    if d.contains(&0.0) || sigma.min() <= tol {
        return Err(Error::Degenerate("matrix does not have full row rank".into()));
    }
    let lhs = d.iter().map(|x| x.powi(-2)).sum();
    let rhs = sigma.sigma.iter().map(|x| x.powi(-2)).sum();
    Ok((lhs, rhs))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn m(rows: &[&[f64]]) -> DenseMatrix {
        DenseMatrix::from_rows(rows).unwrap()
    }

    #[test]
    fn lu_examples() {
        assert_eq!(
            log_det_lu(&DenseMatrix::identity(3)).unwrap(),
            LogSignedValue::ONE
        );
        let v = log_det_lu(&m(&[&[1.0, 2.0], &[3.0, 4.0]])).unwrap();
        assert_eq!(v.sign(), -1);
        assert!((v.log_abs() - 2f64.ln()).abs() < 1e-14);
        assert!(log_det_lu(&m(&[&[1.0, 1.0], &[1.0, 1.0]])).unwrap().is_zero());
        assert!(log_det_lu(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn lu_sign_through_swaps() {
        // Anti-diagonal permutation of size 3 has det -1; of size 4, +1.
        let p3 = DenseMatrix::from_fn(3, 3, |i, j| (i + j == 2) as u8 as f64).unwrap();
        let p4 = DenseMatrix::from_fn(4, 4, |i, j| (i + j == 3) as u8 as f64).unwrap();
        assert_eq!(log_det_lu(&p3).unwrap().sign(), -1);
        assert_eq!(log_det_lu(&p4).unwrap().sign(), 1);
    }

    #[test]
    fn distance_examples() {
        let (v, d) = log_det_distances(&DenseMatrix::identity(3)).unwrap();
        assert_eq!(d.d, vec![1.0, 1.0, 1.0]);
        assert_eq!(v.log_abs(), 0.0);
        let (v, d) = log_det_distances(&DenseMatrix::diagonal(&[2.0, 3.0]).unwrap()).unwrap();
        assert_eq!(d.d, vec![2.0, 3.0]);
        assert!((v.log_abs() - 6f64.ln()).abs() < 1e-15);
        let (v, d) = log_det_distances(&m(&[&[1.0, 1.0], &[2.0, 2.0]])).unwrap();
        assert!(v.is_zero());
        assert_eq!(d.d[1], 0.0);
    }

    #[test]
    fn distances_bounded_by_row_norms() {
        let a = m(&[&[3.0, 4.0, 0.0], &[1.0, 2.0, 2.0], &[0.0, -1.0, 5.0]]);
        let d = row_distances(&a);
        for (i, di) in d.d.iter().enumerate() {
            assert!(*di >= 0.0 && *di <= dot(a.row(i), a.row(i)).sqrt() + 1e-12);
        }
        assert_eq!(d.d[0], 5.0);
    }

    #[test]
    fn singular_value_examples() {
        assert_eq!(singular_values(&DenseMatrix::identity(3)).sigma, vec![1.0; 3]);
        let s = singular_values(&DenseMatrix::diagonal(&[3.0, -4.0]).unwrap());
        assert!((s.sigma[0] - 3.0).abs() < 1e-14 && (s.sigma[1] - 4.0).abs() < 1e-14);
        let s = singular_values(&m(&[&[1.0, 2.0], &[3.0, 4.0]]));
        assert!((s.sigma[0] * s.sigma[1] - 2.0).abs() < 1e-10);
        assert!(s.sigma[0] <= s.sigma[1]);
        let r = singular_values(&DenseMatrix::zeros(2, 5));
        assert_eq!(r.sigma.len(), 2);
    }

    #[test]
    fn singular_values_of_2x2_match_closed_form() {
        // Eigenvalues of A A^T for [[1,2],[3,4]]: trace 30, det 4, so
        // sigma^2 = 15 -/+ sqrt(221).
        let s = singular_values(&m(&[&[1.0, 2.0], &[3.0, 4.0]]));
        let lo = (15.0 - 221f64.sqrt()).sqrt();
        let hi = (15.0 + 221f64.sqrt()).sqrt();
        assert!((s.sigma[0] - lo).abs() <= 1e-10 * hi);
        assert!((s.sigma[1] - hi).abs() <= 1e-10 * hi);
    }

    #[test]
    fn identity_check_examples() {
        let (l, r) = distance_identity_check(&DenseMatrix::identity(3), 3).unwrap();
        assert!((l - 3.0).abs() < 1e-14 && (r - 3.0).abs() < 1e-14);
        let (l, r) = distance_identity_check(&DenseMatrix::diagonal(&[2.0, 5.0]).unwrap(), 2).unwrap();
        let want = 0.25 + 0.04;
        assert!((l - want).abs() < 1e-14 && (r - want).abs() < 1e-14);
        let rank_one = m(&[&[1.0, 2.0, 3.0], &[2.0, 4.0, 6.0]]);
        assert!(matches!(
            distance_identity_check(&rank_one, 2),
            Err(Error::Degenerate(_))
        ));
        assert!(distance_identity_check(&DenseMatrix::identity(3), 4).is_err());
    }

    #[test]
    fn identity_uses_all_other_rows() {
        // Prior-row distances of [[1,0],[1,1]] are (1, 1), summing to 2;
        // tr((AA^T)^-1) = 3, which the complement distances (1/sqrt 2, 1) reproduce.
        let a = m(&[&[1.0, 0.0], &[1.0, 1.0]]);
        let (l, r) = distance_identity_check(&a, 2).unwrap();
        assert!((l - 3.0).abs() < 1e-12 && (r - 3.0).abs() < 1e-12);
    }
}
