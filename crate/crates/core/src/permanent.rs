//! Exact permanents: permutation expansion and Ryser's formula.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::logval::LogSignedValue;
use crate::matrix::DenseMatrix;
use crate::par::map_indexed;
use crate::sum::CompensatedSum;

pub const NAIVE_LIMIT: usize = 10;
pub const RYSER_LIMIT: usize = 30;
/// Sizes up to this also report the permanent as a plain `f64`.
pub const EXACT_SMALL_LIMIT: usize = 12;

/// Ryser's subset range is cut into fixed blocks of this many Gray-code
/// steps; the block layout, not the thread count, fixes the summation order.
const BLOCK_BITS: u32 = 16;

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct PermanentValue {
    #[serde(skip)]
    pub value: LogSignedValue,
    pub exact_small: Option<f64>,
}

impl PermanentValue {
    /// `scaled_sum * exp(log_scale)` where `row_scales` multiply to
    /// `exp(log_scale)`; the plain value is formed by direct multiplication.
    fn from_scaled(scaled_sum: f64, row_scales: &[f64], n: usize) -> Self {
        let log_scale: f64 = row_scales.iter().map(|s| s.ln()).sum();
        let value = LogSignedValue::from_f64(scaled_sum).scale_log(log_scale);
        let plain = row_scales.iter().fold(scaled_sum, |acc, s| acc * s);
        let exact_small = (n <= EXACT_SMALL_LIMIT && plain.is_finite()).then_some(plain);
        Self { value, exact_small }
    }

    fn zero(n: usize) -> Self {
        Self::from_scaled(0.0, &[], n)
    }

    /// `ln(per)`, or `None` unless the permanent is positive.
    pub fn ln(&self) -> Option<f64> {
        self.value.ln()
    }
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

/// Rescales each row to unit max-norm. Returns the scaled matrix and the
/// row scales, or `None` if some row is zero. Rows already at unit scale are
/// left untouched so small integer matrices stay exact.
fn normalize_rows(a: &DenseMatrix) -> Option<(DenseMatrix, Vec<f64>)> {
    let mut scaled = a.clone();
    let mut scales = Vec::with_capacity(a.rows());
    for i in 0..a.rows() {
        let s = a.row(i).iter().fold(0.0f64, |m, x| m.max(x.abs()));
        if s == 0.0 {
            return None;
        }
        let s = if (0.5..=2.0).contains(&s) { 1.0 } else { s };
        scales.push(s);
        for j in 0..a.cols() {
            scaled[(i, j)] /= s;
        }
    }
    Some((scaled, scales))
}

/// The permanent as a sum over all `n!` permutations. Limited to `n <= 10`.
pub fn permanent_naive(a: &DenseMatrix) -> Result<PermanentValue> {
    require_square(a)?;
    let n = a.rows();
    if n > NAIVE_LIMIT {
        return Err(Error::Size {
            operation: "permanent_naive",
            n,
            limit: NAIVE_LIMIT,
            hint: "; use permanent_ryser",
        });
    }
    let Some((b, scales)) = normalize_rows(a) else {
        return Ok(PermanentValue::zero(n));
    };

    fn expand(b: &DenseMatrix, row: usize, used: u32, prod: f64, acc: &mut CompensatedSum) {
        if row == b.rows() {
            acc.add(prod);
            return;
        }
        for j in 0..b.cols() {
            if used & (1 << j) == 0 {
                let x = b[(row, j)];
                if x != 0.0 {
                    expand(b, row + 1, used | (1 << j), prod * x, acc);
                }
            }
        }
    }

    let mut acc = CompensatedSum::new();
    expand(&b, 0, 0, 1.0, &mut acc);
    Ok(PermanentValue::from_scaled(acc.value(), &scales, n))
}

/// Ryser's inclusion-exclusion formula
/// `per A = (-1)^n sum_S (-1)^|S| prod_i sum_{j in S} a_ij`, visiting column
/// subsets in Gray-code order so each step updates the row sums in O(n).
/// Limited to `n <= 30`.
pub fn permanent_ryser(a: &DenseMatrix) -> Result<PermanentValue> {
    require_square(a)?;
    let n = a.rows();
    if n > RYSER_LIMIT {
        return Err(Error::Size {
            operation: "permanent_ryser",
            n,
            limit: RYSER_LIMIT,
            hint: "",
        });
    }
    let Some((b, scales)) = normalize_rows(a) else {
        return Ok(PermanentValue::zero(n));
    };
    let columns = b.transpose();
    let total: u64 = 1 << n;
    let block = 1u64 << BLOCK_BITS.min(n as u32);
    let blocks = (total / block) as usize;

    let partials = map_indexed(blocks, |k| {
        let lo = k as u64 * block;
        ryser_block(&columns, lo, lo + block)
    });
    let mut acc = CompensatedSum::new();
    for p in &partials {
        acc.merge(p);
    }
    let mut sum = acc.value();
    if n % 2 == 1 {
        sum = -sum;
    }
    Ok(PermanentValue::from_scaled(sum, &scales, n))
}

/// Signed Ryser terms for Gray codes of the step indices `lo..hi`.
fn ryser_block(columns: &DenseMatrix, lo: u64, hi: u64) -> CompensatedSum {
    let n = columns.rows();
    let gray = |k: u64| k ^ (k >> 1);
    let mut sums = vec![0.0f64; n];
    let start = gray(lo);
    for j in (0..n).filter(|&j| start >> j & 1 == 1) {
        for (s, x) in sums.iter_mut().zip(columns.row(j)) {
            *s += x;
        }
    }
    let term = |sums: &[f64], code: u64| {
        let prod: f64 = sums.iter().product();
        if code.count_ones() % 2 == 1 {
            -prod
        } else {
            prod
        }
    };
    let mut acc = CompensatedSum::new();
    acc.add(term(&sums, start));
    for k in lo + 1..hi {
        let j = k.trailing_zeros() as usize;
        let code = gray(k);
        let col = columns.row(j);
        if code >> j & 1 == 1 {
            for (s, x) in sums.iter_mut().zip(col) {
                *s += x;
            }
        } else {
            for (s, x) in sums.iter_mut().zip(col) {
                *s -= x;
            }
        }
        acc.add(term(&sums, code));
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn per(v: PermanentValue) -> f64 {
        v.exact_small.unwrap()
    }

    #[test]
    fn naive_examples() {
        assert_eq!(per(permanent_naive(&DenseMatrix::identity(3)).unwrap()), 1.0);
        assert_eq!(per(permanent_naive(&DenseMatrix::filled(4, 1.0)).unwrap()), 24.0);
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert!((per(permanent_naive(&m).unwrap()) - 10.0).abs() < 1e-12);
    }

    #[test]
    fn ryser_examples() {
        let v = permanent_ryser(&DenseMatrix::filled(6, 1.0)).unwrap();
        assert!((per(v) - 720.0).abs() < 1e-9);
        let v = permanent_ryser(&DenseMatrix::diagonal(&[2.0, 3.0, 4.0]).unwrap()).unwrap();
        assert!((per(v) - 24.0).abs() < 1e-12);
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [3.0, 4.0]]).unwrap();
        assert!((per(permanent_ryser(&m).unwrap()) - 10.0).abs() < 1e-12);
        let one = DenseMatrix::from_rows(&[[-5.0]]).unwrap();
        assert_eq!(per(permanent_ryser(&one).unwrap()), -5.0);
    }

    #[test]
    fn size_limits() {
        let big = DenseMatrix::filled(11, 1.0);
        assert!(matches!(
            permanent_naive(&big),
            Err(Error::Size { limit: 10, .. })
        ));
        let huge = DenseMatrix::filled(31, 1.0);
        assert!(matches!(
            permanent_ryser(&huge),
            Err(Error::Size { limit: 30, .. })
        ));
        assert!(permanent_ryser(&DenseMatrix::zeros(2, 3)).is_err());
    }

    #[test]
    fn zero_row_gives_zero() {
        let m = DenseMatrix::from_rows(&[[1.0, 2.0], [0.0, 0.0]]).unwrap();
        assert!(permanent_ryser(&m).unwrap().value.is_zero());
        assert!(permanent_naive(&m).unwrap().value.is_zero());
    }

    #[test]
    fn beyond_float_range_in_log_domain() {
        // per(J_20 * 1e20) = 20! * 1e400, far past f64::MAX.
        let m = DenseMatrix::filled(20, 1e20);
        let v = permanent_ryser(&m).unwrap();
        let want: f64 = (1..=20).map(|k| (k as f64).ln()).sum::<f64>() + 400.0 * 10f64.ln();
        // All-ones Ryser cancels about 8 digits at n = 20.
        assert!((v.value.log_abs() - want).abs() < 1e-6);
        assert_eq!(v.exact_small, None);
    }
}
