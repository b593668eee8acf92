//! Signed values stored in the log domain.
//!
//! Determinants and permanents of moderately sized matrices overflow `f64`
//! long before the interesting regime (n! passes `f64::MAX` at n = 171), so
//! every magnitude in this crate is carried as a sign and a natural log.

use std::cmp::Ordering;
use std::fmt;
use std::ops::Mul;

/// A real number `sign * exp(log_abs)`. Zero is `(0, -inf)`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LogSignedValue {
    sign: i8,
    log_abs: f64,
}

impl LogSignedValue {
    pub const ZERO: Self = Self {
        sign: 0,
        log_abs: f64::NEG_INFINITY,
    };
    pub const ONE: Self = Self {
        sign: 1,
        log_abs: 0.0,
    };

    /// Builds a value from its parts. A zero sign or a `-inf` log collapses
    /// to the canonical zero.
    pub fn new(sign: i8, log_abs: f64) -> Self {
        debug_assert!(!log_abs.is_nan());
        if sign == 0 || log_abs == f64::NEG_INFINITY {
            Self::ZERO
        } else {
            Self {
                sign: sign.signum(),
                log_abs,
            }
        }
    }

    pub fn from_f64(x: f64) -> Self {
        if x == 0.0 {
            Self::ZERO
        } else {
            Self::new(if x > 0.0 { 1 } else { -1 }, x.abs().ln())
        }
    }

    pub fn sign(&self) -> i8 {
        self.sign
    }

    pub fn log_abs(&self) -> f64 {
        self.log_abs
    }

    pub fn is_zero(&self) -> bool {
        self.sign == 0
    }

    /// Converts back to `f64`; may overflow to infinity.
    pub fn to_f64(&self) -> f64 {
        f64::from(self.sign) * self.log_abs.exp()
    }

    /// `ln(x)` for positive values, `None` otherwise.
    pub fn ln(&self) -> Option<f64> {
        (self.sign > 0).then_some(self.log_abs)
    }

    pub fn square(&self) -> Self {
        Self::new(self.sign * self.sign, 2.0 * self.log_abs)
    }

    pub fn abs(&self) -> Self {
        Self::new(self.sign.abs(), self.log_abs)
    }

    pub fn powi(&self, k: i32) -> Self {
        if k == 0 {
            return Self::ONE;
        }
        let sign = if k % 2 == 0 { self.sign.abs() } else { self.sign };
        Self::new(sign, self.log_abs * f64::from(k))
    }

    /// Scales by `exp(log_factor)` (a positive factor).
    pub fn scale_log(&self, log_factor: f64) -> Self {
        Self::new(self.sign, self.log_abs + log_factor)
    }

    /// Compares absolute values.
    pub fn cmp_abs(&self, other: &Self) -> Ordering {
        self.log_abs.total_cmp(&other.log_abs)
    }
}

impl Mul for LogSignedValue {
    type Output = Self;

    fn mul(self, rhs: Self) -> Self {
        Self::new(self.sign * rhs.sign, self.log_abs + rhs.log_abs)
    }
}

impl fmt::Display for LogSignedValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.sign {
            0 => write!(f, "0"),
            1 => write!(f, "exp({})", self.log_abs),
            _ => write!(f, "-exp({})", self.log_abs),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_is_canonical() {
        assert_eq!(LogSignedValue::from_f64(0.0), LogSignedValue::ZERO);
        assert_eq!(LogSignedValue::new(1, f64::NEG_INFINITY), LogSignedValue::ZERO);
        assert_eq!(LogSignedValue::new(0, 3.0), LogSignedValue::ZERO);
        assert_eq!(LogSignedValue::ZERO.square(), LogSignedValue::ZERO);
    }

    #[test]
    fn multiplication_adds_logs() {
        let a = LogSignedValue::from_f64(-2.0);
        let b = LogSignedValue::from_f64(3.0);
        let p = a * b;
        assert_eq!(p.sign(), -1);
        assert!((p.to_f64() + 6.0).abs() < 1e-12);
        assert_eq!((a * LogSignedValue::ZERO).sign(), 0);
    }

    #[test]
    fn huge_magnitudes_survive() {
        // 1e9 is the representability bound on |log_abs|.
        let big = LogSignedValue::new(1, 1e9);
        assert_eq!((big * big).log_abs(), 2e9);
        assert_eq!(big.to_f64(), f64::INFINITY);
        assert_eq!(LogSignedValue::new(-1, 1e9).powi(2).sign(), 1);
    }
}
