//! Compensated summation and log-domain aggregation.

/// Neumaier's variant of Kahan summation.
#[derive(Debug, Clone, Copy, Default, PartialEq)]
pub struct CompensatedSum {
    sum: f64,
    comp: f64,
}

impl CompensatedSum {
    pub fn new() -> Self {
        Self::default()
    }

    #[inline]
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.comp += (self.sum - t) + x;
        } else {
            self.comp += (x - t) + self.sum;
        }
        self.sum = t;
    }

    /// Folds another partial sum in, keeping both compensation terms.
    pub fn merge(&mut self, other: &Self) {
        self.add(other.sum);
        self.add(other.comp);
    }

    pub fn value(&self) -> f64 {
        self.sum + self.comp
    }
}

impl FromIterator<f64> for CompensatedSum {
    fn from_iter<I: IntoIterator<Item = f64>>(iter: I) -> Self {
        let mut s = Self::new();
        for x in iter {
            s.add(x);
        }
        s
    }
}

/// `ln(sum exp(x_i))`, `-inf` for an empty or all-`-inf` input.
pub fn log_sum_exp(xs: &[f64]) -> f64 {
    let max = xs.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if max == f64::NEG_INFINITY {
        return f64::NEG_INFINITY;
    }
    if max == f64::INFINITY {
        return f64::INFINITY;
    }
    let s: CompensatedSum = xs.iter().map(|x| (x - max).exp()).collect();
    max + s.value().ln()
}

/// Linear-domain median of nonnegative values given by their logs
/// (`-inf` for zero). An even count averages the middle pair.
pub fn log_median(logs: &[f64]) -> f64 {
    let mut v = logs.to_vec();
    v.sort_by(f64::total_cmp);
    let k = v.len();
    if k % 2 == 1 {
        v[k / 2]
    } else {
        log_sum_exp(&v[k / 2 - 1..=k / 2]) - 2f64.ln()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn compensation_recovers_lost_bits() {
        let xs = [1e16, 1.0, -1e16, 1.0];
        let naive: f64 = xs.iter().sum();
        let comp: CompensatedSum = xs.iter().copied().collect();
        assert_eq!(naive, 1.0);
        assert_eq!(comp.value(), 2.0);
    }

    #[test]
    fn median_of_even_count_averages_linearly() {
        let logs = [0.0, 4f64.ln(), f64::NEG_INFINITY, 9f64.ln()];
        assert!((log_median(&logs).exp() - 2.5).abs() < 1e-12);
        let odd = [f64::NEG_INFINITY, f64::NEG_INFINITY, 1.0];
        assert_eq!(log_median(&odd), f64::NEG_INFINITY);
    }

    #[test]
    fn lse_handles_extremes() {
        assert_eq!(log_sum_exp(&[]), f64::NEG_INFINITY);
        assert_eq!(log_sum_exp(&[f64::NEG_INFINITY; 3]), f64::NEG_INFINITY);
        let v = log_sum_exp(&[1000.0, 1000.0]);
        assert!((v - (1000.0 + 2f64.ln())).abs() < 1e-12);
        let v = log_sum_exp(&[0.0, f64::NEG_INFINITY, 2f64.ln()]);
        assert!((v - 3f64.ln()).abs() < 1e-15);
    }
}
