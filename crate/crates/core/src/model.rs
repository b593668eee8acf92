//! Random matrix ensembles with independent entries, and the random lifts
//! used by the determinant estimators.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::matrix::DenseMatrix;
use crate::rng::SeededSource;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EntryKind {
    /// `+c_ij` with probability `p_ij`, else `-c_ij`.
    RademacherScaled,
    /// `c_ij * g` with `g` standard normal.
    GaussianScaled,
    /// `m_ij + eps_ij * c_ij` with `eps_ij = +1` with probability `p_ij`.
    ShiftedBernoulli,
}

/// A per-entry parameter: either one value broadcast to every entry or a
/// full matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum EntryField {
    Scalar(f64),
    Matrix(DenseMatrix),
}

impl EntryField {
    fn at(&self, i: usize, j: usize) -> f64 {
        match self {
            EntryField::Scalar(x) => *x,
            EntryField::Matrix(m) => m[(i, j)],
        }
    }

    fn values(&self) -> Box<dyn Iterator<Item = f64> + '_> {
        match self {
            EntryField::Scalar(x) => Box::new(std::iter::once(*x)),
            EntryField::Matrix(m) => Box::new(m.entries().iter().copied()),
        }
    }

    fn check_dims(&self, name: &str, n: usize) -> Result<()> {
        match self {
            EntryField::Matrix(m) if m.rows() != n || m.cols() != n => Err(Error::Config(format!(
                "{name} is {}x{} but the requested size is {n}x{n}",
                m.rows(),
                m.cols()
            ))),
            _ => Ok(()),
        }
    }

    fn is_zero(&self) -> bool {
        self.values().all(|x| x == 0.0)
    }
}

/// An independent-entry random matrix ensemble.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawModel")]
pub struct EntryModel {
    kind: EntryKind,
    scale: EntryField,
    shift: EntryField,
    bias: EntryField,
    scale_bounds: (f64, f64),
    bias_margin: f64,
}

#[derive(Deserialize)]
struct RawModel {
    kind: EntryKind,
    #[serde(default = "unit_field")]
    scale: EntryField,
    #[serde(default = "zero_field")]
    shift: EntryField,
    #[serde(default = "half_field")]
    bias: EntryField,
    #[serde(default)]
    scale_bounds: Option<(f64, f64)>,
    #[serde(default)]
    bias_margin: Option<f64>,
}

fn unit_field() -> EntryField {
    EntryField::Scalar(1.0)
}
fn zero_field() -> EntryField {
    EntryField::Scalar(0.0)
}
fn half_field() -> EntryField {
    EntryField::Scalar(0.5)
}

impl TryFrom<RawModel> for EntryModel {
    type Error = Error;

    fn try_from(raw: RawModel) -> Result<Self> {
        EntryModel::new(
            raw.kind,
            raw.scale,
            raw.shift,
            raw.bias,
            raw.scale_bounds,
            raw.bias_margin,
        )
    }
}

impl EntryModel {
    /// Validates and builds a model. `scale_bounds` defaults to the observed
    /// range of `scale`; `bias_margin` (the `q` with `q < p_ij < 1 - q`)
    /// defaults to the observed distance of the bias from {0, 1}.
    pub fn new(
        kind: EntryKind,
        scale: EntryField,
        shift: EntryField,
        bias: EntryField,
        scale_bounds: Option<(f64, f64)>,
        bias_margin: Option<f64>,
    ) -> Result<Self> {
        let (lo, hi) = scale
            .values()
            .fold((f64::INFINITY, 0.0f64), |(lo, hi), c| (lo.min(c), hi.max(c)));
        let (c_min, c_max) = scale_bounds.unwrap_or((lo, hi));
        if !(c_min > 0.0 && c_min <= c_max && c_max.is_finite()) {
            return Err(Error::Config(format!(
                "scale bounds must satisfy 0 < c <= C, got ({c_min}, {c_max})"
            )));
        }
        if let Some(c) = scale.values().find(|&c| !(c_min..=c_max).contains(&c)) {
            return Err(Error::Config(format!(
                "scale entry {c} outside [{c_min}, {c_max}]"
            )));
        }
        let observed_margin = bias.values().fold(0.5f64, |q, p| q.min(p).min(1.0 - p));
        let q = bias_margin.unwrap_or(observed_margin);
        if !(q > 0.0 && q <= 0.5) {
            return Err(Error::Config(format!("bias margin q = {q} outside (0, 1/2]")));
        }
        if let Some(p) = bias
            .values()
            .find(|&p| !(p >= q && p <= 1.0 - q && p > 0.0 && p < 1.0))
        {
            return Err(Error::Config(format!(
                "bias entry {p} outside the band [{q}, {}]",
                1.0 - q
            )));
        }
        if kind != EntryKind::ShiftedBernoulli && !shift.is_zero() {
            return Err(Error::Config(
                "a nonzero shift is only meaningful for the shifted-Bernoulli model".into(),
            ));
        }
        if shift.values().any(|m| !m.is_finite()) {
            return Err(Error::Config("shift entries must be finite".into()));
        }
        Ok(Self {
            kind,
            scale,
            shift,
            bias,
            scale_bounds: (c_min, c_max),
            bias_margin: q,
        })
    }

    /// Fair random signs of magnitude `c`.
    pub fn rademacher(c: f64) -> Result<Self> {
        Self::new(
            EntryKind::RademacherScaled,
            EntryField::Scalar(c),
            zero_field(),
            half_field(),
            None,
            None,
        )
    }

    pub fn gaussian(c: f64) -> Result<Self> {
        Self::new(
            EntryKind::GaussianScaled,
            EntryField::Scalar(c),
            zero_field(),
            half_field(),
            None,
            None,
        )
    }

    pub fn shifted_bernoulli(shift: EntryField, scale: EntryField, bias: EntryField) -> Result<Self> {
        Self::new(EntryKind::ShiftedBernoulli, scale, shift, bias, None, None)
    }

    pub fn kind(&self) -> EntryKind {
        self.kind
    }

    pub fn scale_bounds(&self) -> (f64, f64) {
        self.scale_bounds
    }

    pub fn bias_margin(&self) -> f64 {
        self.bias_margin
    }

    /// Draws one `n x n` matrix. Entries are generated in row-major order.
    pub fn sample(&self, n: usize, source: SeededSource) -> Result<DenseMatrix> {
        if n == 0 {
            return Err(Error::Config("matrix size must be at least 1".into()));
        }
        self.scale.check_dims("scale", n)?;
        self.shift.check_dims("shift", n)?;
        self.bias.check_dims("bias", n)?;
        let mut g = source.generator();
        DenseMatrix::from_fn(n, n, |i, j| {
            let c = self.scale.at(i, j);
            match self.kind {
                EntryKind::RademacherScaled => c * g.sign(self.bias.at(i, j)),
                EntryKind::GaussianScaled => c * g.standard_normal(),
                EntryKind::ShiftedBernoulli => self.shift.at(i, j) + c * g.sign(self.bias.at(i, j)),
            }
        })
    }
}

/// Draws one matrix from `model`.
pub fn sample_matrix(model: &EntryModel, n: usize, source: SeededSource) -> Result<DenseMatrix> {
    model.sample(n, source)
}

/// A source of square test matrices, random or fixed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MatrixFamily {
    Model(EntryModel),
    /// Entries iid uniform on `[low, high]`.
    Uniform {
        low: f64,
        high: f64,
    },
    AllOnes,
    /// A single matrix, returned for every draw; its size must match.
    Fixed(DenseMatrix),
}

impl MatrixFamily {
    pub fn sample(&self, n: usize, source: SeededSource) -> Result<DenseMatrix> {
        match self {
            MatrixFamily::Model(m) => m.sample(n, source),
            MatrixFamily::Uniform { low, high } => {
                if low.is_nan() || high.is_nan() || low > high {
                    return Err(Error::Config(format!("empty range [{low}, {high}]")));
                }
                let mut g = source.generator();
                DenseMatrix::from_fn(n, n, |_, _| g.uniform_in(*low, *high))
            }
            MatrixFamily::AllOnes => Ok(DenseMatrix::filled(n, 1.0)),
            MatrixFamily::Fixed(m) => {
                if m.rows() != n || m.cols() != n {
                    return Err(Error::Config(format!(
                        "fixed matrix is {}x{}, requested {n}x{n}",
                        m.rows(),
                        m.cols()
                    )));
                }
                Ok(m.clone())
            }
        }
    }

    pub fn label(&self) -> String {
        match self {
            MatrixFamily::Model(m) => format!("{:?}", m.kind()),
            MatrixFamily::Uniform { low, high } => format!("uniform[{low},{high}]"),
            MatrixFamily::AllOnes => "all-ones".into(),
            MatrixFamily::Fixed(m) => format!("fixed {}x{}", m.rows(), m.cols()),
        }
    }
}

fn check_liftable(m: &DenseMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::Config(format!(
            "expected a square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    if let Some(k) = m.entries().iter().position(|&x| x < 0.0) {
        return Err(Error::Domain(format!(
            "entry ({}, {}) = {} is negative",
            k / m.cols(),
            k % m.cols(),
            m.entries()[k]
        )));
    }
    Ok(())
}

/// `A_ij = sqrt(M_ij) * u_ij` with `u_ij` fair random signs.
pub fn godsil_gutman_lift(m: &DenseMatrix, source: SeededSource) -> Result<DenseMatrix> {
    check_liftable(m)?;
    let mut g = source.generator();
    m.map(|x| x.sqrt() * g.sign(0.5))
}

/// `A_ij = sqrt(M_ij) * g_ij` with `g_ij` standard normal.
pub fn barvinok_lift(m: &DenseMatrix, source: SeededSource) -> Result<DenseMatrix> {
    check_liftable(m)?;
    let mut g = source.generator();
    m.map(|x| x.sqrt() * g.standard_normal())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn src(stream: u64) -> SeededSource {
        SeededSource::new(99, stream)
    }

    #[test]
    fn rademacher_support() {
        let m = EntryModel::rademacher(1.0).unwrap().sample(2, src(0)).unwrap();
        assert!(m.entries().iter().all(|&x| x == 1.0 || x == -1.0));
        let m = EntryModel::rademacher(2.5).unwrap().sample(8, src(1)).unwrap();
        assert!(m.entries().iter().all(|&x| x.abs() == 2.5));
    }

    #[test]
    fn sampling_is_deterministic() {
        let model = EntryModel::gaussian(1.0).unwrap();
        assert_eq!(model.sample(6, src(3)).unwrap(), model.sample(6, src(3)).unwrap());
        assert_ne!(model.sample(6, src(3)).unwrap(), model.sample(6, src(4)).unwrap());
    }

    #[test]
    fn gaussian_sample_mean() {
        // 10^6 standard normals: mean has standard error 1e-3, bound is 4e-3.
        let m = EntryModel::gaussian(1.0).unwrap().sample(1000, src(5)).unwrap();
        let mean = m.entries().iter().sum::<f64>() / 1e6;
        assert!(mean.abs() < 4.0 / 1e3, "mean {mean}");
    }

    #[test]
    fn shifted_bernoulli_support_and_bias() {
        let model = EntryModel::shifted_bernoulli(
            EntryField::Scalar(3.0),
            EntryField::Scalar(0.5),
            EntryField::Scalar(0.25),
        )
        .unwrap();
        let m = model.sample(100, src(6)).unwrap();
        assert!(m.entries().iter().all(|&x| x == 3.5 || x == 2.5));
        // p = 1/4 over 10^4 draws: SE = sqrt(3/16 / 1e4) ~ 0.0043.
        let frac = m.entries().iter().filter(|&&x| x == 3.5).count() as f64 / 1e4;
        assert!((frac - 0.25).abs() < 5.0 * 0.0044, "{frac}");
    }

    #[test]
    fn model_validation() {
        assert!(EntryModel::rademacher(0.0).is_err());
        assert!(EntryModel::gaussian(-1.0).is_err());
        let shifted = EntryModel::new(
            EntryKind::GaussianScaled,
            EntryField::Scalar(1.0),
            EntryField::Scalar(1.0),
            EntryField::Scalar(0.5),
            None,
            None,
        );
        assert!(shifted.is_err());
        let bad_bias = EntryModel::shifted_bernoulli(
            EntryField::Scalar(0.0),
            EntryField::Scalar(1.0),
            EntryField::Scalar(1.0),
        );
        assert!(bad_bias.is_err());
        let tight = EntryModel::new(
            EntryKind::RademacherScaled,
            EntryField::Scalar(1.0),
            EntryField::Scalar(0.0),
            EntryField::Scalar(0.3),
            None,
            Some(0.4),
        );
        assert!(tight.is_err());
        let out_of_bounds = EntryModel::new(
            EntryKind::RademacherScaled,
            EntryField::Scalar(3.0),
            EntryField::Scalar(0.0),
            EntryField::Scalar(0.5),
            Some((1.0, 2.0)),
            None,
        );
        assert!(out_of_bounds.is_err());
    }

    #[test]
    fn dimension_mismatch_is_config_error() {
        let scale = EntryField::Matrix(DenseMatrix::filled(3, 1.0));
        let model = EntryModel::new(
            EntryKind::RademacherScaled,
            scale,
            EntryField::Scalar(0.0),
            EntryField::Scalar(0.5),
            None,
            None,
        )
        .unwrap();
        assert!(model.sample(3, src(0)).is_ok());
        assert!(matches!(model.sample(4, src(0)), Err(Error::Config(_))));
    }

    #[test]
    fn model_json() {
        let model: EntryModel = serde_json::from_str(r#"{"kind": "rademacher_scaled"}"#).unwrap();
        assert_eq!(model, EntryModel::rademacher(1.0).unwrap());
        assert!(serde_json::from_str::<EntryModel>(r#"{"kind": "gaussian_scaled", "scale": 0}"#).is_err());
    }

    #[test]
    fn lift_examples() {
        let ones = DenseMatrix::filled(2, 1.0);
        let a = godsil_gutman_lift(&ones, src(0)).unwrap();
        assert!(a.entries().iter().all(|&x| x.abs() == 1.0));

        let a = godsil_gutman_lift(&DenseMatrix::identity(2), src(1)).unwrap();
        assert_eq!(a[(0, 1)], 0.0);
        assert_eq!(a[(1, 0)], 0.0);
        assert_eq!(a[(0, 0)].abs(), 1.0);

        let m = DenseMatrix::from_rows(&[[4.0, 1.0], [1.0, 4.0]]).unwrap();
        let a = godsil_gutman_lift(&m, src(2)).unwrap();
        let abs: Vec<f64> = a.entries().iter().map(|x| x.abs()).collect();
        assert_eq!(abs, vec![2.0, 1.0, 1.0, 2.0]);

        let z = barvinok_lift(&DenseMatrix::zeros(3, 3), src(3)).unwrap();
        assert!(z.entries().iter().all(|&x| x == 0.0));
        let b = barvinok_lift(&DenseMatrix::identity(2), src(4)).unwrap();
        assert_eq!(b[(0, 1)], 0.0);
        assert!(b[(0, 0)] != 0.0);
    }

    #[test]
    fn lift_rejects_negative_and_rectangular() {
        let m = DenseMatrix::from_rows(&[[1.0, -1.0], [1.0, 1.0]]).unwrap();
        assert!(matches!(godsil_gutman_lift(&m, src(0)), Err(Error::Domain(_))));
        assert!(matches!(barvinok_lift(&m, src(0)), Err(Error::Domain(_))));
        let r = DenseMatrix::zeros(2, 3);
        assert!(matches!(godsil_gutman_lift(&r, src(0)), Err(Error::Config(_))));
    }

    #[test]
    fn barvinok_squares_average_to_m() {
        // E(A_ij^2) = M_ij; over 10^5 lifts the SE of the mean of M*g^2 is
        // M*sqrt(2/1e5).
        let m = DenseMatrix::from_rows(&[[0.5, 2.0], [3.0, 0.0]]).unwrap();
        let trials = 100_000u64;
        let mut acc = [0.0f64; 4];
        for t in 0..trials {
            let a = barvinok_lift(&m, src(t)).unwrap();
            for (s, x) in acc.iter_mut().zip(a.entries()) {
                *s += x * x;
            }
        }
        for (k, s) in acc.iter().enumerate() {
            let mean = s / trials as f64;
            let target = m.entries()[k];
            let se = target * (2.0 / trials as f64).sqrt();
            assert!((mean - target).abs() <= 5.0 * se, "entry {k}: {mean} vs {target}");
        }
    }
}
