//! Randomized determinant estimators for the matrix permanent.
//!
//! For a nonnegative matrix `M`, lift it to `A_ij = sqrt(M_ij) * u_ij` with
//! iid mean-zero, unit-variance `u_ij`; then `E[det(A)^2] = per(M)`. Fair
//! random signs give the Godsil-Gutman estimator, standard normals give
//! Barvinok's. The crate pairs the estimators with exact permanent oracles,
//! two independent log-determinant routes, the truncated-spectrum split of
//! `|det A|`, and a seeded experiment harness for the concentration
//! behaviour of `log|det A|`.

pub mod error;
pub mod estimators;
pub mod experiments;
pub mod linalg;
pub mod logval;
pub mod matrix;
pub mod model;
pub mod par;
pub mod permanent;
pub mod report;
pub mod rng;
pub mod spectrum;
pub mod stats;
pub mod sum;

pub use error::{Error, Result};
pub use logval::LogSignedValue;
pub use matrix::DenseMatrix;
pub use model::{EntryField, EntryKind, EntryModel, MatrixFamily};
pub use rng::SeededSource;

/// Seed used when callers do not pick one.
pub const DEFAULT_SEED: u64 = 20_090_611;
