#![allow(dead_code)]

use detperm::{DenseMatrix, EntryModel, MatrixFamily, SeededSource};

/// Determinant by cofactor expansion along the first row. Test oracle only.
pub fn det_cofactor(a: &[Vec<f64>]) -> f64 {
    let n = a.len();
    match n {
        1 => a[0][0],
        2 => a[0][0] * a[1][1] - a[0][1] * a[1][0],
        _ => (0..n)
            .map(|j| {
                let minor: Vec<Vec<f64>> = a[1..]
                    .iter()
                    .map(|row| {
                        row.iter()
                            .enumerate()
                            .filter(|&(k, _)| k != j)
                            .map(|(_, x)| *x)
                            .collect()
                    })
                    .collect();
                let sign = if j % 2 == 0 { 1.0 } else { -1.0 };
                sign * a[0][j] * det_cofactor(&minor)
            })
            .sum(),
    }
}

pub fn rows_of(m: &DenseMatrix) -> Vec<Vec<f64>> {
    (0..m.rows()).map(|i| m.row(i).to_vec()).collect()
}

pub fn gaussian(n: usize, stream: u64) -> DenseMatrix {
    EntryModel::gaussian(1.0)
        .unwrap()
        .sample(n, SeededSource::new(2024, stream))
        .unwrap()
}

pub fn signs(n: usize, stream: u64) -> DenseMatrix {
    EntryModel::rademacher(1.0)
        .unwrap()
        .sample(n, SeededSource::new(2024, stream))
        .unwrap()
}

pub fn uniform(n: usize, low: f64, high: f64, stream: u64) -> DenseMatrix {
    MatrixFamily::Uniform { low, high }
        .sample(n, SeededSource::new(2024, stream))
        .unwrap()
}

pub fn rel_diff(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}
