use detperm::estimators::unbiasedness_exhaustive;
use detperm::linalg::{distance_identity_check, log_det_distances, log_det_lu, singular_values};
use detperm::permanent::{permanent_naive, permanent_ryser};
use detperm::spectrum::{default_epsilon, detsmall_bound_check, spectrum_split};
use detperm::{DenseMatrix, EntryModel, MatrixFamily, Result, SeededSource};

const SEED: u64 = 0x5e1f_7e57;

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.abs().max(b.abs())
}

fn unbiasedness() -> Result<bool> {
    let mut ok = true;
    let cases = [
        DenseMatrix::filled(3, 1.0),
        DenseMatrix::from_rows(&[[1.0, 2.0, 1.0], [3.0, 4.0, 2.0], [1.0, 1.0, 5.0]])?,
        MatrixFamily::Uniform { low: 0.0, high: 2.0 }.sample(4, SeededSource::new(SEED, 0))?,
    ];
    for m in &cases {
        let (avg, per) = unbiasedness_exhaustive(m)?;
        ok &= rel(avg, per) <= 1e-10;
    }
    Ok(ok)
}

fn ryser_vs_naive() -> Result<bool> {
    let family = MatrixFamily::Uniform { low: 0.0, high: 1.0 };
    let mut ok = true;
    for t in 0..20 {
        let m = family.sample(7, SeededSource::new(SEED, 100 + t))?;
        ok &= rel(
            permanent_naive(&m)?.value.to_f64(),
            permanent_ryser(&m)?.value.to_f64(),
        ) <= 1e-9;
    }
    Ok(ok)
}

fn determinant_routes() -> Result<bool> {
    let model = EntryModel::gaussian(1.0)?;
    let mut ok = true;
    for t in 0..5 {
        let a = model.sample(60, SeededSource::new(SEED, 200 + t))?;
        let lu = log_det_lu(&a)?.log_abs();
        let (dist, _) = log_det_distances(&a)?;
        ok &= (lu - dist.log_abs()).abs() <= 1e-7;
        ok &= (lu - singular_values(&a).log_product()).abs() <= 1e-7;
    }
    Ok(ok)
}

fn distance_identity() -> Result<bool> {
    let signs = EntryModel::rademacher(1.0)?.sample(40, SeededSource::new(SEED, 300))?;
    let wide = DenseMatrix::from_row_major(20, 40, signs.entries()[..800].to_vec())?;
    let (l, r) = distance_identity_check(&wide, 20)?;
    Ok(rel(l, r) <= 1e-8)
}

fn spectrum() -> Result<bool> {
    let a = EntryModel::rademacher(1.0)?.sample(50, SeededSource::new(SEED, 400))?;
    let eps = default_epsilon(50);
    let s = spectrum_split(&a, eps)?;
    let (lhs, rhs) = detsmall_bound_check(&a, eps)?;
    Ok((s.log_abs_det() - log_det_lu(&a)?.log_abs()).abs() <= 1e-9 && 0.0 >= lhs && lhs >= rhs)
}

type Check = (&'static str, fn() -> Result<bool>);

/// Runs every check, printing one line each. True if all pass.
pub fn run_all() -> bool {
    let checks: [Check; 5] = [
        ("exhaustive unbiasedness E det(A)^2 = per M", unbiasedness),
        ("Ryser agrees with permutation expansion", ryser_vs_naive),
        (
            "LU, row-distance and singular-value determinants agree",
            determinant_routes,
        ),
        ("sum d_i^-2 = sum sigma_i^-2", distance_identity),
        ("truncated/small split and det_small bound", spectrum),
    ];
    let mut all = true;
    for (name, check) in checks {
        let outcome = check();
        let pass = matches!(outcome, Ok(true));
        all &= pass;
        match outcome {
            Err(e) => println!("FAIL  {name}: {e}"),
            _ => println!("{}  {name}", if pass { "ok  " } else { "FAIL" }),
        }
    }
    all
}
