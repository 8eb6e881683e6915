//! Small dense helpers on top of `faer`.

use faer::{c64, Mat, MatRef};

use crate::error::{Error, Result};

pub type CMat = Mat<c64>;

pub fn zeros(rows: usize, cols: usize) -> CMat {
    Mat::zeros(rows, cols)
}

pub fn identity(n: usize) -> CMat {
    Mat::identity(n, n)
}

pub fn real_diagonal(d: &[f64]) -> CMat {
    let n = d.len();
    Mat::from_fn(n, n, |i, j| if i == j { c64::new(d[i], 0.0) } else { c64::new(0.0, 0.0) })
}

pub fn adjoint(m: MatRef<'_, c64>) -> CMat {
    m.adjoint().to_owned()
}

pub fn is_finite(m: MatRef<'_, c64>) -> bool {
    (0..m.ncols()).all(|j| (0..m.nrows()).all(|i| {
        let z = m[(i, j)];
        z.re.is_finite() && z.im.is_finite()
    }))
}

pub fn frobenius(m: MatRef<'_, c64>) -> f64 {
    m.norm_l2()
}

/// Largest singular value. Returns NaN if the backend fails, which makes
/// every downstream `<=` comparison fail.
pub fn opnorm(m: MatRef<'_, c64>) -> f64 {
    if m.nrows() == 0 || m.ncols() == 0 {
        return 0.0;
    }
    match m.singular_values() {
        Ok(s) => s[0],
        Err(_) => f64::NAN,
    }
}

pub fn singular_values(m: MatRef<'_, c64>) -> Result<Vec<f64>> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Ok(Vec::new());
    }
    if !is_finite(m) {
        return Err(Error::InvalidInput("non-finite matrix entries".into()));
    }
    m.singular_values().map_err(|e| Error::Numerical(format!("{e:?}")))
}

/// Inverse via partially pivoted LU.
pub fn inverse(m: MatRef<'_, c64>) -> Result<CMat> {
    use faer::linalg::solvers::DenseSolveCore;
    if m.nrows() != m.ncols() {
        return Err(Error::InvalidInput(format!("cannot invert a {}x{} matrix", m.nrows(), m.ncols())));
    }
    let inv = m.partial_piv_lu().inverse();
    if !is_finite(inv.as_ref()) {
        return Err(Error::NotInvertible { min_abs_eig: 0.0, tol: 0.0 });
    }
    Ok(inv)
}

pub fn max_abs_diff(a: MatRef<'_, c64>, b: MatRef<'_, c64>) -> f64 {
    let mut worst = 0.0f64;
    for j in 0..a.ncols() {
        for i in 0..a.nrows() {
            worst = worst.max((a[(i, j)] - b[(i, j)]).norm());
        }
    }
    worst
}

/// `a * m` for a real scalar.
pub fn scale(m: MatRef<'_, c64>, a: f64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| m[(i, j)] * a)
}

/// `M + s I` for a complex scalar `s`.
pub fn shift(m: MatRef<'_, c64>, s: c64) -> CMat {
    Mat::from_fn(m.nrows(), m.ncols(), |i, j| if i == j { m[(i, j)] + s } else { m[(i, j)] })
}
