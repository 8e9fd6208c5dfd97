//! Small dense linear-algebra helpers shared by the rank analysis and the
//! least-squares recovery.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Relative singular-value threshold used for every rank decision.
pub const RANK_TOLERANCE: f64 = 1e-9;

/// Singular values of `m`, sorted in decreasing order.
pub fn singular_values(m: &DMatrix<f64>) -> Vec<f64> {
    if m.nrows() == 0 || m.ncols() == 0 {
        return Vec::new();
    }
    let mut sv: Vec<f64> = m.clone().svd(false, false).singular_values.iter().copied().collect();
    sv.sort_by(|a, b| b.total_cmp(a));
    sv
}

/// Numerical rank: singular values below `rel_tol * sigma_max` count as zero.
pub fn rank(m: &DMatrix<f64>, rel_tol: f64) -> usize {
    let sv = singular_values(m);
    let Some(&max) = sv.first() else { return 0 };
    if max == 0.0 {
        return 0;
    }
    sv.iter().filter(|&&s| s > rel_tol * max).count()
}

/// Ratio of smallest to largest singular value over `min(rows, cols)` values.
pub fn conditioning(m: &DMatrix<f64>) -> f64 {
    let sv = singular_values(m);
    match (sv.first(), sv.last()) {
        (Some(&max), Some(&min)) if max > 0.0 => min / max,
        _ => 0.0,
    }
}

/// Orthonormal basis of the orthogonal complement of the column span of `m`.
///
/// Columns of the returned matrix are ordered by increasing singular value.
pub fn orthogonal_complement(m: &DMatrix<f64>, rel_tol: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    // Work with m m' so the left singular vectors span the full row space.
    let gram = m * m.transpose();
    let eig = gram.symmetric_eigen();
    // the dimension comes from the SVD rank; squared singular values sit
    // below the eigen solver's rounding
    let dim = rows - rank(m, rel_tol);
    let mut idx: Vec<usize> = (0..rows).collect();
    idx.sort_by(|&a, &b| eig.eigenvalues[a].total_cmp(&eig.eigenvalues[b]));
    idx.truncate(dim);
    let mut out = DMatrix::zeros(rows, idx.len());
    for (c, &i) in idx.iter().enumerate() {
        let mut v: DVector<f64> = eig.eigenvectors.column(i).into_owned();
        // sign convention: first nonzero component positive
        if let Some(&first) = v.iter().find(|x| x.abs() > 1e-14) {
            if first < 0.0 {
                v = -v;
            }
        }
        out.set_column(c, &v);
    }
    out
}

/// Solves `X * y = z` in the least-squares sense for `X`, where `y` has full
/// row rank. Uses a QR factorization of `y'` instead of forming `(y y')^{-1}`.
///
/// Returns the solution together with the conditioning ratio of `y`.
pub fn right_least_squares(y: &DMatrix<f64>, z: &DMatrix<f64>, rel_tol: f64) -> Result<(DMatrix<f64>, f64)> {
    if y.ncols() != z.ncols() {
        return Err(Error::domain(format!("data matrices disagree on column count: {} vs {}", y.ncols(), z.ncols())));
    }
    if y.nrows() > y.ncols() {
        return Err(Error::domain("more regressors than observations"));
    }
    let cond = conditioning(y);
    if !(cond >= rel_tol) {
        return Err(Error::SingularData { conditioning: cond, tolerance: rel_tol });
    }
    let qr = y.transpose().qr();
    let rhs = qr.q().transpose() * z.transpose();
    let sol =
        qr.r().solve_upper_triangular(&rhs).ok_or(Error::SingularData { conditioning: cond, tolerance: rel_tol })?;
    Ok((sol.transpose(), cond))
}

pub fn max_row_sum(m: &DMatrix<f64>) -> f64 {
    m.row_iter().map(|r| r.iter().map(|v| v.abs()).sum::<f64>()).fold(0.0, f64::max)
}
