//! Dense linear-algebra helpers built on the SVD: numerical rank,
//! truncated pseudoinverse, minimum-norm least squares, and left null spaces.

use nalgebra::{DMatrix, DVector, SVD};

use crate::{Error, Result};

/// Default relative singular-value threshold shared by the rank tests and
/// the pseudoinverse used in simulation.
pub const DEFAULT_REL_TOL: f64 = 1e-8;

fn ensure_finite(matrix: &DMatrix<f64>) -> Result<()> {
    if matrix.iter().all(|v| v.is_finite()) {
        Ok(())
    } else {
        Err(Error::NonFinite)
    }
}

fn check_rel_tol(rel_tol: f64) -> Result<()> {
    if rel_tol > 0.0 && rel_tol < 1.0 {
        Ok(())
    } else {
        Err(Error::InvalidArgument(format!(
            "relative tolerance must lie in (0, 1), got {rel_tol}"
        )))
    }
}

/// Singular values in descending order. Empty matrices give an empty vector.
pub fn singular_values(matrix: &DMatrix<f64>) -> Result<Vec<f64>> {
    ensure_finite(matrix)?;
    if matrix.is_empty() {
        return Ok(Vec::new());
    }
    let mut values: Vec<f64> = matrix.singular_values().iter().copied().collect();
    values.sort_by(|a, b| b.total_cmp(a));
    Ok(values)
}

/// Number of singular values strictly above `rel_tol * sigma_1`.
pub fn numerical_rank(matrix: &DMatrix<f64>, rel_tol: f64) -> Result<usize> {
    check_rel_tol(rel_tol)?;
    let sv = singular_values(matrix)?;
    Ok(rank_from_singular_values(&sv, rel_tol))
}

pub(crate) fn rank_from_singular_values(sorted_desc: &[f64], rel_tol: f64) -> usize {
    match sorted_desc.first() {
        Some(&s1) if s1 > 0.0 => sorted_desc.iter().filter(|&&s| s > rel_tol * s1).count(),
        _ => 0,
    }
}

/// Truncated-SVD pseudoinverse together with the rank it was built from.
#[derive(Debug, Clone)]
pub struct PseudoInverse {
    pub matrix: DMatrix<f64>,
    pub rank: usize,
}

/// Minimum-norm pseudoinverse, discarding singular values at or below
/// `rel_tol * sigma_1`.
pub fn pseudo_inverse(matrix: &DMatrix<f64>, rel_tol: f64) -> Result<PseudoInverse> {
    check_rel_tol(rel_tol)?;
    ensure_finite(matrix)?;
    let (rows, cols) = matrix.shape();
    if rows == 0 || cols == 0 {
        return Ok(PseudoInverse {
            matrix: DMatrix::zeros(cols, rows),
            rank: 0,
        });
    }
    let svd = SVD::new(matrix.clone(), true, true);
    let u = svd.u.as_ref().expect("U requested");
    let v_t = svd.v_t.as_ref().expect("V^T requested");
    let s1 = svd.singular_values.max();
    let cutoff = rel_tol * s1;
    let mut pinv = DMatrix::zeros(cols, rows);
    let mut rank = 0;
    for (k, &s) in svd.singular_values.iter().enumerate() {
        if s1 > 0.0 && s > cutoff {
            rank += 1;
            let vk = v_t.row(k).transpose();
            let uk = u.column(k);
            pinv.ger(1.0 / s, &vk, &uk, 1.0);
        }
    }
    Ok(PseudoInverse { matrix: pinv, rank })
}

/// Minimum-norm least-squares solution of `matrix * x = rhs`, truncating
/// singular values at or below `rel_tol * sigma_1`.
pub fn min_norm_lstsq(
    matrix: &DMatrix<f64>,
    rhs: &DVector<f64>,
    rel_tol: f64,
) -> Result<DVector<f64>> {
    check_rel_tol(rel_tol)?;
    ensure_finite(matrix)?;
    if matrix.nrows() != rhs.len() {
        return Err(Error::Dimension(format!(
            "matrix has {} rows but right-hand side has length {}",
            matrix.nrows(),
            rhs.len()
        )));
    }
    if matrix.is_empty() {
        return Ok(DVector::zeros(matrix.ncols()));
    }
    let svd = SVD::new(matrix.clone(), true, true);
    let s1 = svd.singular_values.max();
    if s1 <= 0.0 {
        return Ok(DVector::zeros(matrix.ncols()));
    }
    svd.solve(rhs, rel_tol * s1)
        .map_err(|e| Error::InvalidArgument(e.to_string()))
}

/// Orthonormal basis (as rows) of the left null space: all `w` with
/// `w^T matrix = 0` up to the relative threshold.
pub fn left_null_space(matrix: &DMatrix<f64>, rel_tol: f64) -> Result<DMatrix<f64>> {
    check_rel_tol(rel_tol)?;
    ensure_finite(matrix)?;
    let (rows, cols) = matrix.shape();
    if rows == 0 {
        return Ok(DMatrix::zeros(0, 0));
    }
    // Zero-pad to at least `rows` columns so the thin SVD returns a full U.
    let padded = if cols < rows {
        let mut p = DMatrix::zeros(rows, rows);
        p.view_mut((0, 0), (rows, cols)).copy_from(matrix);
        p
    } else {
        matrix.clone()
    };
    let svd = SVD::new(padded, true, false);
    let u = svd.u.expect("U requested");
    let sv: Vec<f64> = svd.singular_values.iter().copied().collect();
    let s1 = sv.iter().copied().fold(0.0, f64::max);
    let null_cols: Vec<usize> = (0..rows)
        .filter(|&k| s1 <= 0.0 || sv[k] <= rel_tol * s1)
        .collect();
    let mut basis = DMatrix::zeros(null_cols.len(), rows);
    for (r, &k) in null_cols.iter().enumerate() {
        basis.set_row(r, &u.column(k).transpose());
    }
    Ok(basis)
}
