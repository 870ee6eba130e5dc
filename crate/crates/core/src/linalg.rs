//! Small dense helpers shared by the algebraic modules.

use std::ops::Range;

use nalgebra::{Cholesky, DMatrix, DVector, SymmetricEigen};

use crate::error::{Error, Result};

/// Weight-grouping closeness: `|a - b| <= tol * (1 + max(|a|, |b|))`.
pub fn close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * (1.0 + a.abs().max(b.abs()))
}

pub fn close_vec(a: &[f64], b: &[f64], tol: f64) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| close(*x, *y, tol))
}

pub fn frobenius(a: &DMatrix<f64>, b: &DMatrix<f64>) -> f64 {
    a.component_mul(b).sum()
}

pub fn max_abs(m: &DMatrix<f64>) -> f64 {
    m.iter().fold(0.0_f64, |acc, x| acc.max(x.abs()))
}

/// Eigen-decomposition of a symmetric matrix with eigenvalues sorted ascending.
pub fn sym_eigen_sorted(m: &DMatrix<f64>) -> (Vec<f64>, DMatrix<f64>) {
    let n = m.nrows();
    if n == 0 {
        return (Vec::new(), DMatrix::zeros(0, 0));
    }
    let sym = (m + m.transpose()) * 0.5;
    let eig = SymmetricEigen::new(sym);
    let mut order: Vec<usize> = (0..n).collect();
    order.sort_by(|&i, &j| eig.eigenvalues[i].total_cmp(&eig.eigenvalues[j]));
    let values = order.iter().map(|&i| eig.eigenvalues[i]).collect();
    let vectors = DMatrix::from_fn(n, n, |r, c| eig.eigenvectors[(r, order[c])]);
    (values, vectors)
}

/// Groups a sorted slice into runs of mutually close values.
pub fn cluster_sorted(values: &[f64], tol: f64) -> Vec<Range<usize>> {
    let mut out = Vec::new();
    let mut start = 0;
    for i in 1..=values.len() {
        if i == values.len() || !close(values[i], values[i - 1], tol) {
            if i > start {
                out.push(start..i);
            }
            start = i;
        }
    }
    out
}

/// Gram-orthonormalises the columns of `v` with respect to `gram`, keeping
/// their order (Gram-Schmidt via a Cholesky factor of `vᵗ G v`).
pub fn orthonormalize(v: &DMatrix<f64>, gram: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if v.ncols() == 0 {
        return Ok(v.clone());
    }
    let inner = v.transpose() * gram * v;
    let chol = Cholesky::new(inner).ok_or(Error::NotPositiveDefinite {
        min_eigenvalue: f64::NAN,
    })?;
    let k = chol.l();
    // v K^{-T}
    let kt_inv = k
        .transpose()
        .solve_upper_triangular(&DMatrix::identity(v.ncols(), v.ncols()))
        .ok_or(Error::NotPositiveDefinite {
            min_eigenvalue: 0.0,
        })?;
    Ok(v * kt_inv)
}

/// Euclidean orthonormal basis for the column span of `m`: left singular
/// vectors with `σ > tol·(1 + σ_max)`.
pub fn column_basis(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let rows = m.nrows();
    if m.ncols() == 0 || rows == 0 {
        return DMatrix::zeros(rows, 0);
    }
    let svd = m.clone().svd(true, false);
    let u = svd.u.expect("requested");
    let sv = &svd.singular_values;
    let cutoff = tol * (1.0 + sv.max());
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] > cutoff).collect();
    DMatrix::from_fn(rows, keep.len(), |r, c| u[(r, keep[c])])
}

/// Euclidean orthonormal basis of the null space of `m`: right singular
/// vectors with `σ ≤ tol·(1 + σ_max)`.
pub fn null_space(m: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let cols = m.ncols();
    if cols == 0 {
        return DMatrix::zeros(0, 0);
    }
    // pad with zero rows so the thin SVD carries a full set of right vectors
    let padded = if m.nrows() < cols {
        let mut p = DMatrix::zeros(cols, cols);
        p.view_mut((0, 0), (m.nrows(), cols)).copy_from(m);
        p
    } else {
        m.clone()
    };
    let svd = padded.svd(false, true);
    let vt = svd.v_t.expect("requested");
    let sv = &svd.singular_values;
    let cutoff = tol * (1.0 + sv.max());
    let keep: Vec<usize> = (0..sv.len()).filter(|&i| sv[i] <= cutoff).collect();
    DMatrix::from_fn(cols, keep.len(), |r, c| vt[(keep[c], r)])
}

/// Smallest singular value of `m` (zero for an empty column set).
pub fn min_singular_value(m: &DMatrix<f64>) -> f64 {
    if m.ncols() == 0 {
        return 0.0;
    }
    if m.nrows() < m.ncols() {
        return 0.0;
    }
    let svd = m.clone().svd(false, false);
    svd.singular_values
        .iter()
        .fold(f64::INFINITY, |acc, s| acc.min(*s))
}

/// Lower-triangular `M` with `Mᵗ M = form`.
///
/// Standard Cholesky yields `L Lᵗ`; reversing the coordinate order turns that
/// into the `Mᵗ M` factorisation with `M` still lower triangular.
pub fn lower_gram_factor(form: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    let n = form.nrows();
    let rev = |m: &DMatrix<f64>| DMatrix::from_fn(n, n, |r, c| m[(n - 1 - r, n - 1 - c)]);
    let flipped = rev(form);
    let chol = Cholesky::new(flipped).ok_or_else(|| Error::NotPositiveDefinite {
        min_eigenvalue: sym_eigen_sorted(form).0.first().copied().unwrap_or(0.0),
    })?;
    Ok(rev(&chol.l().transpose()))
}

pub fn lower_inverse(l: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    l.solve_lower_triangular(&DMatrix::identity(l.nrows(), l.ncols()))
}

pub fn vec_from(v: &[f64]) -> DVector<f64> {
    DVector::from_column_slice(v)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn lower_gram_factor_reproduces_form() {
        let form = DMatrix::from_row_slice(3, 3, &[4.0, 2.0, 0.5, 2.0, 3.0, 0.1, 0.5, 0.1, 2.0]);
        let m = lower_gram_factor(&form).unwrap();
        for r in 0..3 {
            for c in r + 1..3 {
                assert_eq!(m[(r, c)], 0.0);
            }
        }
        assert_relative_eq!(m.transpose() * &m, form, epsilon = 1e-12);
    }

    #[test]
    fn clusters_group_close_values() {
        let v = [1.0, 1.0 + 1e-12, 2.0, 3.0, 3.0];
        let c = cluster_sorted(&v, 1e-9);
        assert_eq!(c, vec![0..2, 2..3, 3..5]);
    }

    #[test]
    fn orthonormalize_respects_gram() {
        let g = DMatrix::from_row_slice(2, 2, &[2.0, 0.5, 0.5, 1.0]);
        let v = DMatrix::identity(2, 2);
        let w = orthonormalize(&v, &g).unwrap();
        assert_relative_eq!(w.transpose() * &g * &w, DMatrix::identity(2, 2), epsilon = 1e-12);
        // first column stays parallel to e0
        assert_eq!(w[(1, 0)], 0.0);
    }
}
