use nalgebra::{DMatrix, DVector};

use crate::curvature::scaled_extension;
use crate::embed::representation::{direct_sum, Representation};
use crate::error::{Error, Result};
use crate::lie::{derivation_residual, MetricLieAlgebra, SolvableSplit};
use crate::linalg;
use crate::triangular::MetricKind;

/// Appends diagonal characters of `𝔞` so the pullback on `𝔞` becomes
/// `c·gram`.
///
/// With `R = c·gram|𝔞 − φ*⟨,⟩|𝔞 = Q Λ Qᵗ` over an orthonormal `𝔞` basis, the
/// added block sends `A` to `diag(g A)` with `g = sqrt(Λ/w) Qᵗ`, `w` the
/// diagonal weight of the metric, so its pullback is `w·gᵗg = R`. Rows of `g`
/// for zero eigenvalues are dropped.
pub fn extend_abelian(
    rep: &Representation,
    alg: &MetricLieAlgebra,
    split: &SolvableSplit,
    c: f64,
    kind: MetricKind,
) -> Result<Representation> {
    split.check_dim(alg.dim())?;
    let dim = alg.dim();
    let na = split.a().len();
    let ea = DMatrix::from_fn(dim, na, |r, col| if r == split.a()[col] { 1.0 } else { 0.0 });
    let wa = linalg::orthonormalize(&ea, alg.gram())?;
    let full = rep.pullback(kind);
    let p = wa.transpose() * &full * &wa;
    let residual = DMatrix::identity(na, na) * c - &p;
    let (vals, vecs) = linalg::sym_eigen_sorted(&residual);
    let floor = 1e-12 * (1.0 + c.abs());
    if let Some(&min) = vals.first() {
        if min < -floor {
            let (pv, _) = linalg::sym_eigen_sorted(&p);
            return Err(Error::ScaleTooSmall {
                requested: c,
                min_feasible: pv.last().copied(),
            });
        }
    }
    let w = kind.diagonal_weight();
    let rows: Vec<usize> = (0..na).filter(|&i| vals[i] > floor).collect();
    if rows.is_empty() {
        return Ok(rep.clone());
    }
    // g over the orthonormal a basis, then over the split's own a basis
    let g = DMatrix::from_fn(rows.len(), na, |r, j| (vals[rows[r]] / w).sqrt() * vecs[(j, rows[r])]);
    let wa_a = DMatrix::from_fn(na, na, |r, col| wa[(split.a()[r], col)]);
    let wa_inv = wa_a
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
    let g_src = &g * wa_inv;
    let m = rows.len();
    let mut mats = vec![DMatrix::zeros(m, m); dim];
    for (col, &ai) in split.a().iter().enumerate() {
        for r in 0..m {
            mats[ai][(r, r)] = g_src[(r, col)];
        }
    }
    let added = Representation::single(mats, "abelian", Vec::new())?;
    direct_sum(rep, &added)
}

/// `ℝA ⋉ 𝔫` with `ad A = D`, `⟨A,A⟩ = 1`, `A ⟂ 𝔫`; `A` is basis vector 0.
///
/// With `normalize`, `D` is first rescaled so its smallest eigenvalue is 1.
pub fn rank_one_extension(
    nilalg: &MetricLieAlgebra,
    d: &DMatrix<f64>,
    normalize: bool,
) -> Result<(MetricLieAlgebra, SolvableSplit)> {
    let n = nilalg.dim();
    if d.nrows() != n || d.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: d.nrows(),
        });
    }
    let scale = 1.0 + linalg::max_abs(d) * (1.0 + nilalg.scale());
    let residual = derivation_residual(nilalg, d);
    if residual > 1e-9 * scale {
        return Err(Error::NotDerivation { residual });
    }
    let gd = nilalg.gram() * d;
    let asym = linalg::max_abs(&(&gd - gd.transpose()));
    if asym > 1e-9 * (1.0 + linalg::max_abs(&gd)) {
        return Err(Error::NotSymmetric { residual: asym });
    }
    let w = linalg::orthonormalize(&DMatrix::identity(n, n), nilalg.gram())?;
    let s = w.transpose() * &gd * &w;
    let (vals, _) = linalg::sym_eigen_sorted(&s);
    let min = vals.first().copied().unwrap_or(0.0);
    if min <= 0.0 {
        return Err(Error::NotPositive { eigenvalue: min });
    }
    let factor = if normalize { 1.0 / min } else { 1.0 };
    let ext = scaled_extension(nilalg, d, factor)?;
    let split = SolvableSplit::new(vec![0], (1..=n).collect(), n + 1)?;
    Ok((ext, split))
}

/// `Id` on the orthogonal complement of `[𝔫,𝔫]` and `2·Id` on `[𝔫,𝔫]`, the
/// standard positive derivation of a 2-step nilpotent algebra.
pub fn two_step_derivation(nilalg: &MetricLieAlgebra) -> Result<DMatrix<f64>> {
    let n = nilalg.dim();
    let cols: Vec<_> = (0..n)
        .flat_map(|i| (i + 1..n).map(move |j| (i, j)))
        .map(|(i, j)| nilalg.bracket_basis(i, j))
        .collect();
    let d = if cols.is_empty() {
        DMatrix::identity(n, n)
    } else {
        // a maximal independent subset of the brackets themselves, so a
        // coordinate-aligned [𝔫,𝔫] gives an exact projection
        let tol = 1e-12 * (1.0 + nilalg.scale());
        let mut chosen: Vec<DVector<f64>> = Vec::new();
        for c in cols {
            let mut trial = chosen.clone();
            trial.push(c);
            if linalg::column_basis(&DMatrix::from_columns(&trial), tol).ncols() == trial.len() {
                chosen = trial;
            }
        }
        let z = linalg::orthonormalize(&DMatrix::from_columns(&chosen), nilalg.gram())?;
        DMatrix::identity(n, n) + &z * (z.transpose() * nilalg.gram())
    };
    let residual = derivation_residual(nilalg, &d);
    if residual > 1e-9 * (1.0 + nilalg.scale()) {
        return Err(Error::NotDerivation { residual });
    }
    Ok(d)
}
