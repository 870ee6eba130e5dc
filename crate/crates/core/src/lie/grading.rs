use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::algebra::MetricLieAlgebra;
use crate::lie::split::SolvableSplit;
use crate::lie::weights::{weight_decomposition, WeightDecomposition, WeightSpace};
use crate::linalg;

/// Eigenspace decomposition `𝔫 = ⊕ 𝔫_λ` of a positive derivation `D = ad A`.
#[derive(Debug, Clone, PartialEq)]
pub struct Grading {
    /// Coefficients of `A` over the split's `𝔞` basis; empty when the grading
    /// came from an explicit derivation matrix.
    pub derivation: Vec<f64>,
    /// Strictly increasing, all positive.
    pub eigenvalues: Vec<f64>,
    /// Weight spaces making up each `𝔫_{λ_i}`.
    pub eigenspaces: Vec<Vec<WeightSpace>>,
}

impl Grading {
    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    pub fn dims(&self) -> Vec<usize> {
        self.eigenspaces
            .iter()
            .map(|e| e.iter().map(WeightSpace::dim).sum())
            .collect()
    }

    /// Gram-orthonormal basis of `𝔫_{λ_i}` (columns, algebra coordinates).
    pub fn eigenspace_basis(&self, i: usize) -> DMatrix<f64> {
        let cols: Vec<DVector<f64>> = self.eigenspaces[i]
            .iter()
            .flat_map(|w| w.basis.column_iter().map(|c| c.into_owned()))
            .collect();
        match cols.first() {
            Some(c) => {
                let rows = c.len();
                DMatrix::from_columns(&cols).resize_vertically(rows, 0.0)
            }
            None => DMatrix::zeros(0, 0),
        }
    }
}

/// Largest norm of the part of `[𝔫_{λ_i}, 𝔫_{λ_j}]` lying outside `𝔫_{λ_i+λ_j}`
/// (the whole bracket when no such eigenspace exists), over orthonormal
/// basis pairs.
pub fn compatibility_residual(
    alg: &MetricLieAlgebra,
    eigenvalues: &[f64],
    bases: &[DMatrix<f64>],
    tol: f64,
) -> f64 {
    let g = alg.gram();
    let mut worst = 0.0_f64;
    for (i, bi) in bases.iter().enumerate() {
        for (j, bj) in bases.iter().enumerate().skip(i) {
            let target = eigenvalues[i] + eigenvalues[j];
            let dest = eigenvalues
                .iter()
                .position(|&l| linalg::close(l, target, tol.max(1e-9)));
            for u in bi.column_iter() {
                for w in bj.column_iter() {
                    let x = alg
                        .bracket(&u.into_owned(), &w.into_owned())
                        .expect("basis vectors have algebra dimension");
                    let rest = match dest {
                        Some(d) => {
                            let b = &bases[d];
                            &x - b * (b.transpose() * g * &x)
                        }
                        None => x,
                    };
                    worst = worst.max(alg.inner(&rest, &rest).max(0.0).sqrt());
                }
            }
        }
    }
    worst
}

fn assemble(
    alg: &MetricLieAlgebra,
    mut valued: Vec<(f64, WeightSpace)>,
    derivation: Vec<f64>,
    tol: f64,
) -> Result<Grading> {
    if let Some((v, _)) = valued.iter().find(|(v, _)| *v <= 0.0) {
        return Err(Error::NotPositive { eigenvalue: *v });
    }
    valued.sort_by(|a, b| a.0.total_cmp(&b.0));
    let values: Vec<f64> = valued.iter().map(|(v, _)| *v).collect();
    let mut eigenvalues = Vec::new();
    let mut eigenspaces = Vec::new();
    for r in linalg::cluster_sorted(&values, 1e-9) {
        let mean = values[r.clone()].iter().sum::<f64>() / r.len() as f64;
        eigenvalues.push(mean);
        eigenspaces.push(valued[r].iter().map(|(_, w)| w.clone()).collect::<Vec<_>>());
    }
    let grading = Grading {
        derivation,
        eigenvalues,
        eigenspaces,
    };
    let bases: Vec<DMatrix<f64>> = (0..grading.k()).map(|i| grading.eigenspace_basis(i)).collect();
    let residual = compatibility_residual(alg, &grading.eigenvalues, &bases, tol);
    if residual > tol * (1.0 + alg.scale()) {
        return Err(Error::GradingIncompatible { residual });
    }
    Ok(grading)
}

/// Grading of `𝔫` by `D = ad A`, `A = Σ a[j] A_j`.
pub fn grading(alg: &MetricLieAlgebra, split: &SolvableSplit, a: &[f64], tol: f64) -> Result<Grading> {
    let wd = weight_decomposition(alg, split, tol)?;
    grading_from_weights(alg, &wd, a, tol)
}

pub fn grading_from_weights(
    alg: &MetricLieAlgebra,
    wd: &WeightDecomposition,
    a: &[f64],
    tol: f64,
) -> Result<Grading> {
    if let Some(s) = wd.spaces.first() {
        if s.weight.len() != a.len() {
            return Err(Error::DimensionMismatch {
                expected: s.weight.len(),
                got: a.len(),
            });
        }
    }
    let valued = wd.spaces.iter().map(|s| (s.value(a), s.clone())).collect();
    assemble(alg, valued, a.to_vec(), tol)
}

/// Grading of a nilpotent metric algebra by an explicit symmetric matrix `d`
/// acting on coordinates.
///
/// Fails with `GradingIncompatible` when the eigenspaces of `d` do not grade
/// the bracket, which is exactly the case when `d` is not a derivation.
pub fn grade_nilpotent(alg: &MetricLieAlgebra, d: &DMatrix<f64>, tol: f64) -> Result<Grading> {
    let n = alg.dim();
    if d.nrows() != n || d.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: d.nrows(),
        });
    }
    let g = alg.gram();
    let w = linalg::orthonormalize(&DMatrix::identity(n, n), g)?;
    let s = w.transpose() * g * d * &w;
    let asym = linalg::max_abs(&(&s - s.transpose()));
    if asym > tol * (1.0 + linalg::max_abs(&s)) {
        return Err(Error::NotSymmetric { residual: asym });
    }
    let (vals, vecs) = linalg::sym_eigen_sorted(&s);
    let valued = linalg::cluster_sorted(&vals, 1e-9)
        .into_iter()
        .map(|r| {
            let mean = vals[r.clone()].iter().sum::<f64>() / r.len() as f64;
            let basis = &w * vecs.columns(r.start, r.len());
            (
                mean,
                WeightSpace {
                    weight: vec![mean],
                    basis,
                },
            )
        })
        .collect();
    assemble(alg, valued, Vec::new(), tol)
}

/// `𝔰^(i) = 𝔞 ⋉ 𝔫^(i)` realised on the first `k + 1 - i` eigenspaces.
#[derive(Debug, Clone)]
pub struct Quotient {
    pub algebra: MetricLieAlgebra,
    pub split: SolvableSplit,
    /// Maps original coordinates to quotient coordinates; kills the dropped
    /// eigenspaces.
    pub projection: DMatrix<f64>,
    /// Representatives of the quotient basis in original coordinates.
    pub basis: DMatrix<f64>,
    pub eigenvalues: Vec<f64>,
}

/// Label of `v` when it is a multiple of a single basis vector.
pub(crate) fn label_for(alg: &MetricLieAlgebra, v: &DVector<f64>, fallback: String) -> String {
    let big = v.amax();
    let hits: Vec<usize> = (0..v.len()).filter(|&i| v[i].abs() > 1e-12 * big).collect();
    match hits.as_slice() {
        [i] if v[*i] > 0.0 => alg.labels()[*i].clone(),
        [i] => format!("-{}", alg.labels()[*i]),
        _ => fallback,
    }
}

pub fn quotient(alg: &MetricLieAlgebra, split: &SolvableSplit, grading: &Grading, i: usize) -> Result<Quotient> {
    split.check_dim(alg.dim())?;
    let k = grading.k();
    if i == 0 || i > k {
        return Err(Error::IndexOutOfRange { index: i, max: k });
    }
    let dim = alg.dim();
    let g = alg.gram();
    let kept = k + 1 - i;

    let na = split.a().len();
    let mut cols: Vec<DVector<f64>> = split
        .a()
        .iter()
        .map(|&a| {
            let mut e = DVector::zeros(dim);
            e[a] = 1.0;
            e
        })
        .collect();
    let mut labels: Vec<String> = split.a().iter().map(|&a| alg.labels()[a].clone()).collect();
    for j in 0..kept {
        let b = grading.eigenspace_basis(j);
        for (c, col) in b.column_iter().enumerate() {
            let v = col.into_owned();
            labels.push(label_for(alg, &v, format!("n{}_{}", j + 1, c)));
            cols.push(v);
        }
    }
    let basis = DMatrix::from_columns(&cols);
    let dq = basis.ncols();

    // rows for a: G_aa^{-1} E_aᵗ G ; rows for n: vᵗ G
    let ga = DMatrix::from_fn(na, na, |r, c| g[(split.a()[r], split.a()[c])]);
    let ga_inv = ga
        .try_inverse()
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: 0.0 })?;
    let mut projection = DMatrix::zeros(dq, dim);
    let ea_t_g = DMatrix::from_fn(na, dim, |r, c| g[(split.a()[r], c)]);
    projection.rows_mut(0, na).copy_from(&(ga_inv * ea_t_g));
    let nb = basis.columns(na, dq - na).into_owned();
    projection.rows_mut(na, dq - na).copy_from(&(nb.transpose() * g));

    let mut structure = vec![0.0; dq * dq * dq];
    for p in 0..dq {
        for q in p + 1..dq {
            let x = alg.bracket(&cols[p], &cols[q])?;
            let y = &projection * x;
            for r in 0..dq {
                structure[(p * dq + q) * dq + r] = y[r];
                structure[(q * dq + p) * dq + r] = -y[r];
            }
        }
    }
    let gq = basis.transpose() * g * &basis;
    let gq = (&gq + gq.transpose()) * 0.5;
    let algebra = MetricLieAlgebra::new(dq, structure, gq, Some(labels))?;
    let split = SolvableSplit::new((0..na).collect(), (na..dq).collect(), dq)?;
    Ok(Quotient {
        algebra,
        split,
        projection,
        basis,
        eigenvalues: grading.eigenvalues[..kept].to_vec(),
    })
}
