use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::algebra::{generic_coefficients, MetricLieAlgebra};
use crate::lie::split::SolvableSplit;
use crate::linalg;

/// A simultaneous eigenspace of `ad 𝔞` on `𝔫`.
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSpace {
    /// `α(A_j)` for the split's `𝔞` basis vectors, in order.
    pub weight: Vec<f64>,
    /// Gram-orthonormal columns, in the algebra's coordinates.
    pub basis: DMatrix<f64>,
}

impl WeightSpace {
    pub fn dim(&self) -> usize {
        self.basis.ncols()
    }

    /// `α(A)` for `A = Σ coeffs[j] A_j`.
    pub fn value(&self, coeffs: &[f64]) -> f64 {
        self.weight.iter().zip(coeffs).map(|(w, c)| w * c).sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WeightDecomposition {
    pub spaces: Vec<WeightSpace>,
}

impl WeightDecomposition {
    pub fn weights(&self) -> Vec<Vec<f64>> {
        self.spaces.iter().map(|s| s.weight.clone()).collect()
    }

    pub fn total_dim(&self) -> usize {
        self.spaces.iter().map(WeightSpace::dim).sum()
    }
}

/// Splits the span of `group` (Euclidean-orthonormal columns) into eigenspaces
/// of `s` restricted to it.
fn refine(group: &DMatrix<f64>, s: &DMatrix<f64>, tol: f64) -> Vec<DMatrix<f64>> {
    let restricted = group.transpose() * s * group;
    let (vals, vecs) = linalg::sym_eigen_sorted(&restricted);
    linalg::cluster_sorted(&vals, tol)
        .into_iter()
        .map(|r| group * vecs.columns(r.start, r.len()))
        .collect()
}

/// Orthonormal basis of the span of `q` built from the projections of the
/// coordinate vectors, earliest first, so coordinate-aligned spaces keep
/// their basis vectors.
fn canonical_basis(q: &DMatrix<f64>) -> DMatrix<f64> {
    let d = q.ncols();
    let mut resid = q * q.transpose();
    let mut chosen: Vec<DVector<f64>> = Vec::with_capacity(d);
    while chosen.len() < d {
        let norms: Vec<f64> = resid.column_iter().map(|c| c.norm()).collect();
        let best = norms.iter().copied().fold(0.0, f64::max);
        if best < 1e-6 {
            return q.clone();
        }
        let j = norms.iter().position(|&n| n >= 0.5 * best).unwrap();
        let v = resid.column(j) / norms[j];
        resid -= &v * (v.transpose() * &resid);
        chosen.push(v);
    }
    DMatrix::from_columns(&chosen)
}

/// Simultaneous orthogonal diagonalisation of `{ad A_j |𝔫}`.
///
/// The family is first split along a generic combination of the `A_j`, then
/// each piece is refined against every `A_j` in turn, so coincidences in the
/// generic combination cannot merge distinct weights.
pub fn weight_decomposition(
    alg: &MetricLieAlgebra,
    split: &SolvableSplit,
    tol: f64,
) -> Result<WeightDecomposition> {
    split.check_dim(alg.dim())?;
    let dim = alg.dim();
    let g = alg.gram();
    let n_coords = DMatrix::from_fn(dim, split.n().len(), |r, c| {
        if r == split.n()[c] {
            1.0
        } else {
            0.0
        }
    });
    let w = linalg::orthonormalize(&n_coords, g)?;
    let m = w.ncols();
    if m == 0 {
        return Ok(WeightDecomposition { spaces: Vec::new() });
    }
    let scale = 1.0 + alg.scale();

    let mut family = Vec::with_capacity(split.a().len());
    for &ai in split.a() {
        let image = alg.ad_basis(ai) * &w;
        let inside = &w * (w.transpose() * g * &image);
        let leak = linalg::max_abs(&(&image - &inside));
        if leak > tol * scale {
            return Err(Error::NotInvariant(format!(
                "ad {} does not preserve the nilradical (leak {leak:.3e})",
                alg.labels()[ai]
            )));
        }
        let s = w.transpose() * g * &image;
        let asym = linalg::max_abs(&(&s - s.transpose()));
        if asym > tol * (1.0 + linalg::max_abs(&s)) {
            return Err(Error::NotSymmetric { residual: asym });
        }
        family.push((&s + s.transpose()) * 0.5);
    }
    for i in 0..family.len() {
        for j in i + 1..family.len() {
            let comm = &family[i] * &family[j] - &family[j] * &family[i];
            let r = linalg::max_abs(&comm);
            if r > tol * (1.0 + linalg::max_abs(&family[i]) * linalg::max_abs(&family[j])) {
                return Err(Error::NotCommuting { residual: r });
            }
        }
    }

    if family.is_empty() {
        return Ok(WeightDecomposition {
            spaces: vec![WeightSpace {
                weight: Vec::new(),
                basis: w,
            }],
        });
    }

    let coeffs = generic_coefficients(family.len());
    let generic = family
        .iter()
        .zip(&coeffs)
        .fold(DMatrix::zeros(m, m), |acc, (s, c)| acc + s * *c);
    let mut groups = refine(&DMatrix::identity(m, m), &generic, tol);
    for s in &family {
        groups = groups.iter().flat_map(|q| refine(q, s, tol)).collect();
    }

    let mut spaces = Vec::with_capacity(groups.len());
    for q in groups {
        let d = q.ncols() as f64;
        let weight: Vec<f64> = family
            .iter()
            .map(|s| (q.transpose() * s * &q).trace() / d)
            .collect();
        for (s, a) in family.iter().zip(&weight) {
            let r = linalg::max_abs(&(s * &q - &q * *a));
            if r > tol.sqrt() * (1.0 + linalg::max_abs(s)) {
                return Err(Error::NotCommuting { residual: r });
            }
        }
        spaces.push(WeightSpace {
            weight,
            basis: &w * canonical_basis(&q),
        });
    }
    // merge numerically equal weights, then order lexicographically
    let mut merged: Vec<WeightSpace> = Vec::new();
    for s in spaces {
        if let Some(t) = merged
            .iter_mut()
            .find(|t| linalg::close_vec(&t.weight, &s.weight, tol))
        {
            let cols: Vec<_> = t
                .basis
                .column_iter()
                .chain(s.basis.column_iter())
                .map(|c| c.into_owned())
                .collect();
            t.basis = DMatrix::from_columns(&cols);
        } else {
            merged.push(s);
        }
    }
    merged.sort_by(|a, b| {
        a.weight
            .iter()
            .zip(&b.weight)
            .map(|(x, y)| x.total_cmp(y))
            .find(|o| o.is_ne())
            .unwrap_or(std::cmp::Ordering::Equal)
    });
    Ok(WeightDecomposition { spaces: merged })
}

/// Coefficients `μ` minimising `|Σ μ_i p_i|` subject to `Σ μ_i = 1`.
fn affine_minimizer(points: &[DVector<f64>], active: &[usize]) -> Vec<f64> {
    let k = active.len();
    let mut kkt = DMatrix::zeros(k + 1, k + 1);
    for (r, &i) in active.iter().enumerate() {
        for (c, &j) in active.iter().enumerate() {
            kkt[(r, c)] = points[i].dot(&points[j]);
        }
        kkt[(r, k)] = 1.0;
        kkt[(k, r)] = 1.0;
    }
    let mut rhs = DVector::zeros(k + 1);
    rhs[k] = 1.0;
    let sol = kkt
        .clone()
        .lu()
        .solve(&rhs)
        .or_else(|| kkt.svd(true, true).solve(&rhs, 1e-14).ok())
        .unwrap_or_else(|| {
            let mut v = DVector::zeros(k + 1);
            v[0] = 1.0;
            v
        });
    sol.iter().take(k).copied().collect()
}

fn combine(points: &[DVector<f64>], active: &[usize], lambda: &[f64]) -> DVector<f64> {
    let mut x = DVector::zeros(points[0].len());
    for (&i, &l) in active.iter().zip(lambda) {
        x += &points[i] * l;
    }
    x
}

/// Minimum-norm point of the convex hull of `points` (Wolfe's algorithm).
pub(crate) fn min_norm_point(points: &[DVector<f64>]) -> DVector<f64> {
    let max_sq = points.iter().map(|p| p.norm_squared()).fold(0.0, f64::max);
    let first = (0..points.len())
        .min_by(|&i, &j| points[i].norm_squared().total_cmp(&points[j].norm_squared()))
        .expect("nonempty");
    let mut active = vec![first];
    let mut lambda = vec![1.0];
    let mut x = points[first].clone();
    let eps = 1e-14;
    for _ in 0..(50 * points.len() + 50) {
        let (j, v) = (0..points.len())
            .map(|i| (i, x.dot(&points[i])))
            .min_by(|a, b| a.1.total_cmp(&b.1))
            .unwrap();
        if x.norm_squared() - v <= 1e-12 * max_sq || active.contains(&j) {
            break;
        }
        active.push(j);
        lambda.push(0.0);
        loop {
            let mu = affine_minimizer(points, &active);
            if mu.iter().all(|&m| m > eps) {
                lambda = mu;
                x = combine(points, &active, &lambda);
                break;
            }
            let mut theta = 1.0_f64;
            let mut hit = 0;
            for i in 0..active.len() {
                if mu[i] <= eps {
                    let d = lambda[i] - mu[i];
                    if d > 0.0 && lambda[i] / d < theta {
                        theta = lambda[i] / d;
                        hit = i;
                    }
                }
            }
            for i in 0..active.len() {
                lambda[i] = (1.0 - theta) * lambda[i] + theta * mu[i];
            }
            lambda[hit] = 0.0;
            let keep: Vec<usize> = (0..active.len()).filter(|&i| lambda[i] > eps).collect();
            active = keep.iter().map(|&i| active[i]).collect();
            lambda = keep.iter().map(|&i| lambda[i]).collect();
            let total: f64 = lambda.iter().sum();
            lambda.iter_mut().for_each(|l| *l /= total);
            x = combine(points, &active, &lambda);
            if active.len() <= 1 {
                break;
            }
        }
    }
    x
}

/// An element `A ∈ 𝔞` with `α(A) > 0` for every weight, as coefficients over
/// the split's `𝔞` basis.
///
/// Among unit vectors this maximises `min_α α(A)/|α|` (the centre of the
/// largest ball inside the weight cone); the answer is the direction of the
/// minimum-norm point of the hull of the normalised weights. The result is
/// rescaled so the smallest weight value is 1.
pub fn positive_derivation(wd: &WeightDecomposition) -> Result<Vec<f64>> {
    if wd.spaces.is_empty() || wd.spaces[0].weight.is_empty() {
        return Err(Error::NoPositiveDerivation);
    }
    let mut normalized = Vec::with_capacity(wd.spaces.len());
    for s in &wd.spaces {
        let v = DVector::from_column_slice(&s.weight);
        let norm = v.norm();
        if norm <= 1e-12 {
            return Err(Error::NoPositiveDerivation);
        }
        normalized.push(v / norm);
    }
    let p = min_norm_point(&normalized);
    let depth = p.norm();
    if depth <= 1e-10 {
        return Err(Error::NoPositiveDerivation);
    }
    let dir = p / depth;
    let min_value = wd
        .spaces
        .iter()
        .map(|s| s.value(dir.as_slice()))
        .fold(f64::INFINITY, f64::min);
    if min_value <= 0.0 {
        return Err(Error::NoPositiveDerivation);
    }
    Ok(dir.iter().map(|x| x / min_value).collect())
}
