use std::ops::Range;

use nalgebra::{DMatrix, DVector};

use crate::embed::representation::Representation;
use crate::error::{Error, Result};
use crate::lie::grading::label_for;
use crate::lie::{Grading, MetricLieAlgebra, SolvableSplit};
use crate::linalg;

/// A weight space's position inside an [`OrderedBasis`].
#[derive(Debug, Clone, PartialEq)]
pub struct WeightSlot {
    /// Index of the `D`-eigenvalue this weight space belongs to.
    pub eigen: usize,
    pub range: Range<usize>,
    /// The weight over the split's `𝔞` basis.
    pub weight: Vec<f64>,
}

/// Gram-orthonormal basis: `𝔞` first, then the weight spaces grouped by
/// increasing `D`-eigenvalue.
#[derive(Debug, Clone, PartialEq)]
pub struct OrderedBasis {
    /// Columns in the algebra's coordinates.
    pub vectors: DMatrix<f64>,
    pub labels: Vec<String>,
    /// `dim 𝔞`; the first `na` vectors span `𝔞`.
    pub na: usize,
    pub eigenvalues: Vec<f64>,
    pub eigen_ranges: Vec<Range<usize>>,
    pub slots: Vec<WeightSlot>,
    a_indices: Vec<usize>,
    n_indices: Vec<usize>,
}

impl OrderedBasis {
    pub fn dim(&self) -> usize {
        self.vectors.ncols()
    }

    pub fn k(&self) -> usize {
        self.eigenvalues.len()
    }

    /// `D`-eigenvalue of each position, zero on `𝔞`.
    pub fn values(&self) -> Vec<f64> {
        let mut v = vec![0.0; self.dim()];
        for (e, r) in self.eigen_ranges.iter().enumerate() {
            for p in r.clone() {
                v[p] = self.eigenvalues[e];
            }
        }
        v
    }

    /// Slot index of each `𝔫` position (`None` on `𝔞`).
    pub fn slot_of(&self) -> Vec<Option<usize>> {
        let mut s = vec![None; self.dim()];
        for (i, slot) in self.slots.iter().enumerate() {
            for p in slot.range.clone() {
                s[p] = Some(i);
            }
        }
        s
    }

    /// `dim 𝔰^(i)`: `𝔞` plus the first `k + 1 - i` eigenspaces.
    pub fn stage_size(&self, i: usize) -> usize {
        self.eigen_ranges
            .get(self.k() - i)
            .map_or(self.na, |r| r.end)
    }

    /// Inverse of the basis matrix, `Bᵗ G`, with the `𝔞`/`𝔫` cross blocks set
    /// to exact zeros.
    pub fn inverse(&self, alg: &MetricLieAlgebra) -> DMatrix<f64> {
        let mut inv = self.vectors.transpose() * alg.gram();
        let na = self.na;
        for &i in &self.n_indices {
            for p in 0..na {
                inv[(p, i)] = 0.0;
            }
        }
        for &i in &self.a_indices {
            for p in na..self.dim() {
                inv[(p, i)] = 0.0;
            }
        }
        inv
    }
}

pub fn ordered_basis(alg: &MetricLieAlgebra, split: &SolvableSplit, grading: &Grading) -> Result<OrderedBasis> {
    split.check_dim(alg.dim())?;
    let dim = alg.dim();
    let na = split.a().len();
    let ea = DMatrix::from_fn(dim, na, |r, c| if r == split.a()[c] { 1.0 } else { 0.0 });
    let wa = linalg::orthonormalize(&ea, alg.gram())?;
    let mut cols: Vec<DVector<f64>> = wa.column_iter().map(|c| c.into_owned()).collect();
    let mut labels: Vec<String> = (0..na)
        .map(|j| label_for(alg, &cols[j], format!("a{j}")))
        .collect();
    let mut eigen_ranges = Vec::new();
    let mut slots = Vec::new();
    for (e, spaces) in grading.eigenspaces.iter().enumerate() {
        let start = cols.len();
        for ws in spaces {
            let s0 = cols.len();
            for (c, col) in ws.basis.column_iter().enumerate() {
                let v = col.into_owned();
                labels.push(label_for(alg, &v, format!("n{}_{}", e + 1, s0 - start + c)));
                cols.push(v);
            }
            slots.push(WeightSlot {
                eigen: e,
                range: s0..cols.len(),
                weight: ws.weight.clone(),
            });
        }
        eigen_ranges.push(start..cols.len());
    }
    if cols.len() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            got: cols.len(),
        });
    }
    Ok(OrderedBasis {
        vectors: DMatrix::from_columns(&cols),
        labels,
        na,
        eigenvalues: grading.eigenvalues.clone(),
        eigen_ranges,
        slots,
        a_indices: split.a().to_vec(),
        n_indices: split.n().to_vec(),
    })
}

/// `ad b_p` in the ordered basis, with every entry the grading forces to
/// vanish set to an exact zero.
///
/// For `b_p ∈ 𝔞` only the diagonal survives. For `b_p ∈ 𝔫_α` the column of an
/// `𝔞` vector may only hit `b_p` itself, and a column in `𝔫_β` may only hit
/// `𝔫_{α+β}`. Discarded mass above round-off means the input does not satisfy
/// the structural conditions.
pub fn adapted_ad(alg: &MetricLieAlgebra, ob: &OrderedBasis) -> Result<Vec<DMatrix<f64>>> {
    let dim = ob.dim();
    let inv = ob.inverse(alg);
    let slot_of = ob.slot_of();
    let weight_of = |p: usize| -> Option<&Vec<f64>> { slot_of[p].map(|s| &ob.slots[s].weight) };
    let sums_to = |r: usize, q: usize, p: usize| match (weight_of(r), weight_of(q), weight_of(p)) {
        (Some(wr), Some(wq), Some(wp)) => {
            let sum: Vec<f64> = wq.iter().zip(wp).map(|(a, b)| a + b).collect();
            linalg::close_vec(wr, &sum, 1e-9)
        }
        _ => false,
    };
    let mut out = Vec::with_capacity(dim);
    let mut discarded = 0.0_f64;
    let mut scale = 0.0_f64;
    for p in 0..dim {
        let b = ob.vectors.column(p).into_owned();
        let m = &inv * alg.ad(&b)? * &ob.vectors;
        scale = scale.max(linalg::max_abs(&m));
        let masked = DMatrix::from_fn(dim, dim, |r, q| {
            let keep = if p < ob.na {
                r == q
            } else if q < ob.na {
                r == p
            } else {
                sums_to(r, q, p)
            };
            if keep {
                m[(r, q)]
            } else {
                discarded = discarded.max(m[(r, q)].abs());
                0.0
            }
        });
        out.push(masked);
    }
    if discarded > 1e-8 * (1.0 + scale) {
        return Err(Error::ConditionsFailed(vec![format!(
            "adjoint action does not respect the grading (stray entry {discarded:.3e})"
        )]));
    }
    Ok(out)
}

/// Expresses per-position images in the algebra's own basis:
/// `φ(e_i) = Σ_p (B⁻¹)_{p i} φ(b_p)`.
pub(crate) fn to_source_basis(inv: &DMatrix<f64>, images: &[DMatrix<f64>]) -> Vec<DMatrix<f64>> {
    let n = images.first().map_or(0, |m| m.nrows());
    (0..inv.ncols())
        .map(|i| {
            let mut m = DMatrix::zeros(n, n);
            for (p, img) in images.iter().enumerate() {
                let c = inv[(p, i)];
                if c != 0.0 {
                    m += img * c;
                }
            }
            m
        })
        .collect()
}

/// The adjoint representation, lower triangular in the ordered basis.
pub fn adjoint_rep(alg: &MetricLieAlgebra, ob: &OrderedBasis) -> Result<Representation> {
    let images = adapted_ad(alg, ob)?;
    let mats = to_source_basis(&ob.inverse(alg), &images);
    let cols: Vec<DVector<f64>> = mats.iter().map(|m| DVector::from_column_slice(m.as_slice())).collect();
    let margin = linalg::min_singular_value(&DMatrix::from_columns(&cols));
    if margin <= 1e-12 * (1.0 + alg.scale()) {
        return Err(Error::NotFaithful { margin });
    }
    Representation::single(mats, "ad", alg.labels().to_vec())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::{grading, BracketTerm};
    use crate::triangular::{elementary, is_lower, is_strictly_lower};

    fn rh2() -> (MetricLieAlgebra, SolvableSplit) {
        let alg = MetricLieAlgebra::orthonormal(2, &[BracketTerm::new(0, 1, 1, 1.0)], &["A", "X"]).unwrap();
        (alg, SolvableSplit::new(vec![0], vec![1], 2).unwrap())
    }

    fn heis_ext() -> (MetricLieAlgebra, SolvableSplit) {
        let alg = MetricLieAlgebra::orthonormal(
            4,
            &[
                BracketTerm::new(0, 1, 1, 1.0),
                BracketTerm::new(0, 2, 2, 1.0),
                BracketTerm::new(0, 3, 3, 2.0),
                BracketTerm::new(1, 2, 3, 1.0),
            ],
            &["A", "X", "Y", "Z"],
        )
        .unwrap();
        (alg, SolvableSplit::new(vec![0], vec![1, 2, 3], 4).unwrap())
    }

    #[test]
    fn ordered_bases() {
        let (alg, split) = rh2();
        let gr = grading(&alg, &split, &[1.0], 1e-9).unwrap();
        let ob = ordered_basis(&alg, &split, &gr).unwrap();
        assert_eq!(ob.labels, vec!["A", "X"]);

        let (alg, split) = heis_ext();
        let gr = grading(&alg, &split, &[1.0], 1e-9).unwrap();
        let ob = ordered_basis(&alg, &split, &gr).unwrap();
        assert_eq!(ob.labels[0], "A");
        assert_eq!(ob.labels[3].trim_start_matches('-'), "Z");
        assert_eq!(ob.eigen_ranges, vec![1..3, 3..4]);
        assert_eq!(ob.stage_size(1), 4);
        assert_eq!(ob.stage_size(2), 3);
    }

    #[test]
    fn rh2_adjoint() {
        let (alg, split) = rh2();
        let gr = grading(&alg, &split, &[1.0], 1e-9).unwrap();
        let ob = ordered_basis(&alg, &split, &gr).unwrap();
        let rep = adjoint_rep(&alg, &ob).unwrap();
        assert_eq!(rep.mats()[0], DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0])));
        assert_eq!(rep.mats()[1], -elementary(2, 1, 0));
    }

    #[test]
    fn heisenberg_extension_adjoint() {
        let (alg, split) = heis_ext();
        let gr = grading(&alg, &split, &[1.0], 1e-9).unwrap();
        let ob = ordered_basis(&alg, &split, &gr).unwrap();
        let rep = adjoint_rep(&alg, &ob).unwrap();
        let a = &rep.mats()[0];
        let d: Vec<f64> = (0..4).map(|i| a[(i, i)]).collect();
        assert_eq!(d, vec![0.0, 1.0, 1.0, 2.0]);
        assert!(is_lower(a, 0.0));
        // central-row entry: φ(Z) has a single entry −2 at (Z, A)
        let z = &rep.mats()[3];
        let sign = ob.vectors[(3, 3)].signum();
        assert_eq!(z.iter().filter(|x| **x != 0.0).count(), 1);
        assert!((z[(3, 0)] * sign + 2.0).abs() < 1e-14);
        for m in &rep.mats()[1..] {
            assert!(is_strictly_lower(m, 0.0));
        }
    }

    #[test]
    fn abelian_algebra_is_not_faithful() {
        let alg = MetricLieAlgebra::orthonormal(2, &[], &[]).unwrap();
        let split = SolvableSplit::new(vec![0, 1], vec![], 2).unwrap();
        let gr = Grading {
            derivation: vec![],
            eigenvalues: vec![],
            eigenspaces: vec![],
        };
        let ob = ordered_basis(&alg, &split, &gr).unwrap();
        assert!(matches!(adjoint_rep(&alg, &ob), Err(Error::NotFaithful { .. })));
    }
}
