use std::ops::Range;

use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;
use crate::triangular::MetricKind;

/// A direct-sum block of a representation.
#[derive(Debug, Clone, PartialEq)]
pub struct Block {
    pub offset: usize,
    pub size: usize,
    pub tag: String,
}

/// Linear map from a `source_dim`-dimensional algebra into `N×N` matrices,
/// stored as the image of each source basis vector.
#[derive(Debug, Clone, PartialEq)]
pub struct Representation {
    source_dim: usize,
    n: usize,
    mats: Vec<DMatrix<f64>>,
    blocks: Vec<Block>,
    basis_order: Vec<String>,
}

impl Representation {
    pub fn new(
        source_dim: usize,
        n: usize,
        mats: Vec<DMatrix<f64>>,
        blocks: Vec<Block>,
        basis_order: Vec<String>,
    ) -> Result<Self> {
        if mats.len() != source_dim {
            return Err(Error::DimensionMismatch {
                expected: source_dim,
                got: mats.len(),
            });
        }
        if mats.iter().any(|m| m.nrows() != n || m.ncols() != n) {
            return Err(Error::SizeMismatch);
        }
        let covered: usize = blocks.iter().map(|b| b.size).sum();
        if covered != n {
            return Err(Error::SizeMismatch);
        }
        Ok(Self {
            source_dim,
            n,
            mats,
            blocks,
            basis_order,
        })
    }

    /// Single-block representation.
    pub fn single(mats: Vec<DMatrix<f64>>, tag: &str, basis_order: Vec<String>) -> Result<Self> {
        let n = mats.first().map_or(0, |m| m.nrows());
        Self::new(
            mats.len(),
            n,
            mats,
            vec![Block {
                offset: 0,
                size: n,
                tag: tag.to_string(),
            }],
            basis_order,
        )
    }

    pub fn zero(source_dim: usize) -> Self {
        Self {
            source_dim,
            n: 0,
            mats: vec![DMatrix::zeros(0, 0); source_dim],
            blocks: Vec::new(),
            basis_order: Vec::new(),
        }
    }

    pub fn source_dim(&self) -> usize {
        self.source_dim
    }

    /// Target matrix size `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn mats(&self) -> &[DMatrix<f64>] {
        &self.mats
    }

    pub fn blocks(&self) -> &[Block] {
        &self.blocks
    }

    pub fn basis_order(&self) -> &[String] {
        &self.basis_order
    }

    pub fn with_basis_order(mut self, order: Vec<String>) -> Self {
        self.basis_order = order;
        self
    }

    pub fn image(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        if x.len() != self.source_dim {
            return Err(Error::DimensionMismatch {
                expected: self.source_dim,
                got: x.len(),
            });
        }
        let mut out = DMatrix::zeros(self.n, self.n);
        for (m, c) in self.mats.iter().zip(x.iter()) {
            if *c != 0.0 {
                out += m * *c;
            }
        }
        Ok(out)
    }

    /// Precomposition with a linear map given by `map` (columns: images of the
    /// new source basis, in this representation's source coordinates).
    pub fn compose(&self, map: &DMatrix<f64>) -> Result<Self> {
        if map.nrows() != self.source_dim {
            return Err(Error::SourceMismatch {
                left: self.source_dim,
                right: map.nrows(),
            });
        }
        let mats = (0..map.ncols())
            .map(|i| self.image(&map.column(i).into_owned()))
            .collect::<Result<Vec<_>>>()?;
        Ok(Self {
            source_dim: map.ncols(),
            n: self.n,
            mats,
            blocks: self.blocks.clone(),
            basis_order: Vec::new(),
        })
    }

    /// Gram matrix `⟨φ(e_i), φ(e_j)⟩` of the images under `kind`.
    ///
    /// The diagonal weight of `kind` is applied regardless of triangularity,
    /// so this is only meaningful for lower-triangular images.
    pub fn pullback(&self, kind: MetricKind) -> DMatrix<f64> {
        let w = kind.diagonal_weight();
        let d = self.source_dim;
        let mut p = DMatrix::zeros(d, d);
        // summed block by block, so the pullback of a direct sum is exactly
        // the sum of the summands' pullbacks
        let covered = self.blocks.iter().map(|b| b.size).sum::<usize>() == self.n;
        let whole = [Block {
            offset: 0,
            size: self.n,
            tag: String::new(),
        }];
        let blocks = if covered { &self.blocks[..] } else { &whole[..] };
        for i in 0..d {
            for j in i..d {
                let (a, b) = (&self.mats[i], &self.mats[j]);
                let mut s = 0.0;
                for blk in blocks {
                    let (va, vb) = (
                        a.view((blk.offset, blk.offset), (blk.size, blk.size)),
                        b.view((blk.offset, blk.offset), (blk.size, blk.size)),
                    );
                    let diag: f64 = (0..blk.size).map(|r| va[(r, r)] * vb[(r, r)]).sum();
                    s += va.component_mul(&vb).sum() + (w - 1.0) * diag;
                }
                p[(i, j)] = s;
                p[(j, i)] = s;
            }
        }
        p
    }

    /// Drops blocks on which every image vanishes.
    pub fn pruned(&self) -> Self {
        let keep: Vec<&Block> = self
            .blocks
            .iter()
            .filter(|b| {
                self.mats
                    .iter()
                    .any(|m| m.view((b.offset, b.offset), (b.size, b.size)).iter().any(|x| *x != 0.0))
            })
            .collect();
        if keep.len() == self.blocks.len() {
            return self.clone();
        }
        let idx: Vec<usize> = keep.iter().flat_map(|b| b.offset..b.offset + b.size).collect();
        let n = idx.len();
        let mats = self
            .mats
            .iter()
            .map(|m| DMatrix::from_fn(n, n, |r, c| m[(idx[r], idx[c])]))
            .collect();
        let mut offset = 0;
        let blocks = keep
            .into_iter()
            .map(|b| {
                let nb = Block {
                    offset,
                    size: b.size,
                    tag: b.tag.clone(),
                };
                offset += b.size;
                nb
            })
            .collect();
        Self {
            source_dim: self.source_dim,
            n,
            mats,
            blocks,
            basis_order: self.basis_order.clone(),
        }
    }
}

/// Block-diagonal sum `φ₁ ⊕ φ₂`; blocks with identically zero images are
/// dropped.
pub fn direct_sum(first: &Representation, second: &Representation) -> Result<Representation> {
    if first.source_dim != second.source_dim {
        return Err(Error::SourceMismatch {
            left: first.source_dim,
            right: second.source_dim,
        });
    }
    let n = first.n + second.n;
    let mats = first
        .mats
        .iter()
        .zip(&second.mats)
        .map(|(a, b)| {
            let mut m = DMatrix::zeros(n, n);
            m.view_mut((0, 0), (first.n, first.n)).copy_from(a);
            m.view_mut((first.n, first.n), (second.n, second.n)).copy_from(b);
            m
        })
        .collect();
    let mut blocks = first.blocks.clone();
    blocks.extend(second.blocks.iter().map(|b| Block {
        offset: b.offset + first.n,
        size: b.size,
        tag: b.tag.clone(),
    }));
    let order = if first.basis_order.is_empty() {
        second.basis_order.clone()
    } else {
        first.basis_order.clone()
    };
    Ok(Representation {
        source_dim: first.source_dim,
        n,
        mats,
        blocks,
        basis_order: order,
    }
    .pruned())
}

/// `X ↦ L·φ(X)·L⁻¹` for a lower-triangular `L` that differs from the identity
/// only inside the diagonal blocks `allowed` (target index ranges).
pub fn conjugate(rep: &Representation, l: &DMatrix<f64>, allowed: &[Range<usize>]) -> Result<Representation> {
    let n = rep.n;
    if l.nrows() != n || l.ncols() != n {
        return Err(Error::SizeMismatch);
    }
    let inside = |r: usize, c: usize| allowed.iter().any(|b| b.contains(&r) && b.contains(&c));
    for r in 0..n {
        for c in 0..n {
            let expected = if r == c { 1.0 } else { 0.0 };
            if l[(r, c)] != expected && !inside(r, c) {
                return Err(Error::NotBlockRespecting(format!(
                    "entry ({r}, {c}) lies outside the permitted blocks"
                )));
            }
            if c > r && l[(r, c)] != 0.0 {
                return Err(Error::NotBlockRespecting(format!("entry ({r}, {c}) is above the diagonal")));
            }
        }
        if l[(r, r)] == 0.0 {
            return Err(Error::NotBlockRespecting(format!("zero pivot at {r}")));
        }
    }
    let inv = linalg::lower_inverse(l).ok_or_else(|| Error::NotBlockRespecting("singular".into()))?;
    // a diagonal image that is constant on every block commutes with L; keep
    // it bit-for-bit instead of re-rounding L·m·L⁻¹
    let commutes = |m: &DMatrix<f64>| {
        (0..n).all(|r| (0..n).all(|c| r == c || m[(r, c)] == 0.0))
            && allowed.iter().all(|b| b.clone().all(|r| m[(r, r)] == m[(b.start, b.start)]))
    };
    let mats = rep
        .mats
        .iter()
        .map(|m| if commutes(m) { m.clone() } else { l * m * &inv })
        .collect();
    Ok(Representation {
        mats,
        ..rep.clone()
    })
}

/// Lower-triangular `L` with `L·Lᵗ = form` (standard Cholesky).
///
/// The stage solver needs the transposed identity `MᵗM = form` with `M` lower
/// triangular; it gets it from this factor applied to the order-reversed form,
/// see [`linalg::lower_gram_factor`].
pub fn spd_lower_factor(form: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if !form.is_square() {
        return Err(Error::SizeMismatch);
    }
    let (vals, _) = linalg::sym_eigen_sorted(form);
    let min = vals.first().copied().unwrap_or(1.0);
    if min <= 0.0 || linalg::max_abs(&(form - form.transpose())) > 1e-12 * (1.0 + linalg::max_abs(form)) {
        return Err(Error::NotPositiveDefinite { min_eigenvalue: min });
    }
    Cholesky::new(form.clone())
        .map(|c| c.l())
        .ok_or(Error::NotPositiveDefinite { min_eigenvalue: min })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::triangular::elementary;
    use approx::assert_relative_eq;

    fn rh2_ad() -> Representation {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]));
        let x = -elementary(2, 1, 0);
        Representation::single(vec![a, x], "ad", vec!["A".into(), "X".into()]).unwrap()
    }

    #[test]
    fn direct_sum_adds_pullbacks() {
        let r = rh2_ad();
        let s = direct_sum(&r, &r).unwrap();
        assert_eq!(s.n(), 4);
        let p = s.pullback(MetricKind::Einstein);
        assert_eq!(p[(1, 1)], 2.0);
        assert_eq!(p, r.pullback(MetricKind::Einstein) * 2.0);
    }

    #[test]
    fn zero_summand_is_pruned() {
        let r = rh2_ad();
        let zero = Representation::single(vec![DMatrix::zeros(3, 3); 2], "zero", vec![]).unwrap();
        let s = direct_sum(&r, &zero).unwrap();
        assert_eq!(s.n(), 2);
        assert_eq!(s.pullback(MetricKind::Einstein), r.pullback(MetricKind::Einstein));
        assert_eq!(direct_sum(&r, &Representation::zero(2)).unwrap(), r);
    }

    #[test]
    fn source_mismatch() {
        assert_eq!(
            direct_sum(&rh2_ad(), &Representation::zero(3)),
            Err(Error::SourceMismatch { left: 2, right: 3 })
        );
    }

    #[test]
    fn faithful_plus_degenerate_stays_injective() {
        let r = rh2_ad();
        // character A ↦ 1, X ↦ 0
        let chi = Representation::single(
            vec![DMatrix::from_element(1, 1, 1.0), DMatrix::zeros(1, 1)],
            "chi",
            vec![],
        )
        .unwrap();
        let s = direct_sum(&r, &chi).unwrap();
        let cols: Vec<_> = s.mats().iter().map(|m| DVector::from_column_slice(m.as_slice())).collect();
        assert!(linalg::min_singular_value(&DMatrix::from_columns(&cols)) > 0.1);
    }

    #[test]
    fn identity_conjugation_is_trivial() {
        let r = rh2_ad();
        assert_eq!(conjugate(&r, &DMatrix::identity(2, 2), &[]).unwrap(), r);
    }

    #[test]
    fn conjugation_scaling_a_row() {
        // ad of ℝA ⋉ h³ in (A, X, Y, Z); scaling Z by 2 multiplies |φ(Z)|² by 4
        let mut z = DMatrix::zeros(4, 4);
        z[(3, 0)] = -2.0;
        let reps = Representation::single(vec![z], "ad", vec![]).unwrap();
        let mut l = DMatrix::identity(4, 4);
        l[(3, 3)] = 2.0;
        let c = conjugate(&reps, &l, &[3..4]).unwrap();
        assert_eq!(
            c.pullback(MetricKind::Einstein)[(0, 0)],
            4.0 * reps.pullback(MetricKind::Einstein)[(0, 0)]
        );
    }

    #[test]
    fn conjugation_must_stay_in_blocks() {
        let rep = Representation::single(vec![DMatrix::identity(3, 3)], "x", vec![]).unwrap();
        let mut l = DMatrix::identity(3, 3);
        l[(2, 1)] = 0.5;
        assert!(matches!(
            conjugate(&rep, &l, &[1..2, 2..3]),
            Err(Error::NotBlockRespecting(_))
        ));
        assert!(conjugate(&rep, &l, &[1..3]).is_ok());
    }

    #[test]
    fn cholesky_examples() {
        let f = DMatrix::from_row_slice(2, 2, &[4.0, 2.0, 2.0, 2.0]);
        let l = spd_lower_factor(&f).unwrap();
        assert_relative_eq!(l, DMatrix::from_row_slice(2, 2, &[2.0, 0.0, 1.0, 1.0]), epsilon = 1e-14);
        assert_eq!(spd_lower_factor(&DMatrix::identity(3, 3)).unwrap(), DMatrix::identity(3, 3));
        let bad = DMatrix::from_row_slice(2, 2, &[1.0, 2.0, 2.0, 1.0]);
        assert!(matches!(spd_lower_factor(&bad), Err(Error::NotPositiveDefinite { .. })));
    }
}
