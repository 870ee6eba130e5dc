//! Quotient stages `𝔰^(1), …, 𝔰^(k)` and the per-stage scaling solve.
//!
//! Stage `i` is the adjoint representation of `𝔰^(i)`, whose ordered basis is
//! a leading segment of the full ordered basis, so its matrices are leading
//! principal blocks of the full adapted `ad`. Stage `i` is precomposed with
//! `exp(t_i D)` and conjugated by a weight-block lower-triangular `L_i` acting
//! on its top eigenspace `𝔫_{λ_{k+1-i}}`, which is central in `𝔫^(i)`. For `Z`
//! there, `L_i·ad(Z)·L_i⁻¹ = −Σ_j α(A_j)·(L_i Z) A_jᵗ`, so the stage's pullback
//! on a weight block is `c_α·e^{2 t_i λ}·L_iᵗL_i` with `c_α = Σ_j α(A_j)²`.
//! Stages are solved from the top eigenvalue down, each absorbing the residual
//! `t·Id − (pullback of earlier stages)` on its own top eigenspace; later
//! stages never touch the eigenspaces already fixed.

use nalgebra::DMatrix;

use crate::embed::basis::{adapted_ad, ordered_basis, to_source_basis, OrderedBasis};
use crate::embed::representation::{Block, Representation};
use crate::error::{Error, Result};
use crate::lie::{Grading, MetricLieAlgebra, SolvableSplit};
use crate::linalg;
use crate::triangular::MetricKind;

/// How a stage splits its residual between `exp(t_i D)` and `L_i`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum StageMode {
    /// `t_i = 0`; `L_i` absorbs everything.
    Fixed,
    /// `t_i` matches the mean residual, `L_i` the remaining anisotropy.
    Automorphic,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageSolution {
    pub target: f64,
    pub mode: StageMode,
    /// `t_i` for stages `1..=k`.
    pub stage_scales: Vec<f64>,
    /// `L_i`, of size `dim 𝔰^(i)`.
    pub conjugators: Vec<DMatrix<f64>>,
    /// Per stage, images of the ordered basis vectors that survive in `𝔰^(i)`.
    pub stage_images: Vec<Vec<DMatrix<f64>>>,
    /// Accumulated pullback over the ordered basis (`𝔫` block only).
    pub pullback: DMatrix<f64>,
    /// `c_{i,j}`: mean pullback of `L_i ∘ ad^(i) ∘ L_i⁻¹` (before `exp(t_i D)`)
    /// on eigenspace `j`.
    pub constants: Vec<Vec<f64>>,
}

impl StageSolution {
    /// Mean pullback constant achieved on each eigenspace.
    pub fn achieved(&self, ob: &OrderedBasis) -> Vec<f64> {
        ob.eigen_ranges
            .iter()
            .map(|r| r.clone().map(|p| self.pullback[(p, p)]).sum::<f64>() / r.len() as f64)
            .collect()
    }

    /// Largest `|pullback − target·Id|` on `𝔫`, relative to the target.
    pub fn uniformity_residual(&self, ob: &OrderedBasis) -> f64 {
        let d = ob.dim();
        let mut worst = 0.0_f64;
        for r in ob.na..d {
            for c in ob.na..d {
                let expect = if r == c { self.target } else { 0.0 };
                worst = worst.max((self.pullback[(r, c)] - expect).abs());
            }
        }
        worst / self.target.abs().max(f64::MIN_POSITIVE)
    }
}

/// Everything about the stages that does not depend on the scale.
#[derive(Debug, Clone)]
pub struct StageSystem {
    pub basis: OrderedBasis,
    inverse: DMatrix<f64>,
    ad: Vec<DMatrix<f64>>,
    labels: Vec<String>,
    /// `c_α` per weight slot.
    slot_constants: Vec<f64>,
}

impl StageSystem {
    pub fn new(alg: &MetricLieAlgebra, split: &SolvableSplit, grading: &Grading) -> Result<Self> {
        let basis = ordered_basis(alg, split, grading)?;
        let ad = adapted_ad(alg, &basis)?;
        let inverse = basis.inverse(alg);
        let slot_constants = basis
            .slots
            .iter()
            .map(|s| {
                let per: f64 = s
                    .range
                    .clone()
                    .map(|p| (0..basis.na).map(|j| ad[p][(p, j)].powi(2)).sum::<f64>())
                    .sum();
                per / s.range.len() as f64
            })
            .collect();
        Ok(Self {
            basis,
            inverse,
            ad,
            labels: alg.labels().to_vec(),
            slot_constants,
        })
    }

    pub fn k(&self) -> usize {
        self.basis.k()
    }

    pub fn slot_constants(&self) -> &[f64] {
        &self.slot_constants
    }

    /// `Σ_i dim 𝔰^(i)`.
    pub fn stage_total(&self) -> usize {
        (1..=self.k()).map(|i| self.basis.stage_size(i)).sum()
    }

    /// Adapted `ad` matrices (masked), one per ordered basis vector.
    pub fn adapted(&self) -> &[DMatrix<f64>] {
        &self.ad
    }

    pub fn solve(&self, t: f64, mode: StageMode) -> Result<StageSolution> {
        let too_small = Error::ScaleTooSmall {
            requested: t,
            min_feasible: None,
        };
        if !(t > 0.0) || !t.is_finite() {
            return Err(too_small);
        }
        let ob = &self.basis;
        let (k, na, dim) = (ob.k(), ob.na, ob.dim());
        let values = ob.values();
        let mut acc = DMatrix::zeros(dim, dim);
        let mut stage_scales = Vec::with_capacity(k);
        let mut conjugators = Vec::with_capacity(k);
        let mut stage_images = Vec::with_capacity(k);
        let mut constants = Vec::with_capacity(k);

        for i in 1..=k {
            let s = ob.stage_size(i);
            let e = k - i;
            let lambda = ob.eigenvalues[e];
            let slots: Vec<usize> = (0..ob.slots.len()).filter(|&j| ob.slots[j].eigen == e).collect();

            let mut residuals = Vec::with_capacity(slots.len());
            for &j in &slots {
                let r = ob.slots[j].range.clone();
                let acc_block = acc.view((r.start, r.start), (r.len(), r.len())).into_owned();
                let res = DMatrix::identity(r.len(), r.len()) * t - acc_block;
                let res = (&res + res.transpose()) * 0.5;
                let (vals, _) = linalg::sym_eigen_sorted(&res);
                if !(vals[0] > 0.0) {
                    return Err(too_small);
                }
                residuals.push(res);
            }

            let ti = match mode {
                StageMode::Fixed => 0.0,
                StageMode::Automorphic => {
                    let (mut rsum, mut csum, mut dsum) = (0.0, 0.0, 0.0);
                    for (res, &j) in residuals.iter().zip(&slots) {
                        let d = res.nrows() as f64;
                        rsum += res.trace();
                        csum += d * self.slot_constants[j];
                        dsum += d;
                    }
                    ((rsum / dsum) / (csum / dsum)).ln() / (2.0 * lambda)
                }
            };

            let mut l = DMatrix::identity(s, s);
            for (res, &j) in residuals.iter().zip(&slots) {
                let r = ob.slots[j].range.clone();
                let form = res / (self.slot_constants[j] * (2.0 * ti * lambda).exp());
                let m = linalg::lower_gram_factor(&form).map_err(|_| too_small.clone())?;
                l.view_mut((r.start, r.start), (r.len(), r.len())).copy_from(&m);
            }
            let l_inv = linalg::lower_inverse(&l).ok_or_else(|| too_small.clone())?;

            let mut raw = Vec::with_capacity(s);
            let mut images = Vec::with_capacity(s);
            for p in 0..s {
                let block = self.ad[p].view((0, 0), (s, s)).into_owned();
                if p < na {
                    // diagonal, commutes with L
                    raw.push(block.clone());
                    images.push(block);
                } else {
                    let conj = &l * block * &l_inv;
                    images.push(&conj * (ti * values[p]).exp());
                    raw.push(conj);
                }
            }

            let mut stage_const = vec![0.0; e + 1];
            for p in na..s {
                for q in p..s {
                    let v = linalg::frobenius(&images[p], &images[q]);
                    acc[(p, q)] += v;
                    if q != p {
                        acc[(q, p)] += v;
                    }
                }
            }
            for (j, r) in ob.eigen_ranges.iter().enumerate().take(e + 1) {
                stage_const[j] = r.clone().map(|p| raw[p].norm_squared()).sum::<f64>() / r.len() as f64;
            }

            stage_scales.push(ti);
            conjugators.push(l);
            stage_images.push(images);
            constants.push(stage_const);
        }

        Ok(StageSolution {
            target: t,
            mode,
            stage_scales,
            conjugators,
            stage_images,
            pullback: acc,
            constants,
        })
    }

    /// Smallest `t` at which every stage residual is positive definite, to
    /// bisection precision; `None` when none is found up to `2⁸⁰`.
    pub fn min_feasible_t(&self, mode: StageMode) -> Option<f64> {
        if self.k() <= 1 {
            return Some(0.0);
        }
        let ok = |t: f64| self.solve(t, mode).is_ok();
        let (mut lo, mut hi);
        if ok(1.0) {
            hi = 1.0;
            lo = 0.5;
            let mut n = 0;
            while ok(lo) {
                hi = lo;
                lo *= 0.5;
                n += 1;
                if n > 60 {
                    return Some(0.0);
                }
            }
        } else {
            lo = 1.0;
            hi = 2.0;
            let mut n = 0;
            while !ok(hi) {
                lo = hi;
                hi *= 2.0;
                n += 1;
                if n > 80 {
                    return None;
                }
            }
        }
        for _ in 0..200 {
            if hi - lo <= 1e-14 * hi {
                break;
            }
            let mid = 0.5 * (lo + hi);
            if ok(mid) {
                hi = mid;
            } else {
                lo = mid;
            }
        }
        Some(hi)
    }

    /// Pullback of the stage sum on `𝔞`, over the orthonormal `𝔞` basis of
    /// the ordered basis. Independent of the scale.
    pub fn a_pullback(&self, kind: MetricKind) -> DMatrix<f64> {
        let ob = &self.basis;
        let na = ob.na;
        let w = kind.diagonal_weight();
        let mut p = DMatrix::zeros(na, na);
        for i in 1..=self.k() {
            let s = ob.stage_size(i);
            for a in 0..na {
                for b in 0..na {
                    p[(a, b)] += w * (0..s).map(|r| self.ad[a][(r, r)] * self.ad[b][(r, r)]).sum::<f64>();
                }
            }
        }
        p
    }

    /// The stage sum as a representation of the original algebra.
    pub fn representation(&self, sol: &StageSolution) -> Result<Representation> {
        let mut mats: Vec<DMatrix<f64>> = Vec::new();
        let mut blocks = Vec::new();
        let mut offset = 0;
        let total: usize = sol.stage_images.iter().map(|imgs| imgs.first().map_or(0, |m| m.nrows())).sum();
        let dim = self.basis.dim();
        for _ in 0..dim {
            mats.push(DMatrix::zeros(total, total));
        }
        for (i, imgs) in sol.stage_images.iter().enumerate() {
            let s = imgs.first().map_or(0, |m| m.nrows());
            let mut padded = imgs.clone();
            padded.resize(dim, DMatrix::zeros(s, s));
            let source = to_source_basis(&self.inverse, &padded);
            for (m, src) in mats.iter_mut().zip(source) {
                m.view_mut((offset, offset), (s, s)).copy_from(&src);
            }
            blocks.push(Block {
                offset,
                size: s,
                tag: format!("stage{}", i + 1),
            });
            offset += s;
        }
        Representation::new(dim, total, mats, blocks, self.labels.clone())
    }
}

/// Step-2 parameters and achieved constants of a scaled stage sum.
#[derive(Debug, Clone, PartialEq)]
pub struct ScalePlan {
    pub target_c: f64,
    pub stage_scales: Vec<f64>,
    /// `c_{i,j}` as in [`StageSolution::constants`].
    pub constants: Vec<Vec<f64>>,
    /// Achieved mean pullback constant per eigenspace.
    pub achieved: Vec<f64>,
    pub min_feasible_c: f64,
}

/// `exp(tD)` on the algebra's coordinates: identity off `𝔫`, `e^{tλ}` on `𝔫_λ`.
pub fn scale_automorphism(alg: &MetricLieAlgebra, grading: &Grading, t: f64) -> DMatrix<f64> {
    let n = alg.dim();
    let mut a = DMatrix::identity(n, n);
    for (j, &lambda) in grading.eigenvalues.iter().enumerate() {
        let v = grading.eigenspace_basis(j);
        let proj = &v * (v.transpose() * alg.gram());
        a += proj * ((t * lambda).exp() - 1.0);
    }
    a
}

/// Stage sum with the top-down exact scaling: pullback `t·gram` on `𝔫`.
pub fn equalize(system: &StageSystem, t: f64) -> Result<(Representation, ScalePlan)> {
    let sol = match system.solve(t, StageMode::Automorphic) {
        Ok(s) => s,
        Err(Error::ScaleTooSmall { requested, .. }) => {
            return Err(Error::ScaleTooSmall {
                requested,
                min_feasible: system.min_feasible_t(StageMode::Automorphic),
            })
        }
        Err(e) => return Err(e),
    };
    let rep = system.representation(&sol)?;
    let plan = ScalePlan {
        target_c: t,
        stage_scales: sol.stage_scales.clone(),
        constants: sol.constants.clone(),
        achieved: sol.achieved(&system.basis),
        min_feasible_c: system.min_feasible_t(StageMode::Automorphic).unwrap_or(f64::NAN),
    };
    Ok((rep, plan))
}

/// Stage sum without automorphisms: each `L_i` alone brings its top
/// eigenspace to `target_c`. Returns the achieved constant per eigenspace.
pub fn special_rep(
    alg: &MetricLieAlgebra,
    split: &SolvableSplit,
    grading: &Grading,
    target_c: f64,
) -> Result<(Representation, Vec<f64>)> {
    let system = StageSystem::new(alg, split, grading)?;
    let sol = match system.solve(target_c, StageMode::Fixed) {
        Ok(s) => s,
        Err(Error::ScaleTooSmall { requested, .. }) => {
            return Err(Error::ScaleTooSmall {
                requested,
                min_feasible: system.min_feasible_t(StageMode::Fixed),
            })
        }
        Err(e) => return Err(e),
    };
    Ok((system.representation(&sol)?, sol.achieved(&system.basis)))
}
