//! Certification of a candidate representation against its source algebra.
//!
//! Everything here is computed from the algebra and the raw matrices alone;
//! nothing from the construction is consulted.

use std::str::FromStr;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::embed::Representation;
use crate::error::{Error, Result};
use crate::lie::MetricLieAlgebra;
use crate::triangular::MetricKind;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    pub homomorphism: f64,
    /// Relative to the fitted scale.
    pub pullback: f64,
    pub faithfulness: f64,
}

impl Default for Tolerances {
    fn default() -> Self {
        Self {
            homomorphism: 1e-9,
            pullback: 1e-8,
            faithfulness: 1e-10,
        }
    }
}

impl FromStr for Tolerances {
    type Err = Error;

    /// `"1e-7"` sets all three; `"pullback=1e-7,homomorphism=1e-10"` sets
    /// individual entries on top of the defaults.
    fn from_str(s: &str) -> Result<Self> {
        let s = s.trim();
        if let Ok(v) = s.parse::<f64>() {
            return Ok(Self {
                homomorphism: v,
                pullback: v,
                faithfulness: v,
            });
        }
        let mut t = Self::default();
        for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
            let (key, value) = part
                .split_once('=')
                .ok_or_else(|| Error::Parse(format!("expected key=value, got `{part}`")))?;
            let value: f64 = value
                .trim()
                .parse()
                .map_err(|_| Error::Parse(format!("bad tolerance value `{value}`")))?;
            match key.trim() {
                "homomorphism" | "hom" => t.homomorphism = value,
                "pullback" => t.pullback = value,
                "faithfulness" | "faithful" => t.faithfulness = value,
                other => return Err(Error::Parse(format!("unknown tolerance `{other}`"))),
            }
        }
        Ok(t)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingCertificate {
    #[serde(rename = "N")]
    pub n: usize,
    pub achieved_c: f64,
    pub bracket_residual: f64,
    /// Largest `|⟨φX,φY⟩ − c⟨X,Y⟩|` over basis pairs, divided by `c`.
    pub pullback_residual: f64,
    pub faithfulness_margin: f64,
    pub metric_kind: MetricKind,
    pub lower_triangular: bool,
    pub accepted: bool,
    pub failures: Vec<String>,
}

fn norm(m: &DMatrix<f64>) -> f64 {
    m.iter().map(|x| x * x).sum::<f64>().sqrt()
}

/// `max_{i<j} ‖φ([e_i,e_j]) − [φ(e_i), φ(e_j)]‖ / (1 + max_i ‖φ(e_i)‖)`.
pub fn check_homomorphism(alg: &MetricLieAlgebra, rep: &Representation) -> f64 {
    let mats = rep.mats();
    let d = alg.dim().min(mats.len());
    let n = rep.n();
    let scale = 1.0 + mats.iter().map(norm).fold(0.0, f64::max);
    let mut worst = 0.0_f64;
    for i in 0..d {
        for j in i + 1..d {
            let mut lhs = DMatrix::zeros(n, n);
            for k in 0..d {
                let c = alg.c(i, j, k);
                if c != 0.0 {
                    lhs += &mats[k] * c;
                }
            }
            let comm = &mats[i] * &mats[j] - &mats[j] * &mats[i];
            worst = worst.max(norm(&(lhs - comm)));
        }
    }
    worst / scale
}

/// Smallest singular value of the `N² × dim` matrix of flattened images.
pub fn check_faithful(rep: &Representation) -> f64 {
    let mats = rep.mats();
    if mats.is_empty() || rep.n() * rep.n() < mats.len() {
        return 0.0;
    }
    let cols: Vec<DVector<f64>> = mats.iter().map(|m| DVector::from_iterator(m.len(), m.iter().copied())).collect();
    let stacked = DMatrix::from_columns(&cols);
    stacked
        .svd(false, false)
        .singular_values
        .iter()
        .copied()
        .fold(f64::INFINITY, f64::min)
}

fn target_ip(kind: MetricKind, x: &DMatrix<f64>, y: &DMatrix<f64>) -> f64 {
    let n = x.nrows();
    let mut s = 0.0;
    for r in 0..n {
        for c in 0..n {
            let v = x[(r, c)] * y[(r, c)];
            s += if r == c && kind == MetricKind::Einstein { 2.0 * v } else { v };
        }
    }
    s
}

fn first_non_lower(rep: &Representation) -> Option<usize> {
    rep.mats()
        .iter()
        .position(|m| (0..m.nrows()).any(|r| (r + 1..m.ncols()).any(|c| m[(r, c)] != 0.0)))
}

/// Least-squares scale `c` with `φ*⟨,⟩ ≈ c·gram`, and the largest entry
/// deviation relative to it.
pub fn check_isometry(alg: &MetricLieAlgebra, rep: &Representation, kind: MetricKind) -> Result<(f64, f64)> {
    if kind == MetricKind::Einstein {
        if let Some(index) = first_non_lower(rep) {
            return Err(Error::NotLowerTriangular { index });
        }
    }
    let d = alg.dim();
    if rep.mats().len() != d {
        return Err(Error::DimensionMismatch {
            expected: d,
            got: rep.mats().len(),
        });
    }
    let g = alg.gram();
    let mats = rep.mats();
    let pull = DMatrix::from_fn(d, d, |i, j| target_ip(kind, &mats[i], &mats[j]));
    let c_hat = pull.component_mul(g).sum() / g.component_mul(g).sum();
    let dev = (&pull - g * c_hat).iter().fold(0.0_f64, |a, x| a.max(x.abs()));
    let residual = if c_hat.abs() > 0.0 { dev / c_hat.abs() } else { f64::INFINITY };
    Ok((c_hat, residual))
}

/// Runs every check and collects the verdict. Numeric failures never error.
pub fn certify(
    alg: &MetricLieAlgebra,
    rep: &Representation,
    kind: MetricKind,
    tol: &Tolerances,
) -> EmbeddingCertificate {
    let mut failures = Vec::new();
    if rep.mats().len() != alg.dim() {
        failures.push(format!(
            "dimension: representation has {} images, algebra has dimension {}",
            rep.mats().len(),
            alg.dim()
        ));
        return EmbeddingCertificate {
            n: rep.n(),
            achieved_c: f64::NAN,
            bracket_residual: f64::NAN,
            pullback_residual: f64::NAN,
            faithfulness_margin: 0.0,
            metric_kind: kind,
            lower_triangular: false,
            accepted: false,
            failures,
        };
    }
    let lower = first_non_lower(rep);
    if let Some(i) = lower {
        failures.push(format!("triangularity: image of basis vector {i} has entries above the diagonal"));
    }
    let bracket_residual = check_homomorphism(alg, rep);
    if !(bracket_residual <= tol.homomorphism) {
        failures.push(format!(
            "homomorphism: residual {bracket_residual:.3e} exceeds {:.1e}",
            tol.homomorphism
        ));
    }
    let margin = check_faithful(rep);
    if !(margin > tol.faithfulness) {
        failures.push(format!(
            "faithfulness: margin {margin:.3e} not above {:.1e}",
            tol.faithfulness
        ));
    }
    // the Einstein pairing needs triangular input; measure the pullback on the
    // lower part anyway so a tampered file still gets a number
    let (achieved_c, pullback_residual) = match check_isometry(alg, rep, kind) {
        Ok(v) => v,
        Err(_) => check_isometry(alg, &lower_part(rep), kind).unwrap_or((f64::NAN, f64::NAN)),
    };
    if !(pullback_residual <= tol.pullback) {
        failures.push(format!(
            "isometry: pullback residual {pullback_residual:.3e} exceeds {:.1e} (c = {achieved_c:.6})",
            tol.pullback
        ));
    }
    EmbeddingCertificate {
        n: rep.n(),
        achieved_c,
        bracket_residual,
        pullback_residual,
        faithfulness_margin: margin,
        metric_kind: kind,
        lower_triangular: lower.is_none(),
        accepted: failures.is_empty(),
        failures,
    }
}

fn lower_part(rep: &Representation) -> Representation {
    let mats: Vec<DMatrix<f64>> = rep.mats().iter().map(|m| m.lower_triangle()).collect();
    Representation::single(mats, "lower", Vec::new()).unwrap_or_else(|_| rep.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::lie::BracketTerm;
    use crate::triangular::elementary;

    fn rh2() -> MetricLieAlgebra {
        MetricLieAlgebra::orthonormal(2, &[BracketTerm::new(0, 1, 1, 1.0)], &["A", "X"]).unwrap()
    }

    fn rh2_rep() -> Representation {
        let a = DMatrix::from_diagonal(&DVector::from_vec(vec![0.0, 1.0]));
        let x = -elementary(2, 1, 0) * 2f64.sqrt();
        Representation::single(vec![a, x], "rep", vec![]).unwrap()
    }

    #[test]
    fn rh2_certificate() {
        let rep = rh2_rep();
        assert_eq!(check_homomorphism(&rh2(), &rep), 0.0);
        assert!(check_faithful(&rep) > 0.9);
        let (c, r) = check_isometry(&rh2(), &rep, MetricKind::Einstein).unwrap();
        assert!((c - 2.0).abs() < 1e-15);
        assert!(r < 1e-15);
        let cert = certify(&rh2(), &rep, MetricKind::Einstein, &Tolerances::default());
        assert!(cert.accepted, "{:?}", cert.failures);
    }

    #[test]
    fn perturbation_shows_in_residual() {
        let rep = rh2_rep();
        let mut mats = rep.mats().to_vec();
        mats[0][(1, 1)] += 1e-3;
        let bad = Representation::single(mats, "rep", vec![]).unwrap();
        let r = check_homomorphism(&rh2(), &bad);
        assert!(r > 1e-4 && r < 1e-2, "{r}");
        let cert = certify(&rh2(), &bad, MetricKind::Einstein, &Tolerances::default());
        assert!(!cert.accepted);
        assert!(cert.failures.iter().any(|f| f.starts_with("homomorphism")));
    }

    #[test]
    fn zero_rep_of_abelian_algebra() {
        let flat = MetricLieAlgebra::orthonormal(2, &[], &[]).unwrap();
        let zero = Representation::single(vec![DMatrix::zeros(2, 2); 2], "zero", vec![]).unwrap();
        assert_eq!(check_homomorphism(&flat, &zero), 0.0);
        assert_eq!(check_faithful(&zero), 0.0);
    }

    #[test]
    fn orthonormal_images_margin() {
        let mats = vec![elementary(2, 1, 0) * 3.0, DMatrix::identity(2, 2) * 0.5];
        let rep = Representation::single(mats, "x", vec![]).unwrap();
        assert!((check_faithful(&rep) - 0.5 * 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn raw_adjoint_of_heisenberg_extension_is_not_isometric() {
        let alg = MetricLieAlgebra::orthonormal(
            4,
            &[
                BracketTerm::new(0, 1, 1, 1.0),
                BracketTerm::new(0, 2, 2, 1.0),
                BracketTerm::new(0, 3, 3, 2.0),
                BracketTerm::new(1, 2, 3, 1.0),
            ],
            &[],
        )
        .unwrap();
        let mats: Vec<_> = (0..4).map(|i| alg.ad_basis(i)).collect();
        let rep = Representation::single(mats, "ad", vec![]).unwrap();
        let (_, r) = check_isometry(&alg, &rep, MetricKind::Einstein).unwrap();
        assert!(r > 0.1);
    }

    #[test]
    fn self_pullback_is_exact() {
        let rep = rh2_rep();
        let pull = rep.pullback(MetricKind::Einstein);
        let alg = MetricLieAlgebra::from_brackets(2, &[BracketTerm::new(0, 1, 1, 1.0)], pull, None).unwrap();
        let (c, r) = check_isometry(&alg, &rep, MetricKind::Einstein).unwrap();
        assert!((c - 1.0).abs() < 1e-15 && r < 1e-15);
    }

    #[test]
    fn frobenius_sees_the_diagonal_factor() {
        let cert = certify(&rh2(), &rh2_rep(), MetricKind::Frobenius, &Tolerances::default());
        assert!(!cert.accepted);
        assert!(cert.failures.iter().any(|f| f.starts_with("isometry")));
    }

    #[test]
    fn zeroed_entry_is_rejected() {
        let mut mats = rh2_rep().mats().to_vec();
        mats[1][(1, 0)] = 0.0;
        let rep = Representation::single(mats, "x", vec![]).unwrap();
        let cert = certify(&rh2(), &rep, MetricKind::Einstein, &Tolerances::default());
        assert!(!cert.accepted);
        assert!(!cert.failures.is_empty());
    }

    #[test]
    fn tolerance_strings() {
        let t: Tolerances = "1e-7".parse().unwrap();
        assert_eq!(t.pullback, 1e-7);
        let t: Tolerances = "pullback=1e-6, hom=1e-12".parse().unwrap();
        assert_eq!((t.pullback, t.homomorphism, t.faithfulness), (1e-6, 1e-12, 1e-10));
        assert!("bogus=1".parse::<Tolerances>().is_err());
    }
}
