//! Left-invariant curvature from the Koszul formula.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::lie::{derivation_residual, MetricLieAlgebra, SolvableSplit};
use crate::linalg;

/// `Γ[i][j][k] = ⟨∇_{e_i} e_j, e_k⟩` over a gram-orthonormal frame.
#[derive(Debug, Clone, PartialEq)]
pub struct ConnectionTable {
    dim: usize,
    /// Frame vectors as columns, in the algebra's coordinates.
    pub frame: DMatrix<f64>,
    gamma: Vec<f64>,
    /// Structure constants `⟨[f_i, f_j], f_k⟩` in the frame.
    structure: Vec<f64>,
}

impl ConnectionTable {
    pub fn dim(&self) -> usize {
        self.dim
    }

    #[inline]
    pub fn gamma(&self, i: usize, j: usize, k: usize) -> f64 {
        self.gamma[(i * self.dim + j) * self.dim + k]
    }

    #[inline]
    pub fn bracket_coeff(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    /// Matrix of `∇_{f_i}`: column `j` holds `∇_{f_i} f_j`.
    pub fn nabla(&self, i: usize) -> DMatrix<f64> {
        DMatrix::from_fn(self.dim, self.dim, |k, j| self.gamma(i, j, k))
    }

    /// Largest `|Γ_ijk + Γ_ikj|`.
    pub fn metric_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    worst = worst.max((self.gamma(i, j, k) + self.gamma(i, k, j)).abs());
                }
            }
        }
        worst
    }

    /// Largest `|Γ_ijk − Γ_jik − C_ijk|`.
    pub fn torsion_defect(&self) -> f64 {
        let n = self.dim;
        let mut worst = 0.0_f64;
        for i in 0..n {
            for j in 0..n {
                for k in 0..n {
                    let t = self.gamma(i, j, k) - self.gamma(j, i, k) - self.bracket_coeff(i, j, k);
                    worst = worst.max(t.abs());
                }
            }
        }
        worst
    }

    /// `R(f_i, f_j) = [∇_i, ∇_j] − ∇_{[f_i, f_j]}` as a matrix on the frame.
    pub fn curvature_operator(&self, i: usize, j: usize) -> DMatrix<f64> {
        let (ni, nj) = (self.nabla(i), self.nabla(j));
        let mut r = &ni * &nj - &nj * &ni;
        for m in 0..self.dim {
            let c = self.bracket_coeff(i, j, m);
            if c != 0.0 {
                r -= self.nabla(m) * c;
            }
        }
        r
    }

    /// Sectional curvature of the plane spanned by frame vectors `i ≠ j`.
    pub fn sectional(&self, i: usize, j: usize) -> f64 {
        let r = self.curvature_operator(i, j);
        // ⟨R(f_i,f_j)f_j, f_i⟩
        r[(i, j)]
    }
}

/// Gram-orthonormal frame obtained by Gram-Schmidt in basis order.
pub fn orthonormal_frame(alg: &MetricLieAlgebra) -> DMatrix<f64> {
    let n = alg.dim();
    linalg::orthonormalize(&DMatrix::identity(n, n), alg.gram()).expect("gram is positive definite")
}

pub fn levi_civita(alg: &MetricLieAlgebra) -> ConnectionTable {
    let n = alg.dim();
    let frame = orthonormal_frame(alg);
    let g = alg.gram();
    let cols: Vec<DVector<f64>> = frame.column_iter().map(|c| c.into_owned()).collect();
    let mut structure = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            let b = alg.bracket(&cols[i], &cols[j]).expect("frame has algebra dimension");
            let coords = frame.transpose() * g * b;
            for k in 0..n {
                structure[(i * n + j) * n + k] = coords[k];
            }
        }
    }
    let c = |i: usize, j: usize, k: usize| structure[(i * n + j) * n + k];
    let mut gamma = vec![0.0; n * n * n];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                gamma[(i * n + j) * n + k] = 0.5 * (c(i, j, k) - c(j, k, i) + c(k, i, j));
            }
        }
    }
    ConnectionTable {
        dim: n,
        frame,
        gamma,
        structure,
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Soliton {
    pub c: f64,
    /// `Ric − c·Id` in the orthonormal frame.
    pub derivation: DMatrix<f64>,
    /// The same map acting on the algebra's own coordinates.
    pub derivation_coords: DMatrix<f64>,
    pub residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct RicciData {
    /// Ricci form in the orthonormal frame `frame`.
    pub ricci: DMatrix<f64>,
    pub frame: DMatrix<f64>,
    pub einstein_constant: Option<f64>,
    pub soliton: Option<Soliton>,
}

/// Ricci form `Ric(x,y) = Σ_i ⟨R(f_i, x) y, f_i⟩` in the Gram-Schmidt frame.
pub fn ricci_from_connection(conn: &ConnectionTable) -> DMatrix<f64> {
    let n = conn.dim();
    let mut ric = DMatrix::zeros(n, n);
    for i in 0..n {
        for x in 0..n {
            let r = conn.curvature_operator(i, x);
            for y in 0..n {
                ric[(x, y)] += r[(i, y)];
            }
        }
    }
    (&ric + ric.transpose()) * 0.5
}

pub fn ricci(alg: &MetricLieAlgebra) -> RicciData {
    let conn = levi_civita(alg);
    RicciData {
        ricci: ricci_from_connection(&conn),
        frame: conn.frame,
        einstein_constant: None,
        soliton: None,
    }
}

/// `(‖Ric − λ·Id‖ ≤ tol, λ)` with `λ = tr Ric / dim`.
pub fn einstein_check(alg: &MetricLieAlgebra, tol: f64) -> (bool, f64) {
    let (residual, lambda) = einstein_residual(alg);
    (residual <= tol, lambda)
}

/// Frobenius norm of `Ric − λ·Id` and `λ`.
pub fn einstein_residual(alg: &MetricLieAlgebra) -> (f64, f64) {
    let ric = ricci(alg).ricci;
    let n = alg.dim();
    let lambda = ric.trace() / n as f64;
    let dev = &ric - DMatrix::<f64>::identity(n, n) * lambda;
    (dev.norm(), lambda)
}

/// Orthonormal basis (flattened column-major `n×n` matrices) of the
/// derivation algebra of `alg`, whose basis must be orthonormal.
fn derivation_space(alg: &MetricLieAlgebra) -> DMatrix<f64> {
    let n = alg.dim();
    // unknown D[(k, m)] sits at index m * n + k
    let rows = n * (n - 1) / 2 * n;
    let mut sys = DMatrix::zeros(rows.max(1), n * n);
    let mut row = 0;
    for i in 0..n {
        for j in i + 1..n {
            for k in 0..n {
                // (D[e_i,e_j])_k − ([D e_i, e_j])_k − ([e_i, D e_j])_k
                for m in 0..n {
                    sys[(row, m * n + k)] += alg.c(i, j, m);
                    sys[(row, i * n + m)] -= alg.c(m, j, k);
                    sys[(row, j * n + m)] -= alg.c(i, m, k);
                }
                row += 1;
            }
        }
    }
    linalg::null_space(&sys, 1e-10)
}

/// Solves `Ric = c·Id + D` with `D` a derivation, in the least-squares sense.
pub fn soliton_data(nilalg: &MetricLieAlgebra, tol: f64) -> Result<RicciData> {
    let n = nilalg.dim();
    let frame = orthonormal_frame(nilalg);
    let on = nilalg.change_basis(&frame, Some(nilalg.labels().to_vec()))?;
    let ric = ricci(&on).ricci;
    let der = derivation_space(&on);

    let project_off = |v: &DVector<f64>| v - &der * (der.transpose() * v);
    let r = DVector::from_column_slice(ric.as_slice());
    let id = DVector::from_column_slice(DMatrix::<f64>::identity(n, n).as_slice());
    let pr = project_off(&r);
    let pi = project_off(&id);
    if pi.norm() <= 1e-9 * id.norm() {
        return Err(Error::Ambiguous);
    }
    let c = pr.dot(&pi) / pi.norm_squared();
    let derivation = &ric - DMatrix::<f64>::identity(n, n) * c;
    let residual = derivation_residual(&on, &derivation);
    if residual > tol * (1.0 + linalg::max_abs(&ric)) {
        return Err(Error::NotSoliton { residual });
    }
    let inv = frame.transpose() * nilalg.gram();
    let derivation_coords = &frame * &derivation * inv;
    Ok(RicciData {
        ricci: ric,
        frame,
        einstein_constant: None,
        soliton: Some(Soliton {
            c,
            derivation,
            derivation_coords,
            residual,
        }),
    })
}

/// `ℝA ⋉ 𝔫` with `ad A = s·d`, `A` a unit vector orthogonal to `𝔫`, placed first.
pub fn scaled_extension(nilalg: &MetricLieAlgebra, d: &DMatrix<f64>, s: f64) -> Result<MetricLieAlgebra> {
    let n = nilalg.dim();
    let m = n + 1;
    let mut structure = vec![0.0; m * m * m];
    for i in 0..n {
        for j in 0..n {
            for k in 0..n {
                structure[((i + 1) * m + j + 1) * m + k + 1] = nilalg.c(i, j, k);
            }
        }
    }
    for j in 0..n {
        for k in 0..n {
            let v = s * d[(k, j)];
            structure[(j + 1) * m + k + 1] = v;
            structure[((j + 1) * m) * m + k + 1] = -v;
        }
    }
    let mut gram = DMatrix::zeros(m, m);
    gram[(0, 0)] = 1.0;
    gram.view_mut((1, 1), (n, n)).copy_from(nilalg.gram());
    let mut labels = vec!["A".to_string()];
    labels.extend(nilalg.labels().iter().cloned());
    MetricLieAlgebra::new(m, structure, gram, Some(labels))
}

/// Einstein rank-one extension of a nilsoliton.
pub fn soliton_extension(nilalg: &MetricLieAlgebra, tol: f64) -> Result<(MetricLieAlgebra, SolvableSplit)> {
    let data = soliton_data(nilalg, tol)?;
    let d = data.soliton.expect("soliton_data fills the soliton").derivation_coords;
    soliton_extension_with(nilalg, &d, tol)
}

/// Signed gap between `Ric(A,A)` and the mean Ricci value on `𝔫`.
fn extension_gap(nilalg: &MetricLieAlgebra, d: &DMatrix<f64>, s: f64) -> Result<f64> {
    let ext = scaled_extension(nilalg, d, s)?;
    let ric = ricci(&ext).ricci;
    let n = nilalg.dim();
    let mean = (1..=n).map(|i| ric[(i, i)]).sum::<f64>() / n as f64;
    Ok(ric[(0, 0)] - mean)
}

/// Same as [`soliton_extension`] with the derivation `d` (acting on the
/// algebra's coordinates) supplied directly.
pub fn soliton_extension_with(
    nilalg: &MetricLieAlgebra,
    d: &DMatrix<f64>,
    tol: f64,
) -> Result<(MetricLieAlgebra, SolvableSplit)> {
    let n = nilalg.dim();
    if d.nrows() != n || d.ncols() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            got: d.nrows(),
        });
    }
    let scale = 1.0 + linalg::max_abs(d) * linalg::max_abs(d) + nilalg.scale() * nilalg.scale();
    let flat = 1e-13 * scale;
    let f0 = extension_gap(nilalg, d, 0.0)?;
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut fhi = extension_gap(nilalg, d, hi)?;
    let mut doublings = 0;
    while fhi.signum() == f0.signum() && fhi.abs() > flat && doublings < 10 {
        lo = hi;
        hi *= 2.0;
        fhi = extension_gap(nilalg, d, hi)?;
        doublings += 1;
    }
    let s = if fhi.abs() <= flat {
        hi
    } else if fhi.signum() == f0.signum() {
        let ext = scaled_extension(nilalg, d, hi)?;
        return Err(Error::ExtensionNotEinstein {
            residual: einstein_residual(&ext).0,
        });
    } else {
        let flo_sign = if lo == 0.0 { f0.signum() } else { extension_gap(nilalg, d, lo)?.signum() };
        for _ in 0..200 {
            let mid = 0.5 * (lo + hi);
            if mid <= lo || mid >= hi {
                break;
            }
            let fm = extension_gap(nilalg, d, mid)?;
            if fm == 0.0 {
                lo = mid;
                hi = mid;
                break;
            }
            if fm.signum() == flo_sign {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let ext = scaled_extension(nilalg, d, s)?;
    let (residual, _) = einstein_residual(&ext);
    if residual > tol {
        return Err(Error::ExtensionNotEinstein { residual });
    }
    let split = SolvableSplit::new(vec![0], (1..=n).collect(), n + 1)?;
    Ok((ext, split))
}
