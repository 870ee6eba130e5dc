use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::linalg;

/// A finite-dimensional real Lie algebra with an inner product.
///
/// `structure[(i * dim + j) * dim + k]` is the coefficient of `e_k` in `[e_i, e_j]`.
#[derive(Debug, Clone, PartialEq)]
pub struct MetricLieAlgebra {
    dim: usize,
    structure: Vec<f64>,
    gram: DMatrix<f64>,
    labels: Vec<String>,
}

/// One nonzero bracket entry `[e_i, e_j] ∋ value · e_k`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BracketTerm {
    pub i: usize,
    pub j: usize,
    pub k: usize,
    pub value: f64,
}

impl BracketTerm {
    pub fn new(i: usize, j: usize, k: usize, value: f64) -> Self {
        Self { i, j, k, value }
    }
}

fn default_labels(dim: usize) -> Vec<String> {
    (0..dim).map(|i| format!("e{i}")).collect()
}

impl MetricLieAlgebra {
    /// Builds an algebra from a full structure tensor.
    ///
    /// Rejects tensors that are not antisymmetric in the first two indices and
    /// grams that are not symmetric positive definite. The Jacobi identity is
    /// checked separately by [`validate_algebra`].
    pub fn new(
        dim: usize,
        structure: Vec<f64>,
        gram: DMatrix<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        if dim == 0 {
            return Err(Error::InvalidAlgebra("dimension must be positive".into()));
        }
        if structure.len() != dim * dim * dim {
            return Err(Error::DimensionMismatch {
                expected: dim * dim * dim,
                got: structure.len(),
            });
        }
        if gram.nrows() != dim || gram.ncols() != dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                got: gram.nrows(),
            });
        }
        if structure.iter().any(|x| !x.is_finite()) || gram.iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidAlgebra("non-finite entry".into()));
        }
        let scale = structure.iter().fold(0.0_f64, |a, x| a.max(x.abs()));
        for i in 0..dim {
            for j in 0..dim {
                for k in 0..dim {
                    let a = structure[(i * dim + j) * dim + k];
                    let b = structure[(j * dim + i) * dim + k];
                    if (a + b).abs() > 1e-12 * (1.0 + scale) {
                        return Err(Error::InvalidAlgebra(format!(
                            "structure constants not antisymmetric at ({i},{j},{k})"
                        )));
                    }
                }
            }
        }
        let gscale = linalg::max_abs(&gram);
        if linalg::max_abs(&(&gram - gram.transpose())) > 1e-12 * (1.0 + gscale) {
            return Err(Error::InvalidAlgebra("gram matrix is not symmetric".into()));
        }
        let (vals, _) = linalg::sym_eigen_sorted(&gram);
        if vals[0] <= 1e-14 * (1.0 + gscale) {
            return Err(Error::NotPositiveDefinite {
                min_eigenvalue: vals[0],
            });
        }
        let labels = match labels {
            Some(l) if l.len() == dim => l,
            Some(l) => {
                return Err(Error::DimensionMismatch {
                    expected: dim,
                    got: l.len(),
                })
            }
            None => default_labels(dim),
        };
        Ok(Self {
            dim,
            structure,
            gram,
            labels,
        })
    }

    /// Builds an algebra from the brackets `[e_i, e_j]` with `i < j`; the
    /// antisymmetric partner is filled in.
    pub fn from_brackets(
        dim: usize,
        terms: &[BracketTerm],
        gram: DMatrix<f64>,
        labels: Option<Vec<String>>,
    ) -> Result<Self> {
        let mut structure = vec![0.0; dim * dim * dim];
        for t in terms {
            if t.i >= dim || t.j >= dim || t.k >= dim {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket index out of range in ({}, {}, {})",
                    t.i, t.j, t.k
                )));
            }
            if t.i == t.j {
                return Err(Error::InvalidAlgebra(format!(
                    "bracket [e{0}, e{0}] must vanish",
                    t.i
                )));
            }
            structure[(t.i * dim + t.j) * dim + t.k] += t.value;
            structure[(t.j * dim + t.i) * dim + t.k] -= t.value;
        }
        Self::new(dim, structure, gram, labels)
    }

    /// Same as [`from_brackets`](Self::from_brackets) with an orthonormal basis.
    pub fn orthonormal(dim: usize, terms: &[BracketTerm], labels: &[&str]) -> Result<Self> {
        let labels = if labels.is_empty() {
            None
        } else {
            Some(labels.iter().map(|s| s.to_string()).collect())
        };
        Self::from_brackets(dim, terms, DMatrix::identity(dim, dim), labels)
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn gram(&self) -> &DMatrix<f64> {
        &self.gram
    }

    pub fn labels(&self) -> &[String] {
        &self.labels
    }

    pub fn structure(&self) -> &[f64] {
        &self.structure
    }

    #[inline]
    pub fn c(&self, i: usize, j: usize, k: usize) -> f64 {
        self.structure[(i * self.dim + j) * self.dim + k]
    }

    /// Largest absolute structure constant.
    pub fn scale(&self) -> f64 {
        self.structure.iter().fold(0.0_f64, |a, x| a.max(x.abs()))
    }

    pub fn is_abelian(&self) -> bool {
        self.structure.iter().all(|x| *x == 0.0)
    }

    /// `[e_i, e_j]` as a coordinate vector.
    pub fn bracket_basis(&self, i: usize, j: usize) -> DVector<f64> {
        let off = (i * self.dim + j) * self.dim;
        DVector::from_column_slice(&self.structure[off..off + self.dim])
    }

    pub fn bracket(&self, x: &DVector<f64>, y: &DVector<f64>) -> Result<DVector<f64>> {
        self.check_len(x.len())?;
        self.check_len(y.len())?;
        let n = self.dim;
        let mut out = DVector::zeros(n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for j in 0..n {
                let w = x[i] * y[j];
                if w == 0.0 {
                    continue;
                }
                let off = (i * n + j) * n;
                for k in 0..n {
                    out[k] += w * self.structure[off + k];
                }
            }
        }
        Ok(out)
    }

    /// Matrix of `ad x` in the given basis: column `q` holds `[x, e_q]`.
    pub fn ad(&self, x: &DVector<f64>) -> Result<DMatrix<f64>> {
        self.check_len(x.len())?;
        let n = self.dim;
        let mut m = DMatrix::zeros(n, n);
        for i in 0..n {
            if x[i] == 0.0 {
                continue;
            }
            for q in 0..n {
                let off = (i * n + q) * n;
                for k in 0..n {
                    m[(k, q)] += x[i] * self.structure[off + k];
                }
            }
        }
        Ok(m)
    }

    pub fn ad_basis(&self, i: usize) -> DMatrix<f64> {
        let n = self.dim;
        DMatrix::from_fn(n, n, |k, q| self.c(i, q, k))
    }

    pub fn inner(&self, x: &DVector<f64>, y: &DVector<f64>) -> f64 {
        (x.transpose() * &self.gram * y)[(0, 0)]
    }

    /// Re-expresses the algebra in the basis given by the columns of `basis`
    /// (coordinates w.r.t. the current basis).
    pub fn change_basis(&self, basis: &DMatrix<f64>, labels: Option<Vec<String>>) -> Result<Self> {
        let n = self.dim;
        if basis.nrows() != n || basis.ncols() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                got: basis.ncols(),
            });
        }
        let inv = basis
            .clone()
            .try_inverse()
            .ok_or_else(|| Error::InvalidAlgebra("basis change is singular".into()))?;
        let cols: Vec<DVector<f64>> = (0..n).map(|p| basis.column(p).into_owned()).collect();
        let mut structure = vec![0.0; n * n * n];
        for p in 0..n {
            for q in p + 1..n {
                let b = &inv * self.bracket(&cols[p], &cols[q])?;
                for r in 0..n {
                    structure[(p * n + q) * n + r] = b[r];
                    structure[(q * n + p) * n + r] = -b[r];
                }
            }
        }
        let gram = basis.transpose() * &self.gram * basis;
        let gram = (&gram + gram.transpose()) * 0.5;
        Self::new(n, structure, gram, labels)
    }

    fn check_len(&self, len: usize) -> Result<()> {
        if len != self.dim {
            Err(Error::DimensionMismatch {
                expected: self.dim,
                got: len,
            })
        } else {
            Ok(())
        }
    }
}

/// Structural summary returned by [`validate_algebra`].
#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub jacobi_residual: f64,
    /// Number of steps for the derived series to reach zero.
    pub derived_length: usize,
    pub solvable: bool,
    pub nilpotent: bool,
    /// Number of steps for the lower central series to reach zero, if it does.
    pub nilpotency_class: Option<usize>,
    pub completely_solvable: bool,
}

/// Largest absolute cyclic sum `[e_i,[e_j,e_l]] + [e_j,[e_l,e_i]] + [e_l,[e_i,e_j]]`.
pub fn jacobi_residual(alg: &MetricLieAlgebra) -> f64 {
    let n = alg.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        for j in i + 1..n {
            for l in j + 1..n {
                for m in 0..n {
                    let mut s = 0.0;
                    for k in 0..n {
                        s += alg.c(j, l, k) * alg.c(i, k, m)
                            + alg.c(l, i, k) * alg.c(j, k, m)
                            + alg.c(i, j, k) * alg.c(l, k, m);
                    }
                    worst = worst.max(s.abs());
                }
            }
        }
    }
    worst
}

/// Orthonormal (Euclidean-coordinate) basis of the span of all `[u, v]`.
fn bracket_span(alg: &MetricLieAlgebra, left: &DMatrix<f64>, right: &DMatrix<f64>, tol: f64) -> DMatrix<f64> {
    let n = alg.dim();
    let mut cols = Vec::new();
    for a in 0..left.ncols() {
        let u = left.column(a).into_owned();
        for b in 0..right.ncols() {
            let v = right.column(b).into_owned();
            let w = alg.bracket(&u, &v).expect("dimensions agree");
            cols.push(w);
        }
    }
    if cols.is_empty() {
        return DMatrix::zeros(n, 0);
    }
    let m = DMatrix::from_columns(&cols);
    linalg::column_basis(&m, tol)
}

/// Derived series dimensions, stopping at zero or when it stabilises.
pub fn derived_series(alg: &MetricLieAlgebra, tol: f64) -> Vec<usize> {
    let n = alg.dim();
    let mut current = DMatrix::<f64>::identity(n, n);
    let mut dims = vec![n];
    while current.ncols() > 0 {
        let next = bracket_span(alg, &current, &current, tol);
        let stalled = next.ncols() == current.ncols();
        dims.push(next.ncols());
        current = next;
        if stalled {
            break;
        }
    }
    dims
}

/// Lower central series dimensions of the subalgebra spanned by `basis`
/// (columns, coordinates in the algebra's basis).
pub fn lower_central_series(alg: &MetricLieAlgebra, basis: &DMatrix<f64>, tol: f64) -> Vec<usize> {
    let mut current = linalg::column_basis(basis, tol);
    let whole = current.clone();
    let mut dims = vec![current.ncols()];
    while current.ncols() > 0 {
        let next = bracket_span(alg, &whole, &current, tol);
        let stalled = next.ncols() == current.ncols();
        dims.push(next.ncols());
        current = next;
        if stalled {
            break;
        }
    }
    dims
}

/// Fixed, irregular coefficients for a "generic" element of a span.
pub(crate) fn generic_coefficients(len: usize) -> Vec<f64> {
    (0..len)
        .map(|i| {
            let x = (i as f64 + 1.0) * 0.754_877_666_246_692_7;
            1.0 + (x - x.floor()) * 0.5
        })
        .collect()
}

/// Whether `ad x` has only real eigenvalues for the basis vectors and a
/// generic combination of them.
pub fn completely_solvable(alg: &MetricLieAlgebra, tol: f64) -> bool {
    let n = alg.dim();
    let mut probes: Vec<DMatrix<f64>> = (0..n).map(|i| alg.ad_basis(i)).collect();
    let coeffs = generic_coefficients(n);
    probes.push(alg.ad(&DVector::from_vec(coeffs)).expect("length n"));
    // nilpotent Jordan blocks split into clusters of size ~eps^(1/m); the
    // imaginary-part threshold has to sit well above that.
    let imag_tol = tol.max(1e-6);
    probes.iter().all(|m| {
        let norm = m.norm();
        if norm == 0.0 {
            return true;
        }
        match bounded_eigenvalues(m) {
            Some(ev) => ev.iter().all(|z| z.im.abs() <= imag_tol * (1.0 + norm)),
            None => false,
        }
    })
}

/// Eigenvalues through a Schur form with an iteration cap. QR can stall on
/// nilpotent input, so a few real shifts (which leave imaginary parts alone)
/// are tried before giving up.
fn bounded_eigenvalues(m: &DMatrix<f64>) -> Option<Vec<nalgebra::Complex<f64>>> {
    let n = m.nrows();
    let norm = m.norm();
    for shift in [0.0, 0.377, -0.613, 1.291] {
        let shifted = m + DMatrix::identity(n, n) * (shift * norm);
        if let Some(schur) = shifted.try_schur(f64::EPSILON, 10_000) {
            return Some(schur.complex_eigenvalues().iter().copied().collect());
        }
    }
    None
}

/// Largest `|D[e_i,e_j] - [De_i,e_j] - [e_i,De_j]|` over basis pairs, for `d`
/// acting on coordinates.
pub fn derivation_residual(alg: &MetricLieAlgebra, d: &DMatrix<f64>) -> f64 {
    let n = alg.dim();
    let mut worst = 0.0_f64;
    for i in 0..n {
        let di = d.column(i).into_owned();
        for j in i + 1..n {
            let dj = d.column(j).into_owned();
            let lhs = d * alg.bracket_basis(i, j);
            let mut ei = DVector::zeros(n);
            ei[i] = 1.0;
            let mut ej = DVector::zeros(n);
            ej[j] = 1.0;
            let rhs = alg.bracket(&di, &ej).expect("length n") + alg.bracket(&ei, &dj).expect("length n");
            worst = worst.max((lhs - rhs).amax());
        }
    }
    worst
}

/// Checks the Jacobi identity and solvability, and reports the derived and
/// lower central series lengths.
pub fn validate_algebra(alg: &MetricLieAlgebra, tol: f64) -> Result<ValidationReport> {
    let scale = alg.scale();
    let jacobi = jacobi_residual(alg);
    if jacobi > tol * (1.0 + scale * scale) {
        return Err(Error::JacobiViolation { residual: jacobi });
    }
    let rank_tol = tol.max(1e-12) * (1.0 + scale);
    let derived = derived_series(alg, rank_tol);
    let last = *derived.last().unwrap();
    if last != 0 {
        return Err(Error::NotSolvable { stable_dim: last });
    }
    let all = DMatrix::identity(alg.dim(), alg.dim());
    let lcs = lower_central_series(alg, &all, rank_tol);
    let nilpotent = *lcs.last().unwrap() == 0;
    Ok(ValidationReport {
        jacobi_residual: jacobi,
        derived_length: derived.len() - 1,
        solvable: true,
        nilpotent,
        nilpotency_class: nilpotent.then(|| lcs.len() - 1),
        completely_solvable: completely_solvable(alg, tol),
    })
}
