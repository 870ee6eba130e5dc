//! Inner products on lower-triangular matrices.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Which inner product the target `𝔱(n,ℝ)` carries.
///
/// `Frobenius` is the trace form `B(X,Y) = tr(X Yᵗ)`. `Einstein` doubles `B` on
/// the diagonal and keeps it on the strictly lower part, the two parts being
/// orthogonal.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
#[serde(rename_all = "lowercase")]
pub enum MetricKind {
    #[default]
    Einstein,
    Frobenius,
}

impl MetricKind {
    /// Factor applied to `B` on diagonal matrices.
    pub fn diagonal_weight(self) -> f64 {
        match self {
            MetricKind::Einstein => 2.0,
            MetricKind::Frobenius => 1.0,
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            MetricKind::Einstein => "einstein",
            MetricKind::Frobenius => "frobenius",
        }
    }
}

impl fmt::Display for MetricKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for MetricKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "einstein" => Ok(MetricKind::Einstein),
            "frobenius" => Ok(MetricKind::Frobenius),
            other => Err(Error::Parse(format!("unknown metric kind `{other}`"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TriangularMetric {
    pub n: usize,
    pub kind: MetricKind,
}

impl TriangularMetric {
    pub fn new(n: usize, kind: MetricKind) -> Self {
        Self { n, kind }
    }

    pub fn inner(&self, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
        if x.nrows() != self.n || y.nrows() != self.n {
            return Err(Error::SizeMismatch);
        }
        metric_ip(self.kind, x, y)
    }
}

/// `E_{ij}` (0-based) of size `n`.
pub fn elementary(n: usize, i: usize, j: usize) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, n);
    m[(i, j)] = 1.0;
    m
}

fn check_same_square(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<()> {
    if !x.is_square() || x.shape() != y.shape() {
        Err(Error::SizeMismatch)
    } else {
        Ok(())
    }
}

pub fn frobenius(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    check_same_square(x, y)?;
    Ok(x.component_mul(y).sum())
}

/// Entries strictly above the diagonal are at most `tol` in magnitude.
pub fn is_lower(x: &DMatrix<f64>, tol: f64) -> bool {
    let n = x.nrows();
    (0..n).all(|r| (r + 1..x.ncols()).all(|c| x[(r, c)].abs() <= tol))
}

pub fn is_strictly_lower(x: &DMatrix<f64>, tol: f64) -> bool {
    is_lower(x, tol) && (0..x.nrows().min(x.ncols())).all(|i| x[(i, i)].abs() <= tol)
}

pub fn einstein_ip(x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    metric_ip(MetricKind::Einstein, x, y)
}

/// Inner product of two lower-triangular matrices under `kind`.
pub fn metric_ip(kind: MetricKind, x: &DMatrix<f64>, y: &DMatrix<f64>) -> Result<f64> {
    check_same_square(x, y)?;
    if kind == MetricKind::Frobenius {
        return frobenius(x, y);
    }
    if !is_lower(x, 0.0) {
        return Err(Error::NotLowerTriangular { index: 0 });
    }
    if !is_lower(y, 0.0) {
        return Err(Error::NotLowerTriangular { index: 1 });
    }
    // the trace pairing plus the extra diagonal weight, so strictly lower
    // arguments give bit-for-bit the Frobenius value
    let diag: f64 = (0..x.nrows()).map(|r| x[(r, r)] * y[(r, r)]).sum();
    Ok(frobenius(x, y)? + (kind.diagonal_weight() - 1.0) * diag)
}
