use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::lie::algebra::{completely_solvable, lower_central_series, MetricLieAlgebra};
use crate::lie::weights::{positive_derivation, weight_decomposition};
use crate::linalg;

/// Designation of basis indices spanning the abelian part `𝔞` and the
/// nilradical `𝔫`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SolvableSplit {
    a: Vec<usize>,
    n: Vec<usize>,
}

impl SolvableSplit {
    /// Index sets must be disjoint and cover `0..dim`.
    pub fn new(a: Vec<usize>, n: Vec<usize>, dim: usize) -> Result<Self> {
        let mut seen = vec![false; dim];
        for &i in a.iter().chain(&n) {
            if i >= dim {
                return Err(Error::IndexOutOfRange {
                    index: i,
                    max: dim.saturating_sub(1),
                });
            }
            if seen[i] {
                return Err(Error::InvalidAlgebra(format!("index {i} listed twice in split")));
            }
            seen[i] = true;
        }
        if let Some(i) = seen.iter().position(|s| !s) {
            return Err(Error::InvalidAlgebra(format!("index {i} missing from split")));
        }
        Ok(Self { a, n })
    }

    pub fn a(&self) -> &[usize] {
        &self.a
    }

    pub fn n(&self) -> &[usize] {
        &self.n
    }

    pub fn dim(&self) -> usize {
        self.a.len() + self.n.len()
    }

    pub(crate) fn check_dim(&self, dim: usize) -> Result<()> {
        if self.dim() != dim {
            Err(Error::DimensionMismatch {
                expected: dim,
                got: self.dim(),
            })
        } else {
            Ok(())
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub passed: bool,
    pub detail: String,
}

/// Outcome of [`validate_split`]: one entry per structural condition.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionsReport {
    pub checks: Vec<ConditionCheck>,
    /// Positive element of `𝔞` found for condition (v), over the split's `𝔞` basis.
    pub derivation: Option<Vec<f64>>,
}

impl ConditionsReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> Vec<String> {
        self.checks
            .iter()
            .filter(|c| !c.passed)
            .map(|c| format!("{}: {}", c.name, c.detail))
            .collect()
    }

    pub fn get(&self, name: &str) -> Option<&ConditionCheck> {
        self.checks.iter().find(|c| c.name == name)
    }

    pub fn into_result(self) -> Result<Self> {
        if self.passed() {
            Ok(self)
        } else {
            Err(Error::ConditionsFailed(self.failures()))
        }
    }
}

pub const CHECK_PARTITION: &str = "partition";
pub const CHECK_ORTHOGONAL: &str = "a_perp_n";
pub const CHECK_COMPLETELY_SOLVABLE: &str = "(i) completely solvable";
pub const CHECK_NILRADICAL: &str = "(ii) n nilpotent ideal containing [s,s]";
pub const CHECK_ABELIAN: &str = "(iii) a abelian";
pub const CHECK_NO_CENTER: &str = "no_center";
pub const CHECK_SYMMETRIC: &str = "(iv) ad a symmetric";
pub const CHECK_POSITIVE: &str = "(v) positive derivation";

fn check(name: &'static str, passed: bool, detail: impl Into<String>) -> ConditionCheck {
    ConditionCheck {
        name,
        passed,
        detail: detail.into(),
    }
}

/// Checks the structural conditions on `(alg, split)`. Never fails; every
/// problem is a report entry.
pub fn validate_split(alg: &MetricLieAlgebra, split: &SolvableSplit, tol: f64) -> ConditionsReport {
    let mut checks = Vec::new();
    if split.check_dim(alg.dim()).is_err() {
        checks.push(check(
            CHECK_PARTITION,
            false,
            format!("split covers {} indices, algebra has dimension {}", split.dim(), alg.dim()),
        ));
        return ConditionsReport {
            checks,
            derivation: None,
        };
    }
    checks.push(check(CHECK_PARTITION, true, "complementary index sets"));

    let g = alg.gram();
    let scale = 1.0 + alg.scale();
    let gscale = 1.0 + linalg::max_abs(g);

    let mut cross = 0.0_f64;
    let mut cross_at = (0, 0);
    for &a in split.a() {
        for &n in split.n() {
            if g[(a, n)].abs() > cross {
                cross = g[(a, n)].abs();
                cross_at = (a, n);
            }
        }
    }
    let perp = cross <= tol * gscale;
    checks.push(check(
        CHECK_ORTHOGONAL,
        perp,
        if perp {
            "a and n are gram-orthogonal".to_string()
        } else {
            format!(
                "<{}, {}> = {:.3e}",
                alg.labels()[cross_at.0],
                alg.labels()[cross_at.1],
                g[(cross_at.0, cross_at.1)]
            )
        },
    ));

    let cs = completely_solvable(alg, tol);
    checks.push(check(
        CHECK_COMPLETELY_SOLVABLE,
        cs,
        if cs {
            "all ad eigenvalues real"
        } else {
            "some ad X has non-real eigenvalues"
        },
    ));

    // [s, s] ⊆ n: no bracket has a component along an a-coordinate
    let dim = alg.dim();
    let mut leak = 0.0_f64;
    let mut leak_at = (0, 0);
    for i in 0..dim {
        for j in 0..dim {
            for &a in split.a() {
                if alg.c(i, j, a).abs() > leak {
                    leak = alg.c(i, j, a).abs();
                    leak_at = (i, j);
                }
            }
        }
    }
    let n_basis = DMatrix::from_fn(dim, split.n().len(), |r, c| if r == split.n()[c] { 1.0 } else { 0.0 });
    let rank_tol = tol.max(1e-12) * scale;
    let lcs = lower_central_series(alg, &n_basis, rank_tol);
    let nilpotent = *lcs.last().unwrap_or(&0) == 0;
    let ideal = leak <= tol * scale;
    checks.push(check(
        CHECK_NILRADICAL,
        ideal && nilpotent,
        if !ideal {
            format!(
                "[{}, {}] leaves n (component {:.3e})",
                alg.labels()[leak_at.0],
                alg.labels()[leak_at.1],
                leak
            )
        } else if !nilpotent {
            format!("lower central series of n stalls at dimension {}", lcs.last().unwrap())
        } else {
            format!("nilpotent of class {}", lcs.len() - 1)
        },
    ));

    let mut ab = 0.0_f64;
    for &a in split.a() {
        for &b in split.a() {
            for k in 0..dim {
                ab = ab.max(alg.c(a, b, k).abs());
            }
        }
    }
    checks.push(check(
        CHECK_ABELIAN,
        ab <= tol * scale,
        format!("max |[a, a]| = {ab:.3e}"),
    ));

    let margin = if split.a().is_empty() {
        f64::INFINITY
    } else {
        let cols: Vec<_> = split
            .a()
            .iter()
            .map(|&a| {
                let m = alg.ad_basis(a);
                nalgebra::DVector::from_column_slice(m.as_slice())
            })
            .collect();
        let stacked = DMatrix::from_columns(&cols);
        // normalise by the gram of the a-basis so the margin is frame independent
        let ga = DMatrix::from_fn(split.a().len(), split.a().len(), |r, c| g[(split.a()[r], split.a()[c])]);
        let w = linalg::orthonormalize(&DMatrix::identity(ga.nrows(), ga.ncols()), &ga)
            .unwrap_or_else(|_| DMatrix::identity(ga.nrows(), ga.ncols()));
        linalg::min_singular_value(&(stacked * w))
    };
    let centerless = margin > tol.max(1e-12) * scale;
    checks.push(check(
        CHECK_NO_CENTER,
        centerless,
        if split.a().is_empty() {
            "a is trivial".to_string()
        } else {
            format!("smallest |ad A| over unit A in a: {margin:.3e}")
        },
    ));

    let mut asym = 0.0_f64;
    let mut asym_at = 0;
    for &a in split.a() {
        let ad = alg.ad_basis(a);
        let ga = g * &ad;
        let r = linalg::max_abs(&(&ga - ga.transpose()));
        if r > asym {
            asym = r;
            asym_at = a;
        }
    }
    let symmetric = asym <= tol * scale * gscale;
    checks.push(check(
        CHECK_SYMMETRIC,
        symmetric,
        if symmetric {
            "ad a is gram-symmetric".to_string()
        } else {
            format!("ad {} asymmetry {asym:.3e}", alg.labels()[asym_at])
        },
    ));

    let mut derivation = None;
    let positive = if !(perp && ideal && symmetric) {
        check(CHECK_POSITIVE, false, "not evaluated: earlier conditions failed")
    } else {
        match weight_decomposition(alg, split, tol.max(1e-12))
            .and_then(|wd| positive_derivation(&wd).map(|a| (wd, a)))
        {
            Ok((wd, a)) => {
                let values: Vec<String> = wd.spaces.iter().map(|s| format!("{:.6}", s.value(&a))).collect();
                derivation = Some(a.clone());
                check(
                    CHECK_POSITIVE,
                    true,
                    format!("A = {a:?}, weight values [{}]", values.join(", ")),
                )
            }
            Err(e) => check(CHECK_POSITIVE, false, e.to_string()),
        }
    };
    checks.push(positive);

    ConditionsReport { checks, derivation }
}
