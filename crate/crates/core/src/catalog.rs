//! Worked examples and a seeded generator of 2-step nilpotent algebras.

use nalgebra::{DMatrix, DVector};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::embed::{rank_one_extension, two_step_derivation};
use crate::error::{Error, Result};
use crate::lie::{BracketTerm, MetricLieAlgebra, SolvableSplit};

/// Known answers attached to an example, where they can be derived by hand.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct Expected {
    /// Ricci in the orthonormal frame of the (gram-orthonormal) basis.
    pub ricci: Option<DMatrix<f64>>,
    pub einstein: Option<bool>,
    pub soliton_c: Option<f64>,
    pub soliton_derivation: Option<DMatrix<f64>>,
    pub embed_n: Option<usize>,
    pub embed_c: Option<f64>,
}

#[derive(Debug, Clone)]
pub struct Example {
    pub name: String,
    pub description: String,
    pub algebra: MetricLieAlgebra,
    /// `None` for nilpotent entries; see [`Example::designated`].
    pub split: Option<SolvableSplit>,
    /// For nilpotent entries, the derivation of the designated extension.
    pub derivation: Option<DMatrix<f64>>,
    pub expected: Expected,
}

impl Example {
    pub fn is_nilpotent(&self) -> bool {
        self.split.is_none()
    }

    /// The solvable algebra the entry stands for: itself, or for a nilpotent
    /// entry its rank-one extension by the designated derivation.
    pub fn designated(&self) -> Result<(MetricLieAlgebra, SolvableSplit)> {
        match (&self.split, &self.derivation) {
            (Some(split), _) => Ok((self.algebra.clone(), split.clone())),
            (None, Some(d)) => rank_one_extension(&self.algebra, d, false),
            (None, None) => Err(Error::InvalidAlgebra(format!("{} has no designated extension", self.name))),
        }
    }
}

/// Canonical names, one per built-in entry.
pub fn list() -> Vec<&'static str> {
    vec![
        "rh2",
        "rh3",
        "rh4",
        "heisenberg3",
        "heisenberg5",
        "heisenberg_ext",
        "filiform4",
        "filiform4_ext",
        "triangular_iwasawa2",
        "triangular_iwasawa3",
    ]
}

/// Looks an entry up by name. Parametrised families accept `rh5` as well as
/// `rh(5)`.
pub fn example(name: &str) -> Result<Example> {
    let unknown = || Error::UnknownExample(name.to_string());
    let norm: String = name.trim().chars().filter(|c| !matches!(c, '(' | ')' | ' ')).collect();
    let param = |prefix: &str| -> Option<usize> {
        norm.strip_prefix(prefix)
            .filter(|rest| !rest.is_empty() && rest.chars().all(|c| c.is_ascii_digit()))
            .and_then(|rest| rest.parse().ok())
    };
    match norm.as_str() {
        "heisenberg_ext" => return heisenberg_ext(),
        "filiform4" => return filiform4(),
        "filiform4_ext" => return filiform4_ext(),
        _ => {}
    }
    if let Some(n) = param("triangular_iwasawa") {
        return if n >= 2 { triangular_iwasawa(n) } else { Err(unknown()) };
    }
    if let Some(n) = param("heisenberg") {
        return if n >= 3 && n % 2 == 1 { heisenberg((n - 1) / 2) } else { Err(unknown()) };
    }
    if let Some(n) = param("rh") {
        return if n >= 2 { rh(n) } else { Err(unknown()) };
    }
    Err(unknown())
}

/// Every listed entry, resolved.
pub fn all() -> Result<Vec<Example>> {
    list().into_iter().map(example).collect()
}

fn diag(v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_diagonal(&DVector::from_column_slice(v))
}

/// Real hyperbolic space: `[A, X_i] = X_i`, orthonormal, `dim = n`.
pub fn rh(n: usize) -> Result<Example> {
    let terms: Vec<_> = (1..n).map(|i| BracketTerm::new(0, i, i, 1.0)).collect();
    let mut labels = vec!["A".to_string()];
    if n == 2 {
        labels.push("X".into());
    } else {
        labels.extend((1..n).map(|i| format!("X{i}")));
    }
    let algebra = MetricLieAlgebra::from_brackets(n, &terms, DMatrix::identity(n, n), Some(labels))?;
    let nn = (n - 1) as f64;
    Ok(Example {
        name: format!("rh{n}"),
        description: format!("real hyperbolic space RH^{n}: [A, X_i] = X_i"),
        algebra,
        split: Some(SolvableSplit::new(vec![0], (1..n).collect(), n)?),
        derivation: None,
        expected: Expected {
            ricci: Some(DMatrix::identity(n, n) * -nn),
            einstein: Some(true),
            embed_n: Some(n),
            embed_c: Some(2.0 * nn),
            ..Expected::default()
        },
    })
}

/// Heisenberg algebra `h^{2m+1}`: `[X_i, Y_i] = Z`, orthonormal.
pub fn heisenberg(m: usize) -> Result<Example> {
    let dim = 2 * m + 1;
    let terms: Vec<_> = (0..m).map(|i| BracketTerm::new(i, m + i, 2 * m, 1.0)).collect();
    let labels: Vec<String> = if m == 1 {
        vec!["X".into(), "Y".into(), "Z".into()]
    } else {
        (1..=m)
            .map(|i| format!("X{i}"))
            .chain((1..=m).map(|i| format!("Y{i}")))
            .chain(std::iter::once("Z".to_string()))
            .collect()
    };
    let algebra = MetricLieAlgebra::from_brackets(dim, &terms, DMatrix::identity(dim, dim), Some(labels))?;
    let mf = m as f64;
    let mut ric = vec![-0.5; 2 * m];
    ric.push(mf / 2.0);
    // Ric = c + D with D = a(Id on v, 2 on z): −½ = c + a, m/2 = c + 2a
    let a = (mf + 1.0) / 2.0;
    let mut dd = vec![a; 2 * m];
    dd.push(2.0 * a);
    let derivation = two_step_derivation(&algebra)?;
    Ok(Example {
        name: format!("heisenberg{dim}"),
        description: format!("Heisenberg algebra h^{dim}: [X_i, Y_i] = Z"),
        algebra,
        split: None,
        derivation: Some(derivation),
        expected: Expected {
            ricci: Some(diag(&ric)),
            einstein: Some(false),
            soliton_c: Some(-(mf + 2.0) / 2.0),
            soliton_derivation: Some(diag(&dd)),
            ..Expected::default()
        },
    })
}

/// `ℝA ⋉ h³` with `ad A = diag(1, 1, 2)`.
pub fn heisenberg_ext() -> Result<Example> {
    let h = heisenberg(1)?;
    let (algebra, split) = rank_one_extension(&h.algebra, &diag(&[1.0, 1.0, 2.0]), false)?;
    Ok(Example {
        name: "heisenberg_ext".into(),
        description: "rank-one extension of h^3 by diag(1, 1, 2)".into(),
        algebra,
        split: Some(split),
        derivation: None,
        expected: Expected {
            embed_n: Some(7),
            embed_c: Some(16.0),
            ..Expected::default()
        },
    })
}

/// Standard filiform `f₄`: `[e1, e2] = e3`, `[e1, e3] = e4`, orthonormal.
pub fn filiform4() -> Result<Example> {
    let terms = [BracketTerm::new(0, 1, 2, 1.0), BracketTerm::new(0, 2, 3, 1.0)];
    let labels = ["e1", "e2", "e3", "e4"].map(String::from).to_vec();
    let algebra = MetricLieAlgebra::from_brackets(4, &terms, DMatrix::identity(4, 4), Some(labels))?;
    Ok(Example {
        name: "filiform4".into(),
        description: "filiform f_4: [e1, e2] = e3, [e1, e3] = e4".into(),
        algebra,
        split: None,
        derivation: Some(diag(&[1.0, 1.0, 2.0, 3.0])),
        expected: Expected {
            ricci: Some(diag(&[-1.0, -0.5, 0.0, 0.5])),
            einstein: Some(false),
            soliton_c: Some(-1.5),
            soliton_derivation: Some(diag(&[0.5, 1.0, 1.5, 2.0])),
            ..Expected::default()
        },
    })
}

/// `ℝA ⋉ f₄` with `ad A = diag(1, 1, 2, 3)`: three eigenvalues, two stages.
pub fn filiform4_ext() -> Result<Example> {
    let f = filiform4()?;
    let (algebra, split) = rank_one_extension(&f.algebra, &diag(&[1.0, 1.0, 2.0, 3.0]), false)?;
    Ok(Example {
        name: "filiform4_ext".into(),
        description: "rank-one extension of f_4 by diag(1, 1, 2, 3)".into(),
        algebra,
        split: Some(split),
        derivation: None,
        expected: Expected::default(),
    })
}

/// Strictly lower elementary positions `(i, j)`, `i > j`, in column-major
/// order of the lower triangle.
fn lower_positions(n: usize) -> Vec<(usize, usize)> {
    (0..n).flat_map(|j| (j + 1..n).map(move |i| (i, j))).collect()
}

/// Matrix algebra of lower triangular `n × n` matrices with the Einstein
/// inner product (`2B` on the diagonal, `B` below it). With `traceless`, the
/// diagonal part is spanned by `H_k = E_kk − E_{k+1,k+1}`; otherwise by `E_kk`.
pub fn triangular_algebra(n: usize, traceless: bool) -> Result<(MetricLieAlgebra, SolvableSplit)> {
    let mut basis: Vec<DMatrix<f64>> = Vec::new();
    let mut labels = Vec::new();
    let na = if traceless { n - 1 } else { n };
    for k in 0..na {
        let mut m = DMatrix::zeros(n, n);
        m[(k, k)] = 1.0;
        if traceless {
            m[(k + 1, k + 1)] = -1.0;
            labels.push(format!("H{}", k + 1));
        } else {
            labels.push(format!("D{}", k + 1));
        }
        basis.push(m);
    }
    let pos = lower_positions(n);
    for &(i, j) in &pos {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = 1.0;
        basis.push(m);
        labels.push(format!("E{}{}", i + 1, j + 1));
    }
    let dim = basis.len();
    let gram = DMatrix::from_fn(dim, dim, |p, q| {
        let s: f64 = basis[p].component_mul(&basis[q]).sum();
        if p < na && q < na {
            2.0 * s
        } else {
            s
        }
    });
    // commutators of lower triangular matrices are strictly lower, so every
    // bracket is read off entrywise
    let mut terms = Vec::new();
    for p in 0..dim {
        for q in p + 1..dim {
            let c = &basis[p] * &basis[q] - &basis[q] * &basis[p];
            for (r, &(i, j)) in pos.iter().enumerate() {
                if c[(i, j)] != 0.0 {
                    terms.push(BracketTerm::new(p, q, na + r, c[(i, j)]));
                }
            }
        }
    }
    let alg = MetricLieAlgebra::from_brackets(dim, &terms, gram, Some(labels))?;
    let split = SolvableSplit::new((0..na).collect(), (na..dim).collect(), dim)?;
    Ok((alg, split))
}

/// Trace-free Iwasawa subalgebra of `t(n, ℝ)` with the Einstein inner product.
pub fn triangular_iwasawa(n: usize) -> Result<Example> {
    let (algebra, split) = triangular_algebra(n, true)?;
    Ok(Example {
        name: format!("triangular_iwasawa{n}"),
        description: format!("trace-free lower triangular {n}x{n} matrices, Einstein inner product"),
        algebra,
        split: Some(split),
        derivation: None,
        expected: Expected {
            einstein: Some(true),
            ..Expected::default()
        },
    })
}

/// Seeded 2-step nilpotent algebra on `𝔳 ⊕ 𝔷` with orthonormal basis: every
/// bracket `[v_i, v_j]` has nonzero dyadic coefficients `±k/4`, `k ∈ 1..=8`,
/// on each `z_l`, and `𝔷` is central.
pub fn random_two_step(seed: u64, dim_v: usize, dim_z: usize) -> Result<MetricLieAlgebra> {
    if dim_v < 2 {
        return Err(Error::InvalidAlgebra(format!("dim_v must be at least 2, got {dim_v}")));
    }
    if dim_z < 1 {
        return Err(Error::InvalidAlgebra("dim_z must be at least 1".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let dim = dim_v + dim_z;
    let mut terms = Vec::new();
    for i in 0..dim_v {
        for j in i + 1..dim_v {
            for l in 0..dim_z {
                let k: u32 = rng.random_range(1..=8);
                let sign = if rng.random::<bool>() { 1.0 } else { -1.0 };
                terms.push(BracketTerm::new(i, j, dim_v + l, sign * f64::from(k) / 4.0));
            }
        }
    }
    let labels = (1..=dim_v)
        .map(|i| format!("v{i}"))
        .chain((1..=dim_z).map(|i| format!("z{i}")))
        .collect();
    MetricLieAlgebra::from_brackets(dim, &terms, DMatrix::identity(dim, dim), Some(labels))
}
