//! JSON interchange for algebras and embeddings.
//!
//! Algebra: `{dim, labels?, brackets: [{i, j, coeffs: {"k": value}}], gram, split?: {a, n}}`
//! with 0-based indices and only `i < j` stored.
//!
//! Embedding: `{N, c, metric, basis_order, mats, certificate}`.
//!
//! Numbers are written in the shortest decimal form that reads back to the
//! same double, so a write/read cycle is bit-exact.

use std::collections::BTreeMap;
use std::path::Path;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::embed::{Embedding, Representation};
use crate::error::{Error, Result};
use crate::lie::{jacobi_residual, BracketTerm, MetricLieAlgebra, SolvableSplit};
use crate::triangular::MetricKind;
use crate::verify::EmbeddingCertificate;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BracketEntry {
    pub i: usize,
    pub j: usize,
    pub coeffs: BTreeMap<String, f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SplitEntry {
    pub a: Vec<usize>,
    pub n: Vec<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AlgebraFile {
    pub dim: usize,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub labels: Option<Vec<String>>,
    #[serde(default)]
    pub brackets: Vec<BracketEntry>,
    pub gram: Vec<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub split: Option<SplitEntry>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EmbeddingFile {
    #[serde(rename = "N")]
    pub n: usize,
    pub c: f64,
    pub metric: MetricKind,
    pub basis_order: Vec<String>,
    /// One `N × N` matrix per basis vector, row-major.
    pub mats: Vec<Vec<Vec<f64>>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub certificate: Option<EmbeddingCertificate>,
}

fn parse_error(e: serde_json::Error) -> Error {
    use serde_json::error::Category;
    match e.classify() {
        Category::Data => Error::Schema(e.to_string()),
        _ => Error::Parse(e.to_string()),
    }
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| Error::Io(format!("{}: {e}", path.display())))
}

pub fn algebra_from_file(file: &AlgebraFile) -> Result<(MetricLieAlgebra, Option<SolvableSplit>)> {
    let dim = file.dim;
    if dim == 0 {
        return Err(Error::Schema("dim must be positive".into()));
    }
    if file.gram.len() != dim || file.gram.iter().any(|r| r.len() != dim) {
        return Err(Error::Schema(format!("gram must be {dim}x{dim}")));
    }
    if let Some(l) = &file.labels {
        if l.len() != dim {
            return Err(Error::Schema(format!("labels has {} entries, expected {dim}", l.len())));
        }
    }
    let mut terms = Vec::new();
    for (idx, b) in file.brackets.iter().enumerate() {
        if b.i >= dim || b.j >= dim {
            return Err(Error::Schema(format!("brackets[{idx}]: index ({}, {}) out of range for dim {dim}", b.i, b.j)));
        }
        if b.i >= b.j {
            return Err(Error::Schema(format!("brackets[{idx}]: expected i < j, got ({}, {})", b.i, b.j)));
        }
        for (key, &value) in &b.coeffs {
            let k: usize = key
                .trim()
                .parse()
                .map_err(|_| Error::Schema(format!("brackets[{idx}].coeffs: key `{key}` is not an index")))?;
            if k >= dim {
                return Err(Error::Schema(format!("brackets[{idx}].coeffs: index {k} out of range for dim {dim}")));
            }
            terms.push(BracketTerm::new(b.i, b.j, k, value));
        }
    }
    let gram = DMatrix::from_fn(dim, dim, |r, c| file.gram[r][c]);
    let alg = MetricLieAlgebra::from_brackets(dim, &terms, gram, file.labels.clone())
        .map_err(|e| Error::Validation(e.to_string()))?;
    let jac = jacobi_residual(&alg);
    if jac > 1e-9 * (1.0 + alg.scale() * alg.scale()) {
        return Err(Error::Validation(format!("Jacobi identity fails (residual {jac:.3e})")));
    }
    let split = match &file.split {
        Some(s) => Some(SolvableSplit::new(s.a.clone(), s.n.clone(), dim).map_err(|e| Error::Schema(format!("split: {e}")))?),
        None => None,
    };
    Ok((alg, split))
}

pub fn parse_algebra_str(text: &str) -> Result<(MetricLieAlgebra, Option<SolvableSplit>)> {
    let file: AlgebraFile = serde_json::from_str(text).map_err(parse_error)?;
    algebra_from_file(&file)
}

pub fn parse_algebra(path: impl AsRef<Path>) -> Result<(MetricLieAlgebra, Option<SolvableSplit>)> {
    parse_algebra_str(&read(path.as_ref())?)
}

pub fn algebra_to_file(alg: &MetricLieAlgebra, split: Option<&SolvableSplit>) -> AlgebraFile {
    let dim = alg.dim();
    let mut brackets = Vec::new();
    for i in 0..dim {
        for j in i + 1..dim {
            let coeffs: BTreeMap<String, f64> = (0..dim)
                .filter(|&k| alg.c(i, j, k) != 0.0)
                .map(|k| (k.to_string(), alg.c(i, j, k)))
                .collect();
            if !coeffs.is_empty() {
                brackets.push(BracketEntry { i, j, coeffs });
            }
        }
    }
    let g = alg.gram();
    AlgebraFile {
        dim,
        labels: Some(alg.labels().to_vec()),
        brackets,
        gram: (0..dim).map(|r| (0..dim).map(|c| g[(r, c)]).collect()).collect(),
        split: split.map(|s| SplitEntry {
            a: s.a().to_vec(),
            n: s.n().to_vec(),
        }),
    }
}

pub fn algebra_to_json(alg: &MetricLieAlgebra, split: Option<&SolvableSplit>) -> String {
    serde_json::to_string_pretty(&algebra_to_file(alg, split)).expect("algebra serializes")
}

fn rows(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    m.row_iter().map(|r| r.iter().copied().collect()).collect()
}

pub fn embedding_to_file(e: &Embedding) -> EmbeddingFile {
    representation_to_file(&e.representation, e.c, e.metric, Some(e.certificate.clone()))
}

pub fn representation_to_file(
    rep: &Representation,
    c: f64,
    metric: MetricKind,
    certificate: Option<EmbeddingCertificate>,
) -> EmbeddingFile {
    EmbeddingFile {
        n: rep.n(),
        c,
        metric,
        basis_order: rep.basis_order().to_vec(),
        mats: rep.mats().iter().map(rows).collect(),
        certificate,
    }
}

pub fn embedding_to_json(e: &Embedding) -> String {
    serde_json::to_string_pretty(&embedding_to_file(e)).expect("embedding serializes")
}

/// Rebuilds the matrices of an embedding file; the stored certificate is
/// ignored.
pub fn representation_from_file(file: &EmbeddingFile) -> Result<Representation> {
    let n = file.n;
    for (idx, m) in file.mats.iter().enumerate() {
        if m.len() != n || m.iter().any(|r| r.len() != n) {
            return Err(Error::Schema(format!("mats[{idx}] is not {n}x{n}")));
        }
    }
    let mats: Vec<DMatrix<f64>> = file
        .mats
        .iter()
        .map(|m| DMatrix::from_fn(n, n, |r, c| m[r][c]))
        .collect();
    if mats.is_empty() {
        return Err(Error::Schema("mats is empty".into()));
    }
    Representation::single(mats, "file", file.basis_order.clone())
}

pub fn parse_embedding_str(text: &str) -> Result<EmbeddingFile> {
    serde_json::from_str(text).map_err(parse_error)
}

pub fn parse_embedding(path: impl AsRef<Path>) -> Result<EmbeddingFile> {
    parse_embedding_str(&read(path.as_ref())?)
}

#[cfg(test)]
mod tests {
    use super::*;

    const H3: &str = r#"{
        "dim": 3,
        "labels": ["X", "Y", "Z"],
        "brackets": [{"i": 0, "j": 1, "coeffs": {"2": 1.0}}],
        "gram": [[1,0,0],[0,1,0],[0,0,1]]
    }"#;

    #[test]
    fn parses_h3() {
        let (alg, split) = parse_algebra_str(H3).unwrap();
        assert_eq!(alg.dim(), 3);
        assert_eq!(alg.c(0, 1, 2), 1.0);
        assert_eq!(alg.c(1, 0, 2), -1.0);
        assert!(split.is_none());
    }

    #[test]
    fn error_kinds() {
        let bad_gram = H3.replace("[0,0,1]]", "[0,0,-1]]");
        assert!(matches!(parse_algebra_str(&bad_gram), Err(Error::Validation(_))));
        let bad_index = H3.replace(r#""2": 1.0"#, r#""3": 1.0"#);
        assert!(matches!(parse_algebra_str(&bad_index), Err(Error::Schema(_))));
        assert!(matches!(parse_algebra_str("{\"dim\": 3,"), Err(Error::Parse(_))));
        assert!(matches!(parse_algebra_str(r#"{"dim": 1}"#), Err(Error::Schema(_))));
        let missing = parse_algebra(std::path::Path::new("/nonexistent/alg.json"));
        assert!(matches!(missing, Err(Error::Io(_))));
    }

    #[test]
    fn jacobi_violation_rejected() {
        let text = r#"{"dim": 3, "brackets": [
            {"i": 0, "j": 1, "coeffs": {"2": 1}},
            {"i": 1, "j": 2, "coeffs": {"0": 1}},
            {"i": 0, "j": 2, "coeffs": {"0": 1}}],
            "gram": [[1,0,0],[0,1,0],[0,0,1]]}"#;
        assert!(matches!(parse_algebra_str(text), Err(Error::Validation(_))));
    }

    #[test]
    fn round_trip_is_bit_exact() {
        let text = r#"{"dim": 2, "brackets": [{"i": 0, "j": 1, "coeffs": {"1": 0.1}}],
            "gram": [[0.3, 0.1], [0.1, 2.7]], "split": {"a": [0], "n": [1]}}"#;
        let (alg, split) = parse_algebra_str(text).unwrap();
        let (back, split2) = parse_algebra_str(&algebra_to_json(&alg, split.as_ref())).unwrap();
        assert_eq!(back.structure(), alg.structure());
        assert_eq!(back.gram(), alg.gram());
        assert_eq!(split, split2);
    }
}
