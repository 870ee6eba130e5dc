use std::fmt;
use std::str::FromStr;

use crate::embed::extend::extend_abelian;
use crate::embed::representation::Representation;
use crate::embed::stages::{equalize, ScalePlan, StageSystem};
use crate::error::{Error, Result};
use crate::lie::{grading, validate_split, MetricLieAlgebra, SolvableSplit};
use crate::linalg;
use crate::triangular::MetricKind;
use crate::verify::{certify, EmbeddingCertificate, Tolerances};

#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub enum Scale {
    /// Smallest workable scale, with a 10% margin over the stage minimum.
    #[default]
    Auto,
    Value(f64),
}

impl FromStr for Scale {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        if s.eq_ignore_ascii_case("auto") {
            return Ok(Scale::Auto);
        }
        match s.parse::<f64>() {
            Ok(v) if v.is_finite() && v > 0.0 => Ok(Scale::Value(v)),
            _ => Err(Error::Parse(format!("scale must be `auto` or a positive number, got `{s}`"))),
        }
    }
}

impl fmt::Display for Scale {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scale::Auto => f.write_str("auto"),
            Scale::Value(v) => write!(f, "{v}"),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct EmbedOptions {
    pub scale: Scale,
    pub metric: MetricKind,
    /// Tolerance for the structural checks.
    pub tol: f64,
    pub tolerances: Tolerances,
}

impl Default for EmbedOptions {
    fn default() -> Self {
        Self {
            scale: Scale::Auto,
            metric: MetricKind::Einstein,
            tol: 1e-9,
            tolerances: Tolerances::default(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Embedding {
    pub representation: Representation,
    pub certificate: EmbeddingCertificate,
    pub plan: ScalePlan,
    /// The scale the construction aimed for.
    pub c: f64,
    pub metric: MetricKind,
    pub eigenvalues: Vec<f64>,
    pub eigenspace_dims: Vec<usize>,
    /// `Σ_i dim 𝔰^(i) + dim 𝔞`.
    pub dimension_bound: usize,
    /// Labels of the ordered basis the stages are triangular in.
    pub ordered_labels: Vec<String>,
}

impl Embedding {
    pub fn n(&self) -> usize {
        self.representation.n()
    }
}

/// Validate, grade, build the scaled stage sum, pad `𝔞`, certify.
pub fn embed(alg: &MetricLieAlgebra, split: &SolvableSplit, opts: &EmbedOptions) -> Result<Embedding> {
    let report = validate_split(alg, split, opts.tol);
    if !report.passed() {
        return Err(Error::ConditionsFailed(report.failures()));
    }
    let derivation = report
        .derivation
        .clone()
        .ok_or(Error::NoPositiveDerivation)?;
    let gr = grading(alg, split, &derivation, opts.tol)?;
    let system = StageSystem::new(alg, split, &gr)?;
    let t_min = system
        .min_feasible_t(crate::embed::StageMode::Automorphic)
        .ok_or(Error::ScaleTooSmall {
            requested: f64::INFINITY,
            min_feasible: None,
        })?;
    let pa = system.a_pullback(opts.metric);
    let c_a = linalg::sym_eigen_sorted(&pa).0.last().copied().unwrap_or(0.0);
    let c_min = t_min.max(c_a);

    let c = match opts.scale {
        Scale::Value(c) => {
            if c < c_min * (1.0 - 1e-12) || (system.k() > 1 && c <= t_min) {
                return Err(Error::ScaleTooSmall {
                    requested: c,
                    min_feasible: Some(c_min),
                });
            }
            c
        }
        Scale::Auto => {
            let mut c = (1.1 * t_min).max(c_a);
            if c <= 0.0 {
                c = 1.0;
            }
            c
        }
    };

    let mut c = c;
    let mut tries = 0;
    let (stage_rep, mut plan) = loop {
        match equalize(&system, c) {
            Ok(v) => break v,
            Err(Error::ScaleTooSmall { .. }) if opts.scale == Scale::Auto && tries < 40 => {
                c *= 2.0;
                tries += 1;
            }
            Err(e) => return Err(e),
        }
    };
    plan.min_feasible_c = c_min;
    let rep = extend_abelian(&stage_rep, alg, split, c, opts.metric)?;
    let certificate = certify(alg, &rep, opts.metric, &opts.tolerances);
    let ob = &system.basis;
    Ok(Embedding {
        representation: rep.with_basis_order(alg.labels().to_vec()),
        certificate,
        plan,
        c,
        metric: opts.metric,
        eigenvalues: gr.eigenvalues.clone(),
        eigenspace_dims: gr.dims(),
        dimension_bound: system.stage_total() + ob.na,
        ordered_labels: ob.labels.clone(),
    })
}
