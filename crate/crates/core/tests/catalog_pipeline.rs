use solvembed::catalog::{all, example};
use solvembed::embed::{equalize, special_rep, StageMode, StageSystem};
use solvembed::io::{embedding_to_json, parse_embedding_str, representation_from_file};
use solvembed::{
    certify, einstein_check, embed, grading, soliton_data, soliton_extension, validate_split, EmbedOptions,
    MetricKind, Scale, Tolerances,
};

#[test]
fn every_entry_embeds_and_certifies() {
    for ex in all().unwrap() {
        let (alg, split) = ex.designated().unwrap();
        let e = embed(&alg, &split, &EmbedOptions::default()).unwrap();
        let cert = &e.certificate;
        assert!(cert.accepted, "{}: {:?}", ex.name, cert.failures);
        assert!(cert.pullback_residual <= 1e-8, "{}", ex.name);
        assert!(cert.faithfulness_margin > 0.0);
        assert!(e.n() <= e.dimension_bound, "{}: {} > {}", ex.name, e.n(), e.dimension_bound);
        if let Some(n) = ex.expected.embed_n {
            assert_eq!(e.n(), n, "{}", ex.name);
        }
        if let Some(c) = ex.expected.embed_c {
            assert!((cert.achieved_c - c).abs() <= 1e-9 * c, "{}: {}", ex.name, cert.achieved_c);
        }
    }
}

#[test]
fn frobenius_target_also_certifies() {
    let opts = EmbedOptions {
        metric: MetricKind::Frobenius,
        ..EmbedOptions::default()
    };
    for ex in all().unwrap() {
        let (alg, split) = ex.designated().unwrap();
        let e = embed(&alg, &split, &opts).unwrap();
        assert!(e.certificate.accepted, "{}: {:?}", ex.name, e.certificate.failures);
    }
}

#[test]
fn serialized_embedding_recertifies() {
    for ex in all().unwrap() {
        let (alg, split) = ex.designated().unwrap();
        let e = embed(&alg, &split, &EmbedOptions::default()).unwrap();
        let file = parse_embedding_str(&embedding_to_json(&e)).unwrap();
        let rep = representation_from_file(&file).unwrap();
        assert_eq!(rep.mats(), e.representation.mats());
        let cert = certify(&alg, &rep, file.metric, &Tolerances::default());
        assert!(cert.accepted);
        assert_eq!(Some(cert), file.certificate);
    }
}

#[test]
fn scale_family_per_entry() {
    for ex in all().unwrap() {
        let (alg, split) = ex.designated().unwrap();
        let report = validate_split(&alg, &split, 1e-9);
        let gr = grading(&alg, &split, report.derivation.as_ref().unwrap(), 1e-9).unwrap();
        let sys = StageSystem::new(&alg, &split, &gr).unwrap();
        let t_min = sys.min_feasible_t(StageMode::Automorphic).unwrap();
        let base = if t_min > 0.0 { t_min } else { 1.0 };
        let mut a_parts = Vec::new();
        for t in [1.01 * base, 10.0 * base, 100.0 * base] {
            let (rep, plan) = equalize(&sys, t).unwrap();
            for c in &plan.achieved {
                assert!((c - t).abs() <= 1e-8 * t, "{}: {c} vs {t}", ex.name);
            }
            let a: Vec<_> = split.a().iter().map(|&i| rep.mats()[i].clone()).collect();
            a_parts.push(a);
        }
        assert_eq!(a_parts[0], a_parts[1], "{}", ex.name);
        assert_eq!(a_parts[0], a_parts[2], "{}", ex.name);
    }
}

#[test]
fn forced_scale_below_minimum_is_reported() {
    let ex = example("heisenberg_ext").unwrap();
    let (alg, split) = ex.designated().unwrap();
    let opts = EmbedOptions {
        scale: Scale::Value(10.0),
        ..EmbedOptions::default()
    };
    let err = embed(&alg, &split, &opts).unwrap_err();
    assert!(matches!(err, solvembed::Error::ScaleTooSmall { min_feasible: Some(m), .. } if (m - 16.0).abs() < 1e-9));
}

#[test]
fn special_rep_reaches_target_on_every_eigenspace() {
    let ex = example("filiform4_ext").unwrap();
    let (alg, split) = ex.designated().unwrap();
    let report = validate_split(&alg, &split, 1e-9);
    let gr = grading(&alg, &split, report.derivation.as_ref().unwrap(), 1e-9).unwrap();
    let (_, achieved) = special_rep(&alg, &split, &gr, 40.0).unwrap();
    assert_eq!(achieved.len(), 3);
    for c in achieved {
        assert!((c - 40.0).abs() <= 1e-9 * 40.0);
    }
}

#[test]
fn heisenberg_solitons_extend_to_einstein() {
    for name in ["heisenberg3", "heisenberg5", "heisenberg7"] {
        let ex = example(name).unwrap();
        let data = soliton_data(&ex.algebra, 1e-9).unwrap();
        let s = data.soliton.unwrap();
        assert!((s.c - ex.expected.soliton_c.unwrap()).abs() <= 1e-9, "{name}");
        assert!((s.derivation - ex.expected.soliton_derivation.unwrap()).amax() <= 1e-9);
        let (ext, split) = soliton_extension(&ex.algebra, 1e-8).unwrap();
        assert!(einstein_check(&ext, 1e-8).0, "{name}");
        assert!(validate_split(&ext, &split, 1e-9).passed());
    }
}
