use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use solvembed::catalog;
use solvembed::{certify, embed, ricci, EmbedOptions, MetricKind, Tolerances};

fn pipeline(c: &mut Criterion) {
    let mut group = c.benchmark_group("embed");
    for name in ["rh4", "heisenberg_ext", "filiform4_ext", "triangular_iwasawa3"] {
        let (alg, split) = catalog::example(name).unwrap().designated().unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(name), &(alg, split), |b, (alg, split)| {
            b.iter(|| embed(alg, split, &EmbedOptions::default()).unwrap())
        });
    }
    group.finish();

    let (alg, split) = catalog::example("filiform4_ext").unwrap().designated().unwrap();
    let e = embed(&alg, &split, &EmbedOptions::default()).unwrap();
    let tol = Tolerances::default();
    c.bench_function("certify/filiform4_ext", |b| {
        b.iter(|| certify(&alg, &e.representation, MetricKind::Einstein, &tol))
    });

    let (t4, _) = catalog::triangular_algebra(4, false).unwrap();
    c.bench_function("ricci/t4", |b| b.iter(|| ricci(&t4)));
}

criterion_group!(benches, pipeline);
criterion_main!(benches);
