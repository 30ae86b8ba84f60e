use agentstab_bench::layered_program;
use agentstab_core::logic::{
    is_stable_model, stable_model_acyclic, stable_models_bruteforce, AcyclicEvaluator,
};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use std::hint::black_box;

fn acyclic_evaluation(c: &mut Criterion) {
    let mut g = c.benchmark_group("stable_model_acyclic");
    for (layers, width) in [(4, 8), (16, 16), (64, 32)] {
        let p = layered_program(layers, width);
        g.bench_with_input(BenchmarkId::from_parameter(layers * width), &p, |b, p| {
            b.iter(|| stable_model_acyclic(black_box(p)).unwrap())
        });
    }
    g.finish();

    let p = layered_program(64, 32);
    let eval = AcyclicEvaluator::new(&p).unwrap();
    c.bench_function("acyclic_evaluator_reuse/2048", |b| {
        b.iter(|| eval.evaluate(std::iter::empty()))
    });
}

fn brute_force(c: &mut Criterion) {
    let mut g = c.benchmark_group("stable_models_bruteforce");
    for (layers, width) in [(2, 4), (3, 4), (4, 4)] {
        let p = layered_program(layers, width);
        g.bench_with_input(BenchmarkId::from_parameter(layers * width), &p, |b, p| {
            b.iter(|| stable_models_bruteforce(black_box(p), 20).unwrap())
        });
    }
    g.finish();
}

fn stability_check(c: &mut Criterion) {
    let p = layered_program(64, 32);
    let m = stable_model_acyclic(&p).unwrap();
    c.bench_function("is_stable_model/2048", |b| {
        b.iter(|| is_stable_model(black_box(&p), black_box(&m)))
    });
}

criterion_group!(benches, acyclic_evaluation, brute_force, stability_check);
criterion_main!(benches);
