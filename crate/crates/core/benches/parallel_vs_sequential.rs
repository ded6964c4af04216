use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use newton_socle::combid::detlemma_trials;
use newton_socle::exec::Execution;
use newton_socle::grobner::{nondegenerate, MonteCarlo};
use newton_socle::SparsePoly;
use std::hint::black_box;

fn modes() -> Vec<(&'static str, Execution)> {
    let mut v = vec![("sequential", Execution::Sequential)];
    if cfg!(feature = "parallel") {
        v.push(("parallel", Execution::Parallel));
    }
    v
}

fn bench_detlemma(c: &mut Criterion) {
    let mut group = c.benchmark_group("detlemma_trials_3x5");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| detlemma_trials(3, 5, black_box(200), 1, exec).unwrap())
        });
    }
    group.finish();
}

fn bench_nondegenerate(c: &mut Criterion) {
    // many compact faces with non-monomial face systems
    let f = SparsePoly::parse_any("x1^4 + x1^2*x2*x3 + x2^4 + x2^2*x3^2 + x3^5 + x1*x2^2*x3", Some(3)).unwrap();
    let mc = MonteCarlo { primes: 3, seed: 0 };
    let mut group = c.benchmark_group("nondegenerate_3var");
    group.sample_size(10);
    for (name, exec) in modes() {
        group.bench_with_input(BenchmarkId::from_parameter(name), &exec, |b, &exec| {
            b.iter(|| nondegenerate(black_box(&f), &mc, exec).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, bench_detlemma, bench_nondegenerate);
criterion_main!(benches);
