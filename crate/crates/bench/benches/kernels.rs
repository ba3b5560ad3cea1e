use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use tpuzzle_core::cayley::cayley_apply_with;
use tpuzzle_core::diagnostics::{stabilizer_norm, MagicMode};
use tpuzzle_core::rng::stream;
use tpuzzle_core::*;

fn cayley(c: &mut Criterion) {
    let mut group = c.benchmark_group("cayley");
    for n in [6usize, 8, 10] {
        let h = RandomHermitian::sample(n, 4 * n * n, &mut stream(1, &[n as u64])).unwrap();
        let s = Statevector::random(n, &mut stream(2, &[n as u64]));
        group.bench_with_input(BenchmarkId::new("matrix_free", n), &n, |b, _| {
            b.iter(|| cayley_apply_with(&h, black_box(0.2), &s, SolverOptions::default()).unwrap())
        });
        if n <= 8 {
            let w = dense_cayley(&h, 0.2).unwrap();
            group.bench_with_input(BenchmarkId::new("dense_apply", n), &n, |b, _| b.iter(|| w.apply(black_box(&s)).unwrap()));
        }
    }
    group.finish();
}

fn pauli_sum(c: &mut Criterion) {
    let n = 10;
    let h = RandomHermitian::sample(n, 400, &mut stream(3, &[])).unwrap();
    let s = Statevector::random(n, &mut stream(4, &[]));
    let mut out = vec![num_complex::Complex64::new(0.0, 0.0); 1 << n];
    c.bench_function("pauli_sum_apply_n10_k400", |b| b.iter(|| h.apply_into(black_box(s.amplitudes()), &mut out)));
}

fn magic(c: &mut Criterion) {
    let s = Statevector::random(6, &mut stream(5, &[]));
    c.bench_function("stabilizer_norm_exhaustive_n6", |b| b.iter(|| stabilizer_norm(black_box(&s), MagicMode::Exhaustive).unwrap()));
}

criterion_group!(benches, cayley, pauli_sum, magic);
criterion_main!(benches);
