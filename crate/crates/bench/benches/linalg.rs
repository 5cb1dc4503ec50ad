use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qpt_core::dicke::{build_hamiltonian, DickeParams, TruncatedDicke};
use qpt_core::linalg::{eigh_dense, lanczos_ground, LanczosOptions, SymmetricMatrix};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::hint::black_box;

fn random_symmetric(n: usize, seed: u64) -> SymmetricMatrix {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut a = vec![0.0; n * n];
    for i in 0..n {
        for j in i..n {
            let v = rng.gen_range(-1.0..1.0);
            a[i * n + j] = v;
            a[j * n + i] = v;
        }
    }
    SymmetricMatrix::from_row_major(n, &a).unwrap()
}

fn dense(c: &mut Criterion) {
    let mut group = c.benchmark_group("eigh_dense");
    group.sample_size(10);
    for n in [50, 200, 500] {
        let m = random_symmetric(n, n as u64);
        group.bench_with_input(BenchmarkId::from_parameter(n), &m, |b, m| {
            b.iter(|| eigh_dense(black_box(m)).unwrap())
        });
    }
    group.finish();
}

fn lanczos(c: &mut Criterion) {
    let mut group = c.benchmark_group("lanczos_dicke");
    group.sample_size(10);
    for n in [32, 64, 128] {
        let spec = TruncatedDicke::new(n, n, DickeParams::new(1.0, 1.0, 0.45).unwrap()).unwrap();
        let h = build_hamiltonian(&spec).unwrap();
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| {
            b.iter(|| lanczos_ground(black_box(h), 1e-11, &LanczosOptions::default()).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, dense, lanczos);
criterion_main!(benches);
