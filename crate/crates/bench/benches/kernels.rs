use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qdyn_bench::{general, hermitian, localized_bath, open_spin_pair, super_ohmic_bath};
use qdyn_core::closed::{ising_ground_pair, propagate};
use qdyn_core::linalg::{c, eig_general, expm};
use qdyn_core::markovian::{build_liouvillian, decompose, DEFAULT_TOL};
use qdyn_core::models::{ising_hamiltonian, IsingParams};
use qdyn_core::nonmarkovian::dephasing_rate;
use qdyn_core::TimeGrid;

fn bench_expm(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("expm");
    for n in [4, 16, 64] {
        let h = hermitian(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &h, |b, h| b.iter(|| expm(h, c(0.0, -0.1)).unwrap()));
    }
    group.finish();
}

fn bench_eig_general(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("eig_general");
    for n in [4, 16, 64] {
        let a = general(n);
        group.bench_with_input(BenchmarkId::from_parameter(n), &a, |b, a| b.iter(|| eig_general(a).unwrap()));
    }
    group.finish();
}

fn bench_liouvillian(cr: &mut Criterion) {
    let (h, channels) = open_spin_pair().unwrap();
    cr.bench_function("liouvillian_build_decompose", |b| {
        b.iter(|| decompose(&build_liouvillian(&h, &channels).unwrap(), DEFAULT_TOL).unwrap())
    });
}

fn bench_propagate(cr: &mut Criterion) {
    let params = IsingParams { n: 8, alpha: 1.5, field: 1.0 / 0.42, normalize_j: true };
    let ham = ising_hamiltonian(&params).unwrap();
    let (right, _) = ising_ground_pair(8, 1.5).unwrap();
    let grid = TimeGrid::new(0.0, 5.0, 200).unwrap();
    cr.bench_function("propagate_ising_n8_200_steps", |b| b.iter(|| propagate(&ham.total, &right, &grid, &[]).unwrap()));
}

fn bench_dephasing_rate(cr: &mut Criterion) {
    let mut group = cr.benchmark_group("dephasing_rate");
    for (name, bath) in [("super_ohmic", super_ohmic_bath().unwrap()), ("localized", localized_bath().unwrap())] {
        group.bench_function(name, |b| b.iter(|| dephasing_rate(&bath, 30.0).unwrap()));
    }
    group.finish();
}

criterion_group!(benches, bench_expm, bench_eig_general, bench_liouvillian, bench_propagate, bench_dephasing_rate);
criterion_main!(benches);
