use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};

use qsct_core::chain::{build_hamiltonian, find_pst_time, ChainSpec, Evolution};
use qsct_core::channels::{average_fidelity, embed_channel, phase_damping};
use qsct_core::entanglement::ccnr;
use qsct_core::numerics::{hermitian_eigen, Bipartition};
use qsct_core::protocol::{run_noiseless, run_noisy, ChannelKind, ExperimentConfig, Topology};
use qsct_core::Complex64;

fn plus(d: usize) -> Vec<Complex64> {
    vec![Complex64::new(1.0 / (d as f64).sqrt(), 0.0); d]
}

fn hamiltonians(c: &mut Criterion) {
    let spec = ChainSpec::new(3, 4).unwrap();
    c.bench_function("build_hamiltonian d=3 N=4", |b| b.iter(|| build_hamiltonian(black_box(&spec)).unwrap()));
    let h = build_hamiltonian(&spec).unwrap();
    c.bench_function("hermitian_eigen 81x81", |b| b.iter(|| hermitian_eigen(black_box(&h)).unwrap()));
}

fn pst(c: &mut Criterion) {
    let spec = ChainSpec::new(3, 3).unwrap();
    c.bench_function("find_pst_time d=3 N=3", |b| {
        b.iter(|| find_pst_time(black_box(&spec), 2.0 * std::f64::consts::PI, 2000).unwrap())
    });
}

fn entanglement(c: &mut Criterion) {
    let spec = ChainSpec::new(3, 3).unwrap();
    let evo = Evolution::new(&spec).unwrap();
    let input = qsct_core::QuantumState::chain_input(&spec, &plus(3)).unwrap();
    let rho = evo.propagator(1.0).conjugate(&input.density_matrix()).unwrap();
    let part = Bipartition::new(3, 9).unwrap();
    c.bench_function("ccnr 3x9", |b| b.iter(|| ccnr(black_box(&rho), part).unwrap()));
}

fn runs(c: &mut Criterion) {
    let clean = ExperimentConfig::noiseless(3, 2, &plus(3));
    c.bench_function("run_noiseless d=3 N=2", |b| b.iter(|| run_noiseless(black_box(&clean)).unwrap()));
    let noisy = clean.clone().with_noise(ChannelKind::PhaseDamping, 0.85, Topology::Interleaved);
    c.bench_function("run_noisy interleaved d=3 N=2", |b| b.iter(|| run_noisy(black_box(&noisy)).unwrap()));
    let spec = ChainSpec::new(3, 2).unwrap();
    let u = Evolution::new(&spec).unwrap().propagator(std::f64::consts::PI);
    let ch = embed_channel(&phase_damping(3, 0.85).unwrap(), &[0, 1], &[3, 3]).unwrap();
    c.bench_function("average_fidelity two qutrits", |b| b.iter(|| average_fidelity(black_box(&u), &ch).unwrap()));
}

criterion_group!(benches, hamiltonians, pst, entanglement, runs);
criterion_main!(benches);
