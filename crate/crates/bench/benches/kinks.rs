use criterion::{black_box, criterion_group, criterion_main, Criterion};

use kzfcs::counting::{cumulants_exact, kink_distribution, Pairing};
use kzfcs::dynamics::{excitation_probability_numeric, mode_probabilities, Method, SolverConfig};
use kzfcs::ising::{ChainParams, QuenchProtocol};
use kzfcs::theory::cgf_scaling_integral;

fn bench_mode_dynamics(c: &mut Criterion) {
    let params = ChainParams::with_spins(400).unwrap();
    let solver = SolverConfig::default();
    let mut group = c.benchmark_group("mode_dynamics");

    group.bench_function("lz_table_n400_tau100", |b| {
        let protocol = QuenchProtocol::new(100.0).unwrap();
        b.iter(|| mode_probabilities(black_box(&params), &protocol, Method::Lz, &solver).unwrap());
    });

    group.sample_size(20);
    group.bench_function("ode_single_mode_tau10", |b| {
        let protocol = QuenchProtocol::new(10.0).unwrap();
        let k = std::f64::consts::PI / 400.0;
        b.iter(|| {
            excitation_probability_numeric(black_box(k), &params, &protocol, &solver).unwrap()
        });
    });
    group.bench_function("ode_table_n100_tau10", |b| {
        let small = ChainParams::with_spins(100).unwrap();
        let protocol = QuenchProtocol::new(10.0).unwrap();
        b.iter(|| mode_probabilities(black_box(&small), &protocol, Method::Ode, &solver).unwrap());
    });
    group.finish();
}

fn bench_counting(c: &mut Criterion) {
    let params = ChainParams::with_spins(400).unwrap();
    let protocol = QuenchProtocol::new(100.0).unwrap();
    let probs =
        mode_probabilities(&params, &protocol, Method::Lz, &SolverConfig::default()).unwrap();
    let mut group = c.benchmark_group("counting");

    group.bench_function("kink_distribution_n400", |b| {
        b.iter(|| kink_distribution(black_box(&probs), Pairing::Independent).unwrap());
    });
    group.bench_function("cumulants_q6_n100000", |b| {
        let big = ChainParams::with_spins(100_000).unwrap();
        let slow = QuenchProtocol::new(1000.0).unwrap();
        let table = mode_probabilities(&big, &slow, Method::Lz, &SolverConfig::default()).unwrap();
        b.iter(|| cumulants_exact(black_box(&table), Pairing::Independent, 6).unwrap());
    });
    group.finish();
}

fn bench_theory(c: &mut Criterion) {
    let mut group = c.benchmark_group("theory");
    group.bench_function("cgf_integral_theta_pi", |b| {
        b.iter(|| cgf_scaling_integral(black_box(std::f64::consts::PI), 400, 0.01125).unwrap());
    });
    group.finish();
}

criterion_group!(benches, bench_mode_dynamics, bench_counting, bench_theory);
criterion_main!(benches);
