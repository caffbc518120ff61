use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use qmm_core::fedosov::{Fedosov, FedosovConfig};
use qmm_core::forms::TwoFormSeries;
use qmm_core::quantum::{verify_quantum_hamiltonian, QuantumHamiltonian};
use qmm_core::samples::{random_series, rng};
use qmm_core::scenario::load_scenario;
use qmm_core::symplectic::moyal_product_with;
use qmm_core::{Convention, Exec, FormalSeries, Moyal, PhaseSpace, Polynomial, Scalar, StarProduct};

const MODES: [(&str, Exec); 2] = [("sequential", Exec::Sequential), ("parallel", Exec::Parallel)];

fn moyal(c: &mut Criterion) {
    let mut group = c.benchmark_group("moyal");
    let space = PhaseSpace::standard(2, Convention::RealHalf);
    let mut r = rng(1);
    let f = random_series(&mut r, 4, 4, 5);
    let g = random_series(&mut r, 4, 4, 5);
    for (name, exec) in MODES {
        group.bench_function(BenchmarkId::new("n2_deg4_order5", name), |b| {
            b.iter(|| moyal_product_with(&space, &f, &g, exec).unwrap())
        });
    }
    group.finish();
}

fn magnetic(beta: Scalar) -> TwoFormSeries {
    let mut m = vec![vec![Polynomial::zero(2); 2]; 2];
    m[0][1] = Polynomial::constant(2, beta.clone());
    m[1][0] = Polynomial::constant(2, -beta);
    TwoFormSeries::new(2, vec![(1, m)]).unwrap()
}

fn fedosov(c: &mut Criterion) {
    let mut group = c.benchmark_group("fedosov");
    group.sample_size(10);
    let space = PhaseSpace::standard(1, Convention::RealHalf);
    let mut r = rng(2);
    let f = random_series(&mut r, 2, 2, 3);
    let g = random_series(&mut r, 2, 2, 3);
    for (name, exec) in MODES {
        let config = FedosovConfig::new(space.clone(), magnetic(Scalar::ratio(1, 2)), 12).with_exec(exec);
        group.bench_function(BenchmarkId::new("build_magnetic_n_w12", name), |b| {
            b.iter(|| Fedosov::new(config.clone()).unwrap())
        });
        // A fresh engine each time so the Taylor lifts are recomputed.
        group.bench_function(BenchmarkId::new("build_and_star_deg2_order3", name), |b| {
            b.iter(|| Fedosov::new(config.clone()).unwrap().star(&f, &g).unwrap())
        });
    }
    group.finish();
}

fn hamiltonian(c: &mut Criterion) {
    let mut group = c.benchmark_group("quantum_hamiltonian");
    let path = concat!(env!("CARGO_MANIFEST_DIR"), "/../../scenarios/sl2.json");
    let sc = load_scenario(std::path::Path::new(path)).unwrap();
    let j0 = qmm_core::momentum::solve_momentum(&sc.action).unwrap();
    let values: Vec<FormalSeries> = j0.values().iter().map(|p| FormalSeries::from_poly(p.clone(), 4)).collect();
    let j = QuantumHamiltonian::new(&sc.action, values).unwrap();
    for (name, exec) in MODES {
        let star = Moyal::with_exec(sc.space.clone(), exec);
        group.bench_function(BenchmarkId::new("sl2_degree4", name), |b| {
            b.iter(|| verify_quantum_hamiltonian(&sc.action, &j, &star, 4, 3).unwrap())
        });
    }
    group.finish();
}

criterion_group!(benches, moyal, fedosov, hamiltonian);
criterion_main!(benches);
