use std::hint::black_box;

use adqc_core::detection::{converged_propagator, QuenchPath, QuenchSpec, PROPAGATOR_TOL};
use adqc_core::fermion::{init_pi_pulses, staggered_sites, x_basis_field, BdGPropagator, BdGSystem};
use adqc_core::lindblad::{exchange_lindblad, product_state};
use adqc_core::spectral::{fft2, FieldBasis, SpaceTimeField, SpectrumOptions};
use adqc_core::{AnnealSchedule, BlochState, NoiseParams};
use criterion::{criterion_group, criterion_main, Criterion};

fn times(steps: usize, dt: f64) -> Vec<f64> {
    (0..steps).map(|s| s as f64 * dt).collect()
}

fn fermion(c: &mut Criterion) {
    let system = BdGSystem::clean(124, 2.0, 0.2).unwrap();
    let state = init_pi_pulses(&system, &staggered_sites(124)).unwrap();
    c.bench_function("bdg_diagonalize_l124", |b| b.iter(|| BdGPropagator::new(black_box(&system))));
    let prop = BdGPropagator::new(&system);
    let prepared = prop.prepare(&state).unwrap();
    c.bench_function("bdg_tau_x_readout_l124", |b| b.iter(|| prepared.tau_x_at(black_box(17.3))));

    let chain = BdGSystem::clean(56, 2.0, -0.6).unwrap();
    let t = times(200, 0.1);
    let mut group = c.benchmark_group("slow");
    group.sample_size(10);
    group.bench_function("x_field_l56_200_steps", |b| b.iter(|| x_basis_field(black_box(&chain), 0, &t).unwrap()));
    group.finish();
}

fn spectrum(c: &mut Criterion) {
    let t = times(200, 0.1);
    let rows = x_basis_field(&BdGSystem::clean(56, 2.0, -0.6).unwrap(), 0, &t).unwrap();
    let field = SpaceTimeField::from_samples(&t, rows, FieldBasis::X).unwrap();
    c.bench_function("fft2_56x200_padded", |b| b.iter(|| fft2(black_box(&field), SpectrumOptions::default()).unwrap()));
}

fn lindblad(c: &mut Criterion) {
    let noise = NoiseParams::new(30.0, 37.0).unwrap();
    let rho0 = product_state(&[BlochState::new([0.0, 0.0, -1.0]).unwrap(), BlochState::new([0.0, 0.0, 1.0]).unwrap()]);
    let t = times(301, 0.1);
    c.bench_function("exchange_lindblad_301_points", |b| {
        b.iter(|| exchange_lindblad(1.0, black_box(0.3), noise, &rho0, &t).unwrap())
    });
}

fn detection(c: &mut Criterion) {
    let schedule = AnnealSchedule::default_synthetic();
    let spec = QuenchSpec::default_for(&schedule).unwrap();
    let path = QuenchPath::new(&schedule, spec.clone(), 1, 0.0).unwrap();
    let mut group = c.benchmark_group("slow");
    group.sample_size(10);
    group.bench_function("quench_propagator_single_pair", |b| {
        b.iter(|| converged_propagator(black_box(&path), spec.duration(), PROPAGATOR_TOL).unwrap())
    });
    group.finish();
}

criterion_group!(benches, fermion, spectrum, lindblad, detection);
criterion_main!(benches);
