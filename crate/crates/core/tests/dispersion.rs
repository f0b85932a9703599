use adqc_core::fermion::{x_basis_field, BdGSystem};
use adqc_core::magnon::MagnonModel;
use adqc_core::model::dispersion_exact;
use adqc_core::spectral::{compare_dispersion, extract_ridges, fft2, FieldBasis, SpaceTimeField, SpectrumOptions};
use std::time::Instant;

const L: usize = 56;
const DELTA: f64 = 2.0;
const COUPLING: f64 = -0.6;
const DT: f64 = 0.1;
const STEPS: usize = 200;

#[test]
fn magnon_x_field_ridge_follows_e_eff() {
    let m = MagnonModel::new(DELTA, COUPLING, L).unwrap();
    let field = m.field(FieldBasis::X, DT, STEPS).unwrap();
    let spec = fft2(&field, SpectrumOptions::default()).unwrap();
    let ridge = extract_ridges(&spec).unwrap();
    let curve: Vec<f64> = spec.k_grid.iter().map(|&k| m.omega_peak_x(k).0).collect();
    let cmp = compare_dispersion(&ridge, &curve, spec.bin_width).unwrap();
    assert!(cmp.max_dev_bins <= 1.0, "{cmp:?}");
    assert_eq!(cmp.qualified, L);
}

#[test]
fn magnon_density_ridge_follows_band_edge() {
    let m = MagnonModel::new(DELTA, COUPLING, L).unwrap();
    let field = m.field(FieldBasis::Z, DT, STEPS).unwrap();
    let spec = fft2(&field, SpectrumOptions::default()).unwrap();
    let ridge = extract_ridges(&spec).unwrap();
    let curve: Vec<f64> = spec.k_grid.iter().map(|&k| m.omega_peak_z(k).0.abs()).collect();
    let cmp = compare_dispersion(&ridge, &curve, spec.bin_width).unwrap();
    assert!(cmp.max_dev_bins <= 1.0, "{cmp:?}");
    assert!(cmp.qualified >= L / 2, "{cmp:?}");
}

#[test]
fn fermion_x_field_ridge_follows_exact_dispersion() {
    let start = Instant::now();
    let system = BdGSystem::clean(L, DELTA, COUPLING).unwrap();
    let times: Vec<f64> = (0..STEPS).map(|s| s as f64 * DT).collect();
    let rows = x_basis_field(&system, 0, &times).unwrap();
    let field = SpaceTimeField::from_samples(&times, rows, FieldBasis::X).unwrap();
    let spec = fft2(&field, SpectrumOptions::default()).unwrap();
    let ridge = extract_ridges(&spec).unwrap();
    let curve: Vec<f64> = spec.k_grid.iter().map(|&k| dispersion_exact(DELTA, COUPLING, k)).collect();
    let cmp = compare_dispersion(&ridge, &curve, spec.bin_width).unwrap();
    eprintln!("{cmp:?} in {:?}", start.elapsed());
    assert!(cmp.max_dev_bins <= 1.0, "{cmp:?}");
    assert!(cmp.qualified >= L / 2);
}
