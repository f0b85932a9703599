use std::f64::consts::PI;

use super::*;
use crate::error::Error;
use crate::lindblad::{two_qubit_exchange, NoiseParams};

fn grid(t0: f64, t1: f64, dt: f64) -> Vec<f64> {
    let n = ((t1 - t0) / dt).round() as usize;
    (0..=n).map(|k| t0 + k as f64 * dt).collect()
}

fn truth() -> LarmorParams {
    LarmorParams { delta: 1.0, t1: 32.0, t2: 20.0, theta_s: PI / 2.0, phi_s: 0.0, theta_d: 1.2, phi_d: 0.4 }
}

fn free5() -> Vec<LarmorParam> {
    use LarmorParam::*;
    vec![Delta, T1, T2, ThetaD, PhiD]
}

fn rel(a: f64, b: f64) -> f64 {
    (a - b).abs() / b.abs().max(1e-12)
}

#[test]
fn gradient_matches_finite_differences() {
    let p = LarmorParams { theta_s: 0.9, phi_s: 2.1, ..truth() };
    for &tau in &[0.0, 3.3, 17.0] {
        let g = p.gradient(tau);
        for (i, par) in LarmorParam::ALL.iter().enumerate() {
            let h = 1e-6;
            let mut a = p.to_array_for_test();
            a[i] += h;
            let up = LarmorParams::from_array_for_test(a).eval(tau);
            a[i] -= 2.0 * h;
            let dn = LarmorParams::from_array_for_test(a).eval(tau);
            let fd = (up - dn) / (2.0 * h);
            assert!((fd - g[i]).abs() < 1e-6, "{} at {tau}: {fd} vs {}", par.name(), g[i]);
        }
    }
}

#[test]
fn azimuth_shift_leaves_model_unchanged() {
    let p = truth();
    let q = LarmorParams { phi_d: p.phi_d + 2.0 * PI, phi_s: p.phi_s - 2.0 * PI, ..p };
    let flipped = LarmorParams { theta_d: -p.theta_d, phi_d: p.phi_d + PI, ..p };
    for &t in &[0.5, 4.0, 22.0] {
        assert!((p.eval(t) - q.eval(t)).abs() < 1e-13);
        assert!((p.eval(t) - flipped.eval(t)).abs() < 1e-13);
        assert!((p.eval(t) - flipped.canonical().eval(t)).abs() < 1e-13);
    }
    let (th, ph) = wrap_angles(-0.3, 7.0);
    assert!((th - 0.3).abs() < 1e-15 && (ph - (7.0 + PI).rem_euclid(2.0 * PI)).abs() < 1e-15);
}

#[test]
fn noiseless_larmor_recovery() {
    let p = truth();
    let t = grid(0.0, 30.0, 0.1);
    let m: Vec<f64> = t.iter().map(|&t| p.eval(t)).collect();
    let init = LarmorParams { delta: 0.995, t1: 25.0, t2: 15.0, theta_d: 1.0, phi_d: 0.1, ..p };
    let fit = fit_larmor(&t, &m, &LarmorFitSpec::new(free5(), init)).unwrap();
    assert!(fit.converged);
    for par in free5() {
        let got = fit.value(par.name()).unwrap();
        assert!(rel(got, p.get(par)) < 1e-6, "{}: {got}", par.name());
    }
    assert!(fit.rss < 1e-20);
    let full = larmor_params_from(&fit, init);
    assert_eq!(full.theta_s, p.theta_s);
}

#[test]
fn multistart_escapes_a_reflected_guess() {
    let p = truth();
    let t = grid(0.0, 30.0, 0.1);
    let m: Vec<f64> = t.iter().map(|&t| p.eval(t)).collect();
    // Azimuth half a turn off and the polar angle reflected.
    let init = LarmorParams { theta_d: PI - 1.2, phi_d: 0.4 + PI, ..p };
    let fit = fit_larmor(&t, &m, &LarmorFitSpec::new(free5(), init)).unwrap();
    assert!(rel(fit.value("theta_d").unwrap(), 1.2) < 1e-6);
    assert!(rel(fit.value("phi_d").unwrap(), 0.4) < 1e-6);
}

#[test]
fn noisy_larmor_coverage() {
    let p = truth();
    let t = grid(0.0, 30.0, 0.1);
    let clean: Vec<f64> = t.iter().map(|&t| p.eval(t)).collect();
    let mut covered = 0;
    for run in 0..100 {
        let mut m = clean.clone();
        add_gaussian_noise(&mut m, 0.02, 11, run).unwrap();
        let fit = fit_larmor(&t, &m, &LarmorFitSpec::new(free5(), p)).unwrap();
        let ok = free5().iter().all(|&par| {
            let (v, e) = (fit.value(par.name()).unwrap(), fit.error(par.name()).unwrap());
            (v - p.get(par)).abs() <= 3.0 * e
        });
        covered += ok as usize;
    }
    assert!(covered >= 93, "{covered}/100");
}

#[test]
fn t1_from_inverted_source() {
    let p = LarmorParams { theta_s: PI, theta_d: 0.02, t1: 32.0, ..truth() };
    let t = grid(0.0, 30.0, 0.1);
    let mut m: Vec<f64> = t.iter().map(|&t| p.eval(t)).collect();
    add_gaussian_noise(&mut m, 0.02, 3, 0).unwrap();
    let mut spec = LarmorFitSpec::new(vec![LarmorParam::T1], LarmorParams { t1: 10.0, ..p });
    spec.multistart = false;
    let fit = fit_larmor(&t, &m, &spec).unwrap();
    assert!(rel(fit.value("t1").unwrap(), 32.0) < 0.05, "{:?}", fit.values);
}

#[test]
fn standard_errors_shrink_with_samples() {
    let p = truth();
    let se = |dt: f64| {
        let t = grid(5.0, 28.0, dt);
        let mut m: Vec<f64> = t.iter().map(|&t| p.eval(t)).collect();
        add_gaussian_noise(&mut m, 0.02, 5, 0).unwrap();
        let mut spec = LarmorFitSpec::new(free5(), p);
        spec.multistart = false;
        fit_larmor(&t, &m, &spec).unwrap().error("delta").unwrap()
    };
    let ratio = se(0.2) / se(0.05);
    // Four times the samples: about half the error.
    assert!((ratio - 2.0).abs() < 0.4, "ratio {ratio}");
}

#[test]
fn larmor_input_validation() {
    let p = truth();
    let t = grid(0.0, 30.0, 0.1);
    let m = vec![0.0; t.len() - 1];
    assert!(matches!(fit_larmor(&t, &m, &LarmorFitSpec::new(free5(), p)), Err(Error::Dimension { .. })));
    let m = vec![0.0; t.len()];
    assert!(fit_larmor(&t, &m, &LarmorFitSpec::new(vec![], p)).is_err());
    let inf = LarmorParams { t1: f64::INFINITY, ..p };
    assert!(fit_larmor(&t, &m, &LarmorFitSpec::new(vec![LarmorParam::T1], inf)).is_err());
    let mut spec = LarmorFitSpec::new(free5(), p);
    spec.window = (40.0, 50.0);
    assert!(matches!(fit_larmor(&t, &m, &spec), Err(Error::Validation(_))));
}

fn exchange_series(coupling: f64, noise: NoiseParams, t: &[f64]) -> ExchangeSeries {
    let mut s = ExchangeSeries { t: t.to_vec(), ..Default::default() };
    for &t in t {
        let o = two_qubit_exchange(coupling, noise, t).unwrap();
        s.sz1.push(o.sz1);
        s.sz2.push(o.sz2);
        s.szsz.push(o.szsz);
    }
    s
}

#[test]
fn noiseless_exchange_recovery() {
    let t = grid(0.0, 30.0, 0.1);
    let s = exchange_series(0.30, NoiseParams::new(30.0, 37.0).unwrap(), &t);
    let fit = fit_exchange(&s, ExchangeInit::default()).unwrap();
    assert!(rel(fit.value("t1").unwrap(), 30.0) < 1e-6);
    assert!(rel(fit.value("t_phi").unwrap(), 37.0) < 1e-6);
    assert!(rel(fit.value("coupling").unwrap(), 0.30) < 1e-6);
    let neg = exchange_series(-0.30, NoiseParams::new(30.0, 37.0).unwrap(), &t);
    assert!(rel(fit_exchange(&neg, ExchangeInit::default()).unwrap().value("coupling").unwrap(), 0.30) < 1e-6);
}

#[test]
fn szsz_decay_alone() {
    let t = grid(0.0, 30.0, 0.1);
    let s = exchange_series(0.1, NoiseParams::new(30.0, 37.0).unwrap(), &t);
    let fit = fit_szsz(&t, &s.szsz, 10.0).unwrap();
    assert!((fit.value("t1").unwrap() - 30.0).abs() < 1e-8 * 30.0);
}

#[test]
fn exchange_couplings_are_resolved() {
    let t = grid(0.0, 20.0, 0.1);
    let noise = NoiseParams::new(30.0, 37.0).unwrap();
    let fits: Vec<FitResult> = [0.15, 0.30]
        .iter()
        .enumerate()
        .map(|(i, &j)| {
            let mut s = exchange_series(j, noise, &t);
            add_gaussian_noise(&mut s.sz1, 0.02, 21, 3 * i as u64).unwrap();
            add_gaussian_noise(&mut s.sz2, 0.02, 21, 3 * i as u64 + 1).unwrap();
            add_gaussian_noise(&mut s.szsz, 0.02, 21, 3 * i as u64 + 2).unwrap();
            fit_exchange(&s, ExchangeInit::default()).unwrap()
        })
        .collect();
    let (a, b) = (&fits[0], &fits[1]);
    let gap = (b.value("coupling").unwrap() - a.value("coupling").unwrap()).abs();
    let sigma = a.error("coupling").unwrap().hypot(b.error("coupling").unwrap());
    assert!(gap > 10.0 * sigma, "gap {gap}, σ {sigma}");
}

#[test]
fn noisy_exchange_coverage() {
    let t = grid(0.0, 30.0, 0.1);
    let noise = NoiseParams::new(30.0, 37.0).unwrap();
    let clean = exchange_series(0.30, noise, &t);
    let mut covered = 0;
    for run in 0..100u64 {
        let mut s = clean.clone();
        add_gaussian_noise(&mut s.sz1, 0.02, 17, 3 * run).unwrap();
        add_gaussian_noise(&mut s.sz2, 0.02, 17, 3 * run + 1).unwrap();
        add_gaussian_noise(&mut s.szsz, 0.02, 17, 3 * run + 2).unwrap();
        let fit = fit_exchange(&s, ExchangeInit::default()).unwrap();
        let ok = [("t1", 30.0), ("t_phi", 37.0), ("coupling", 0.30)]
            .iter()
            .all(|&(n, v)| (fit.value(n).unwrap() - v).abs() <= 3.0 * fit.error(n).unwrap());
        covered += ok as usize;
    }
    assert!(covered >= 93, "{covered}/100");
}

#[test]
fn exchange_validation() {
    let s = ExchangeSeries { t: vec![0.0, 1.0], sz1: vec![0.0], sz2: vec![0.0, 0.0], szsz: vec![0.0, 0.0] };
    assert!(matches!(fit_exchange(&s, ExchangeInit::default()), Err(Error::Dimension { .. })));
    assert!(add_gaussian_noise(&mut [0.0], -1.0, 0, 0).is_err());
}

#[test]
fn median_interval_brackets_the_median() {
    let v: Vec<f64> = (0..101).map(|k| (k as f64 * 0.37).sin()).collect();
    let m = median_bootstrap(&v, 0.95, 2000, 4).unwrap();
    let mut s = v.clone();
    s.sort_by(f64::total_cmp);
    assert_eq!(m.median, s[50]);
    assert!(m.lower <= m.median && m.median <= m.upper && m.lower < m.upper);
    assert_eq!(median_bootstrap(&v, 0.95, 2000, 4).unwrap(), m);
    let flat = median_bootstrap(&[2.0; 7], 0.9, 100, 0).unwrap();
    assert_eq!((flat.lower, flat.median, flat.upper), (2.0, 2.0, 2.0));
    assert_eq!(median_bootstrap(&[1.0, 3.0], 0.5, 10, 0).unwrap().median, 2.0);
    assert!(median_bootstrap(&[], 0.95, 10, 0).is_err());
    assert!(median_bootstrap(&[1.0], 1.0, 10, 0).is_err());
}

#[test]
fn noise_is_reproducible() {
    let mut a = vec![0.0; 50];
    let mut b = vec![0.0; 50];
    add_gaussian_noise(&mut a, 1.0, 9, 2).unwrap();
    add_gaussian_noise(&mut b, 1.0, 9, 2).unwrap();
    assert_eq!(a, b);
    let mut c = vec![0.0; 50];
    add_gaussian_noise(&mut c, 1.0, 9, 3).unwrap();
    assert_ne!(a, c);
}

