mod common;

use num_complex::Complex64;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use common::*;
use dimerfit::cost::spectral_cost;
use dimerfit::model::{build_dimer_hamiltonian, BasisSpec, DimerParams, MonomerParams};
use dimerfit::spectra::{
    dimer_expansions_unshifted, half_line_transform, half_line_transform_direct, monomer_expansion_unshifted,
    simulate_dimer, simulate_monomer, FrequencyGrid, SimulationSettings,
};

fn times(n: usize, t_max: f64) -> Vec<f64> {
    (0..n).map(|j| t_max * j as f64 / (n - 1) as f64).collect()
}

fn max_dev(a: &[Complex64], b: &[Complex64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).norm()).fold(0.0, f64::max)
}

#[test]
fn undamped_monomer_matches_displaced_oscillator() {
    let p = MonomerParams {
        gamma: 0.0,
        ..MonomerParams::reference()
    };
    let e = monomer_expansion_unshifted(&p, &BasisSpec::new(20)).unwrap();
    let ts = times(400, 4.0 * std::f64::consts::TAU / p.omega_vib);
    let got: Vec<_> = ts.iter().map(|&t| e.amplitude(t)).collect();
    let want: Vec<_> = ts.iter().map(|&t| displaced_oscillator(p.omega_vib, p.huang_rhys, 0.0, t)).collect();
    let d = max_dev(&got, &want);
    assert!(d < 1e-8, "max deviation {d:e}");
}

#[test]
fn damped_monomer_matches_cumulant_of_exponential_bath() {
    let p = MonomerParams::reference();
    let e = monomer_expansion_unshifted(&p, &BasisSpec::new(20)).unwrap();
    let ts = times(60, 0.01);
    for &t in &ts {
        let closed = displaced_oscillator(p.omega_vib, p.huang_rhys, p.gamma, t);
        let quad = cumulant_quadrature(p.omega_vib, p.huang_rhys, p.gamma, t, 20000);
        assert!((closed - quad).norm() < 1e-6, "closed form vs quadrature at t={t}");
        assert!((e.amplitude(t) - closed).norm() < 1e-8, "propagation vs closed form at t={t}");
    }
}

#[test]
fn non_hermitian_propagation_matches_lindblad_dissipator() {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    for _ in 0..5 {
        let p = MonomerParams {
            epsilon_e: 16000.0,
            omega_vib: rng.random_range(200.0..1600.0),
            huang_rhys: rng.random_range(0.1..1.0),
            gamma: rng.random_range(1.0..80.0),
            sigma_m: 200.0,
        };
        let ts = times(40, 0.02);
        let oracle = lindblad_monomer_correlation(&p, 3, &ts);
        let e = monomer_expansion_unshifted(&p, &BasisSpec::new(3)).unwrap();
        let got: Vec<_> = ts.iter().map(|&t| e.amplitude(t)).collect();
        let d = max_dev(&got, &oracle);
        assert!(d < 1e-8, "{p:?}: {d:e}");
    }
}

#[test]
fn parity_sectors_match_full_space_double_sum() {
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    let mut worst = 0.0f64;
    for draw in 0..50 {
        let n_max = 1 + draw % 3;
        let pm = MonomerParams {
            epsilon_e: 16000.0,
            omega_vib: rng.random_range(100.0..1600.0),
            huang_rhys: rng.random_range(0.1..1.0),
            gamma: rng.random_range(0.0..50.0),
            sigma_m: 200.0,
        };
        let pd = DimerParams {
            coupling_v: rng.random_range(-1500.0..1500.0),
            delta: rng.random_range(-300.0..300.0),
            alpha: rng.random_range(0.0..180.0),
            sigma_d: 250.0,
        };
        let ts = times(12, 0.01);
        let oracle = full_space_dimer_correlation(&pm, &pd, n_max, &ts);
        let (plus, minus) = dimer_expansions_unshifted(&pm, pd.coupling_v, &BasisSpec::new(n_max)).unwrap();
        let c = pd.alpha.to_radians().cos();
        let got: Vec<_> = ts
            .iter()
            .map(|&t| plus.amplitude(t) * (1.0 + c) + minus.amplitude(t) * (1.0 - c))
            .collect();
        worst = worst.max(max_dev(&got, &oracle));
    }
    assert!(worst < 1e-10, "worst deviation {worst:e}");
}

#[test]
fn two_level_dimer_eigenvalues() {
    let pm = MonomerParams::reference();
    let pd = DimerParams {
        coupling_v: 755.0,
        delta: -28.0,
        ..DimerParams::reference_dimer0()
    };
    let h = build_dimer_hamiltonian(&pm, &pd, &BasisSpec::new(0)).unwrap();
    assert_eq!(h.dim(), 2);
    let re = h.matrix.map(|z| z.re);
    let eig = re.symmetric_eigenvalues();
    let mut v: Vec<f64> = eig.iter().cloned().collect();
    v.sort_by(f64::total_cmp);
    assert!((v[0] - (16092.0 - 755.0)).abs() < 1e-9);
    assert!((v[1] - (16092.0 + 755.0)).abs() < 1e-9);
}

#[test]
fn uncoupled_dimer_equals_monomer() {
    let pm = MonomerParams::reference();
    let pd = DimerParams {
        coupling_v: 0.0,
        delta: 0.0,
        alpha: 37.0,
        sigma_d: pm.sigma_m,
    };
    let settings = SimulationSettings::default();
    let nu = FrequencyGrid::default_for(pm.epsilon_e, pm.omega_vib, pm.sigma_m).unwrap();
    let m = simulate_monomer(&pm, &settings, &nu).unwrap();
    let d = simulate_dimer(&pm, &pd, &settings, &nu).unwrap();
    let dev = m
        .spectrum
        .amp
        .iter()
        .zip(&d.spectrum.amp)
        .map(|(a, b)| (a - b).abs())
        .fold(0.0, f64::max);
    let peak = m.spectrum.amp[m.spectrum.argmax()];
    assert!(dev <= 1e-8 * peak.max(1.0), "{dev:e}");
}

#[test]
fn default_basis_is_converged_at_reference_parameters() {
    let pm = MonomerParams::reference();
    let nu = FrequencyGrid::default_for(pm.epsilon_e, pm.omega_vib, pm.sigma_m).unwrap();
    let base = SimulationSettings::default();
    let mut wide = base;
    wide.basis.n_max += 2;
    let a = simulate_monomer(&pm, &base, &nu).unwrap();
    let b = simulate_monomer(&pm, &wide, &nu).unwrap();
    let c = spectral_cost(&a.spectrum, &b.spectrum).unwrap().value();
    assert!(c < 1e-4, "monomer basis change {c:e}");

    let pd = DimerParams::reference_dimer0();
    let nu = FrequencyGrid::new(13000.0, 24000.0, 2001).unwrap();
    let a = simulate_dimer(&pm, &pd, &base, &nu).unwrap();
    let b = simulate_dimer(&pm, &pd, &wide, &nu).unwrap();
    let c = spectral_cost(&a.spectrum, &b.spectrum).unwrap().value();
    assert!(c < 1e-4, "dimer basis change {c:e}");
}

#[test]
fn spectrum_stable_under_grid_refinement() {
    let pm = MonomerParams::reference();
    let nu = FrequencyGrid::default_for(pm.epsilon_e, pm.omega_vib, pm.sigma_m).unwrap();
    let s = SimulationSettings::default();
    let coarse = simulate_monomer(&pm, &s, &nu).unwrap().spectrum;
    let fine = simulate_monomer(&pm, &s, &nu.refined(2)).unwrap().spectrum;
    // every coarse node is a fine node
    let dev = coarse
        .amp
        .iter()
        .enumerate()
        .map(|(i, a)| (a - fine.amp[2 * i]).abs())
        .fold(0.0, f64::max);
    let peak = coarse.amp[coarse.argmax()];
    assert!(dev < 1e-3 * peak, "{dev:e} vs peak {peak:e}");

    let mut finer_time = s;
    finer_time.time.phase_per_step /= 2.0;
    let t2 = simulate_monomer(&pm, &finer_time, &nu).unwrap().spectrum;
    let c = spectral_cost(&coarse, &t2).unwrap().value();
    assert!(c < 1e-6, "time-step refinement changed cost by {c:e}");
}

#[test]
fn chirp_transform_matches_direct_sum() {
    let p = MonomerParams::reference();
    let e = monomer_expansion_unshifted(&p, &BasisSpec::new(8)).unwrap().shifted(p.epsilon_e);
    let nu = FrequencyGrid::new(14000.0, 22000.0, 777).unwrap();
    let dt = 1e-5;
    let values = e.series(dt, 3000);
    let a = half_line_transform(&values, dt, p.sigma_m, &nu);
    let b = half_line_transform_direct(&values, dt, p.sigma_m, &nu);
    let scale = b.iter().cloned().fold(0.0, f64::max);
    let dev = a.iter().zip(&b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max);
    assert!(dev < 1e-9 * scale, "{dev:e}");
}
