//! Independent reference implementations shared by the integration and
//! acceptance tests. Nothing here goes through the library's propagation path.

#![allow(dead_code)]

use nalgebra::DMatrix;
use num_complex::Complex64;

use dimerfit::model::{build_dimer_hamiltonian, BasisSpec, DimerParams, MonomerParams};

pub const I: Complex64 = Complex64::new(0.0, 1.0);

/// Closed-form ⟨0|e^{−iHt}|0⟩ for H = (ω − iγ)a†a + √S·ω(a + a†), untruncated.
/// At γ = 0 this is e^{iSωt}·exp(S(e^{−iωt} − 1)); for γ > 0 it equals the
/// second-order cumulant with bath correlation S·ω²·e^{−(γ+iω)τ}.
pub fn displaced_oscillator(omega: f64, s: f64, gamma: f64, t: f64) -> Complex64 {
    let z = Complex64::new(omega, -gamma);
    let g2 = s * omega * omega;
    (I * g2 * t / z + g2 / (z * z) * ((-I * z * t).exp() - 1.0)).exp()
}

/// Same function from the cumulant ln M = −∫₀ᵗ∫₀^τ C(τ′)dτ′dτ, evaluated
/// by trapezoid quadrature of C(τ) = S·ω²·e^{−(γ+iω)τ} on `steps` intervals.
pub fn cumulant_quadrature(omega: f64, s: f64, gamma: f64, t: f64, steps: usize) -> Complex64 {
    let h = t / steps as f64;
    let c = |tau: f64| s * omega * omega * (-(Complex64::new(gamma, omega)) * tau).exp();
    // inner(τ) = ∫₀^τ C, outer = ∫₀ᵗ inner
    let mut inner = Complex64::new(0.0, 0.0);
    let mut outer = Complex64::new(0.0, 0.0);
    let mut prev_inner = inner;
    for k in 1..=steps {
        let (a, b) = ((k - 1) as f64 * h, k as f64 * h);
        inner += 0.5 * h * (c(a) + c(b));
        outer += 0.5 * h * (prev_inner + inner);
        prev_inner = inner;
    }
    (-outer).exp()
}

fn kron(a: &DMatrix<Complex64>, b: &DMatrix<Complex64>) -> DMatrix<Complex64> {
    a.kronecker(b)
}

fn annihilation(levels: usize) -> DMatrix<Complex64> {
    let mut a = DMatrix::zeros(levels, levels);
    for k in 1..levels {
        a[(k - 1, k)] = Complex64::from((k as f64).sqrt());
    }
    a
}

/// Dipole correlation of the monomer from a density-matrix propagation over
/// {g, e}⊗{0..n_max} with Lindblad operator √(2γ)·a, ρ(0) = |e,0⟩⟨g,0|.
/// The constant ε_e is left out (phase e^{−iε_e t} removed).
pub fn lindblad_monomer_correlation(p: &MonomerParams, n_max: usize, times: &[f64]) -> Vec<Complex64> {
    let lv = n_max + 1;
    let d = 2 * lv;
    let a_vib = annihilation(lv);
    let n_vib = a_vib.adjoint() * &a_vib;
    let proj = |s: usize| {
        let mut m = DMatrix::<Complex64>::zeros(2, 2);
        m[(s, s)] = Complex64::from(1.0);
        m
    };
    let g = p.huang_rhys.sqrt() * p.omega_vib;
    let h_g = &n_vib * Complex64::from(p.omega_vib);
    let h_e = &n_vib * Complex64::from(p.omega_vib) + (&a_vib + a_vib.adjoint()) * Complex64::from(g);
    let h = kron(&proj(0), &h_g) + kron(&proj(1), &h_e);
    let a = kron(&DMatrix::identity(2, 2), &a_vib);
    let n_op = a.adjoint() * &a;
    let id = DMatrix::<Complex64>::identity(d, d);

    // column-major vec: vec(AρB) = (Bᵀ ⊗ A)·vec(ρ)
    let gamma = Complex64::from(p.gamma);
    let liouv = kron(&id, &h) * (-I) + kron(&h.transpose(), &id) * I
        + kron(&a.conjugate(), &a) * (gamma * 2.0)
        - kron(&id, &n_op) * gamma
        - kron(&n_op.transpose(), &id) * gamma;

    let mut rho0 = DMatrix::<Complex64>::zeros(d, d);
    rho0[(lv, 0)] = Complex64::from(1.0); // |e,0⟩⟨g,0|
    let v0 = nalgebra::DVector::from_column_slice(rho0.as_slice());
    times
        .iter()
        .map(|&t| {
            let v = (&liouv * Complex64::from(t)).exp() * &v0;
            let rho = DMatrix::from_column_slice(d, d, v.as_slice());
            // Tr[(|g⟩⟨e| ⊗ 1)·ρ] = Σ_k ⟨e,k|ρ|g,k⟩
            (0..lv).map(|k| rho[(lv + k, k)]).sum()
        })
        .collect()
}

/// Dimer dipole correlation from the full one-exciton space by matrix
/// exponential: Σᵢⱼ μᵢ·μⱼ ⟨i,0,0|e^{−iHt}|j,0,0⟩ with unit dipoles at angle α.
/// The site energy ε_e + δ is removed from the diagonal.
pub fn full_space_dimer_correlation(
    pm: &MonomerParams,
    pd: &DimerParams,
    n_max: usize,
    times: &[f64],
) -> Vec<Complex64> {
    let b = BasisSpec::new(n_max);
    let mut hm = build_dimer_hamiltonian(pm, pd, &b).unwrap().with_damping(pm.gamma);
    let n = hm.dim();
    let shift = pm.epsilon_e + pd.delta;
    for i in 0..n {
        hm.matrix[(i, i)] -= Complex64::from(shift);
    }
    let i1 = hm.index_of(1, &[0, 0]).unwrap();
    let i2 = hm.index_of(2, &[0, 0]).unwrap();
    let c = pd.alpha.to_radians().cos();
    let mu = [[1.0, c], [c, 1.0]];
    let idx = [i1, i2];
    times
        .iter()
        .map(|&t| {
            let u = (&hm.matrix * (-I * t)).exp();
            let mut acc = Complex64::new(0.0, 0.0);
            for (a, &ia) in idx.iter().enumerate() {
                for (bb, &ib) in idx.iter().enumerate() {
                    acc += mu[a][bb] * u[(ia, ib)];
                }
            }
            acc
        })
        .collect()
}

/// L1 distance between two area-normalized Gaussians of width σ whose centres
/// are `d` apart: 2·erf(d / (2√2·σ)).
pub fn gaussian_overlap_cost(d: f64, sigma: f64) -> f64 {
    2.0 * libm::erf(d.abs() / (2.0 * std::f64::consts::SQRT_2 * sigma))
}

/// Posterior mean and std of a zero-noise SE-kernel GP with prior mean m
/// conditioned on two points, by explicit 2×2 inversion.
pub fn two_point_posterior(
    x: [f64; 2],
    y: [f64; 2],
    s2: f64,
    ell: f64,
    noise: f64,
    at: f64,
) -> (f64, f64) {
    let k = |a: f64, b: f64| s2 * (-0.5 * (a - b) * (a - b) / (ell * ell)).exp();
    let m = 0.5 * (y[0] + y[1]);
    let (a, b, d) = (k(x[0], x[0]) + noise, k(x[0], x[1]), k(x[1], x[1]) + noise);
    let det = a * d - b * b;
    let inv = [[d / det, -b / det], [-b / det, a / det]];
    let ks = [k(at, x[0]), k(at, x[1])];
    let r = [y[0] - m, y[1] - m];
    let mut mean = m;
    let mut quad = 0.0;
    for i in 0..2 {
        for j in 0..2 {
            mean += ks[i] * inv[i][j] * r[j];
            quad += ks[i] * inv[i][j] * ks[j];
        }
    }
    (mean, (s2 - quad).max(0.0).sqrt())
}

/// Franck–Condon weights e^{−S}S^k/k! for k = 0..n.
pub fn poisson(s: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n);
    let mut term = (-s).exp();
    for k in 0..n {
        if k > 0 {
            term *= s / k as f64;
        }
        w.push(term);
    }
    w
}
