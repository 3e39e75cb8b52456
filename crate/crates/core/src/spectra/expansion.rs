//! Eigen-expansion of a damped (non-Hermitian) propagator matrix element.
//!
//! For a diagonalizable H and a normalized state ψ,
//! ⟨ψ| e^{−iHt} |ψ⟩ = Σ_k w_k e^{−iλ_k t}. The expansion is obtained from the
//! complex Schur form H = Q T Q†: the eigenvectors of the triangular factor
//! come from back-substitution, so no general eigensolver is needed.

use nalgebra::{DMatrix, DVector, Schur};
use num_complex::Complex64;

use crate::error::{Error, Result};

/// Eigenvalues and matching weights of a correlation amplitude.
#[derive(Debug, Clone)]
pub struct SpectralExpansion {
    pub energies: Vec<Complex64>,
    pub weights: Vec<Complex64>,
}

const WEIGHT_BLOWUP: f64 = 1e8;

impl SpectralExpansion {
    pub fn from_matrix(h: &DMatrix<Complex64>, psi: &DVector<Complex64>) -> Result<Self> {
        let n = h.nrows();
        if n == 0 || h.ncols() != n || psi.len() != n {
            return Err(Error::Propagation(format!(
                "matrix {}x{} incompatible with state of length {}",
                h.nrows(),
                h.ncols(),
                psi.len()
            )));
        }
        let schur = Schur::try_new(h.clone(), f64::EPSILON, 1000 * n.max(10)).ok_or_else(|| {
            Error::Propagation(format!("Schur iteration did not converge for dimension {n}"))
        })?;
        let (q, t) = schur.unpack();

        let norm = t.iter().fold(0.0f64, |m, z| m.max(z.norm())).max(f64::MIN_POSITIVE);
        let small = norm * f64::EPSILON * 4.0;

        // Unit upper-triangular eigenvector matrix Y of T.
        let mut y = DMatrix::<Complex64>::zeros(n, n);
        for k in 0..n {
            y[(k, k)] = Complex64::from(1.0);
            let lambda = t[(k, k)];
            for j in (0..k).rev() {
                let mut acc = Complex64::from(0.0);
                for l in j + 1..=k {
                    acc += t[(j, l)] * y[(l, k)];
                }
                let mut denom = t[(j, j)] - lambda;
                if denom.norm() < small {
                    denom = Complex64::from(small);
                }
                y[(j, k)] = -acc / denom;
            }
        }

        let psi_t = q.adjoint() * psi;
        // right coefficients c = Y⁻¹ ψ̃
        let mut c = psi_t.clone();
        for i in (0..n).rev() {
            let mut acc = c[i];
            for l in i + 1..n {
                acc -= y[(i, l)] * c[l];
            }
            c[i] = acc;
        }
        // left coefficients u = ψ̃† Y
        let mut weights = Vec::with_capacity(n);
        let mut energies = Vec::with_capacity(n);
        for k in 0..n {
            let mut u = Complex64::from(0.0);
            for j in 0..=k {
                u += psi_t[j].conj() * y[(j, k)];
            }
            let w = u * c[k];
            if !w.re.is_finite() || !w.im.is_finite() || w.norm() > WEIGHT_BLOWUP {
                return Err(Error::Propagation(format!(
                    "eigen-expansion weight {w} at eigenvalue {} is not representable (ill-conditioned basis)",
                    t[(k, k)]
                )));
            }
            weights.push(w);
            energies.push(t[(k, k)]);
        }
        Ok(SpectralExpansion { energies, weights })
    }

    /// Expansion of the matrix element for a real basis vector e_index.
    pub fn for_basis_state(h: &DMatrix<Complex64>, index: usize) -> Result<Self> {
        let mut psi = DVector::<Complex64>::zeros(h.nrows());
        psi[index] = Complex64::from(1.0);
        Self::from_matrix(h, &psi)
    }

    /// Adds a constant real energy to every eigenvalue.
    pub fn shifted(&self, shift: f64) -> Self {
        SpectralExpansion {
            energies: self.energies.iter().map(|e| e + shift).collect(),
            weights: self.weights.clone(),
        }
    }

    pub fn amplitude(&self, t: f64) -> Complex64 {
        self.energies
            .iter()
            .zip(&self.weights)
            .map(|(e, w)| w * (Complex64::new(0.0, -t) * e).exp())
            .sum()
    }

    /// Amplitude at t_j = j·dt for j in 0..n, using per-component phasor recurrences.
    pub fn series(&self, dt: f64, n: usize) -> Vec<Complex64> {
        const REANCHOR: usize = 256;
        let mut out = vec![Complex64::from(0.0); n];
        for (e, w) in self.energies.iter().zip(&self.weights) {
            if w.norm() == 0.0 {
                continue;
            }
            let step = (Complex64::new(0.0, -dt) * e).exp();
            let mut z = *w;
            for (j, slot) in out.iter_mut().enumerate() {
                if j % REANCHOR == 0 && j > 0 {
                    z = w * (Complex64::new(0.0, -(j as f64) * dt) * e).exp();
                }
                *slot += z;
                z *= step;
            }
        }
        out
    }

    /// Smallest and largest Re λ among components carrying a weight above `rel_tol` of the total.
    pub fn significant_band(&self, rel_tol: f64) -> (f64, f64) {
        let total: f64 = self.weights.iter().map(|w| w.norm()).sum();
        let mut lo = f64::INFINITY;
        let mut hi = f64::NEG_INFINITY;
        for (e, w) in self.energies.iter().zip(&self.weights) {
            if w.norm() > rel_tol * total {
                lo = lo.min(e.re);
                hi = hi.max(e.re);
            }
        }
        (lo, hi)
    }

    pub fn total_weight(&self) -> Complex64 {
        self.weights.iter().sum()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn diagonal_matrix() {
        let h = DMatrix::from_diagonal(&DVector::from_vec(vec![
            Complex64::new(1.0, 0.0),
            Complex64::new(2.0, -0.5),
        ]));
        let e = SpectralExpansion::for_basis_state(&h, 1).unwrap();
        let t = 0.7;
        let expected = (Complex64::new(0.0, -t) * Complex64::new(2.0, -0.5)).exp();
        assert!((e.amplitude(t) - expected).norm() < 1e-14);
        assert!((e.total_weight() - 1.0).norm() < 1e-14);
    }

    #[test]
    fn matches_matrix_exponential() {
        let n = 6;
        let mut h = DMatrix::<Complex64>::zeros(n, n);
        for i in 0..n {
            h[(i, i)] = Complex64::new(i as f64 * 1.3, -0.2 * i as f64);
            if i + 1 < n {
                h[(i, i + 1)] = Complex64::from(0.8 * (i + 1) as f64);
                h[(i + 1, i)] = Complex64::from(0.8 * (i + 1) as f64);
            }
        }
        h[(0, 3)] = Complex64::from(0.4);
        h[(3, 0)] = Complex64::from(0.4);
        let e = SpectralExpansion::for_basis_state(&h, 0).unwrap();
        for &t in &[0.0, 0.3, 1.7, 4.0] {
            let u = (h.clone() * Complex64::new(0.0, -t)).exp();
            assert!((e.amplitude(t) - u[(0, 0)]).norm() < 1e-12, "t = {t}");
        }
        let s = e.series(0.01, 1000);
        for j in [0usize, 1, 255, 256, 257, 999] {
            assert!((s[j] - e.amplitude(j as f64 * 0.01)).norm() < 1e-12);
        }
    }

    #[test]
    fn degenerate_block_diagonal() {
        // two identical decoupled blocks: exactly repeated eigenvalues
        let mut h = DMatrix::<Complex64>::zeros(4, 4);
        for b in 0..2 {
            let o = 2 * b;
            h[(o, o)] = Complex64::new(0.0, 0.0);
            h[(o + 1, o + 1)] = Complex64::new(1.0, -0.1);
            h[(o, o + 1)] = Complex64::from(0.5);
            h[(o + 1, o)] = Complex64::from(0.5);
        }
        let e = SpectralExpansion::for_basis_state(&h, 0).unwrap();
        for &t in &[0.5, 2.0, 9.0] {
            let u = (h.clone() * Complex64::new(0.0, -t)).exp();
            assert!((e.amplitude(t) - u[(0, 0)]).norm() < 1e-12);
        }
    }
}
