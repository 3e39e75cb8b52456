//! Truncated-basis excited-state Hamiltonians for a vibronic monomer and a
//! Frenkel-exciton dimer with one harmonic mode per monomer.
//!
//! Energies are in cm⁻¹ with ħ = 1, so time is measured in units of
//! 1/cm⁻¹. The electronic ground-state energy is the energy reference (0).

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// The five monomer quantities: excitation energy, vibrational frequency,
/// Huang–Rhys factor, vibrational damping and Gaussian broadening width.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MonomerParams {
    pub epsilon_e: f64,
    pub omega_vib: f64,
    pub huang_rhys: f64,
    pub gamma: f64,
    pub sigma_m: f64,
}

impl MonomerParams {
    pub const NAMES: [&'static str; 5] = ["epsilon_e", "omega_vib", "huang_rhys", "gamma", "sigma_m"];

    /// Reference monomer parameters.
    pub const fn reference() -> Self {
        MonomerParams {
            epsilon_e: 16120.0,
            omega_vib: 1450.0,
            huang_rhys: 0.67,
            gamma: 37.0,
            sigma_m: 223.0,
        }
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 5 {
            return Err(Error::param("monomer", format!("expected 5 values, got {}", v.len())));
        }
        let p = MonomerParams {
            epsilon_e: v[0],
            omega_vib: v[1],
            huang_rhys: v[2],
            gamma: v[3],
            sigma_m: v[4],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.epsilon_e, self.omega_vib, self.huang_rhys, self.gamma, self.sigma_m]
    }

    /// Coupling constant √S·ω of the linear vibronic term.
    pub fn vibronic_coupling(&self) -> f64 {
        self.huang_rhys.sqrt() * self.omega_vib
    }

    /// Reorganization energy S·ω; the 0-0 line of the undamped monomer sits at ε_e − S·ω.
    pub fn reorganization_energy(&self) -> f64 {
        self.huang_rhys * self.omega_vib
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in Self::NAMES.iter().zip(self.to_vec()) {
            if !v.is_finite() {
                return Err(Error::param(*name, format!("must be finite, got {v}")));
            }
        }
        if self.epsilon_e <= 0.0 {
            return Err(Error::param("epsilon_e", "must be > 0"));
        }
        if self.omega_vib <= 0.0 {
            return Err(Error::param("omega_vib", "must be > 0"));
        }
        if self.huang_rhys < 0.0 {
            return Err(Error::param("huang_rhys", "must be >= 0"));
        }
        if self.gamma < 0.0 {
            return Err(Error::param("gamma", "must be >= 0"));
        }
        if self.sigma_m <= 0.0 {
            return Err(Error::param("sigma_m", "must be > 0"));
        }
        Ok(())
    }
}

/// Dimer quantities: Coulomb coupling V, dimerization shift δ, torsional
/// angle α (degrees) between the transition dipoles, and broadening σ_d.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DimerParams {
    pub coupling_v: f64,
    pub delta: f64,
    pub alpha: f64,
    pub sigma_d: f64,
}

impl DimerParams {
    pub const NAMES: [&'static str; 4] = ["coupling_v", "delta", "alpha", "sigma_d"];

    /// Reference parameters of dimer 0.
    pub const fn reference_dimer0() -> Self {
        DimerParams {
            coupling_v: 755.0,
            delta: -28.0,
            alpha: 28.0,
            sigma_d: 286.0,
        }
    }

    /// Reference parameters of dimer 1.
    pub const fn reference_dimer1() -> Self {
        DimerParams {
            coupling_v: 507.0,
            delta: -29.0,
            alpha: 40.0,
            sigma_d: 316.0,
        }
    }

    /// Reference parameters of dimer 2 (weak coupling).
    pub const fn reference_dimer2() -> Self {
        DimerParams {
            coupling_v: 111.0,
            delta: -7.0,
            alpha: 70.0,
            sigma_d: 260.0,
        }
    }

    pub fn from_slice(v: &[f64]) -> Result<Self> {
        if v.len() != 4 {
            return Err(Error::param("dimer", format!("expected 4 values, got {}", v.len())));
        }
        let p = DimerParams {
            coupling_v: v[0],
            delta: v[1],
            alpha: v[2],
            sigma_d: v[3],
        };
        p.validate()?;
        Ok(p)
    }

    pub fn to_vec(&self) -> Vec<f64> {
        vec![self.coupling_v, self.delta, self.alpha, self.sigma_d]
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in Self::NAMES.iter().zip(self.to_vec()) {
            if !v.is_finite() {
                return Err(Error::param(*name, format!("must be finite, got {v}")));
            }
        }
        if !(0.0..=180.0).contains(&self.alpha) {
            return Err(Error::param("alpha", "must lie in [0, 180] degrees"));
        }
        if self.sigma_d <= 0.0 {
            return Err(Error::param("sigma_d", "must be > 0"));
        }
        Ok(())
    }
}

/// Truncation of each harmonic ladder at `n_max` quanta (inclusive).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct BasisSpec {
    pub n_max: usize,
    /// Largest matrix dimension any builder will accept.
    #[serde(default = "BasisSpec::default_max_dim")]
    pub max_dim: usize,
}

impl BasisSpec {
    /// Smallest truncation whose spectra at the reference parameters change by
    /// less than 1e-4 in cost when two levels are added (10 gives ~1.6e-4).
    pub const DEFAULT_N_MAX: usize = 11;

    pub fn new(n_max: usize) -> Self {
        BasisSpec {
            n_max,
            max_dim: Self::default_max_dim(),
        }
    }

    fn default_max_dim() -> usize {
        4096
    }

    pub fn levels(&self) -> usize {
        self.n_max + 1
    }

    pub fn monomer_dim(&self) -> usize {
        self.levels()
    }

    pub fn dimer_dim(&self) -> usize {
        2 * self.levels() * self.levels()
    }

    pub fn check(&self, dim: usize) -> Result<()> {
        if dim > self.max_dim {
            return Err(Error::BasisTooLarge {
                dim,
                cap: self.max_dim,
            });
        }
        Ok(())
    }
}

impl Default for BasisSpec {
    fn default() -> Self {
        BasisSpec::new(Self::DEFAULT_N_MAX)
    }
}

/// Row label of a Hamiltonian: which site carries the excitation and the
/// vibrational quanta of every mode.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct BasisLabel {
    pub site: usize,
    pub quanta: Vec<usize>,
}

impl BasisLabel {
    pub fn total_quanta(&self) -> usize {
        self.quanta.iter().sum()
    }
}

#[derive(Debug, Clone)]
pub struct HamiltonianMatrix {
    pub matrix: DMatrix<Complex64>,
    pub labels: Vec<BasisLabel>,
}

impl HamiltonianMatrix {
    pub fn dim(&self) -> usize {
        self.labels.len()
    }

    /// Adds the non-Hermitian mode damping −i·γ·(total vibrational quanta).
    pub fn with_damping(mut self, gamma: f64) -> Self {
        for (i, label) in self.labels.iter().enumerate() {
            self.matrix[(i, i)] -= Complex64::new(0.0, gamma * label.total_quanta() as f64);
        }
        self
    }

    /// max |H − H†| relative to max |H|.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut scale = 0.0f64;
        let mut err = 0.0f64;
        for i in 0..n {
            for j in 0..n {
                scale = scale.max(self.matrix[(i, j)].norm());
                err = err.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        if scale == 0.0 {
            0.0
        } else {
            err / scale
        }
    }

    pub fn index_of(&self, site: usize, quanta: &[usize]) -> Option<usize> {
        self.labels
            .iter()
            .position(|l| l.site == site && l.quanta == quanta)
    }
}

/// Excited-state monomer Hamiltonian over |e⟩⊗|k⟩, k = 0..=n_max.
pub fn build_monomer_hamiltonian(p: &MonomerParams, b: &BasisSpec) -> Result<HamiltonianMatrix> {
    p.validate()?;
    let n = b.monomer_dim();
    b.check(n)?;
    let g = p.vibronic_coupling();
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        h[(k, k)] = Complex64::from(p.epsilon_e + k as f64 * p.omega_vib);
        if k + 1 < n {
            let off = Complex64::from(g * ((k + 1) as f64).sqrt());
            h[(k, k + 1)] = off;
            h[(k + 1, k)] = off;
        }
    }
    let labels = (0..n)
        .map(|k| BasisLabel {
            site: 1,
            quanta: vec![k],
        })
        .collect();
    Ok(HamiltonianMatrix { matrix: h, labels })
}

/// Row index of |site, k1, k2⟩ in the dimer basis (site is 1 or 2).
pub fn dimer_index(site: usize, k1: usize, k2: usize, levels: usize) -> usize {
    (site - 1) * levels * levels + k1 * levels + k2
}

/// One-exciton dimer Hamiltonian over {|1⟩,|2⟩}⊗|k₁⟩⊗|k₂⟩.
pub fn build_dimer_hamiltonian(
    pm: &MonomerParams,
    pd: &DimerParams,
    b: &BasisSpec,
) -> Result<HamiltonianMatrix> {
    pm.validate()?;
    pd.validate()?;
    let levels = b.levels();
    let n = b.dimer_dim();
    b.check(n)?;
    let g = pm.vibronic_coupling();
    let site_energy = pm.epsilon_e + pd.delta;
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    let mut labels = Vec::with_capacity(n);
    for site in 1..=2 {
        for k1 in 0..levels {
            for k2 in 0..levels {
                let i = dimer_index(site, k1, k2, levels);
                labels.push(BasisLabel {
                    site,
                    quanta: vec![k1, k2],
                });
                h[(i, i)] = Complex64::from(site_energy + (k1 + k2) as f64 * pm.omega_vib);
                // ladder on the mode of the excited site only
                let k_own = if site == 1 { k1 } else { k2 };
                if k_own + 1 < levels {
                    let j = if site == 1 {
                        dimer_index(site, k1 + 1, k2, levels)
                    } else {
                        dimer_index(site, k1, k2 + 1, levels)
                    };
                    let off = Complex64::from(g * ((k_own + 1) as f64).sqrt());
                    h[(i, j)] = off;
                    h[(j, i)] = off;
                }
                if site == 1 {
                    let j = dimer_index(2, k1, k2, levels);
                    h[(i, j)] = Complex64::from(pd.coupling_v);
                    h[(j, i)] = Complex64::from(pd.coupling_v);
                }
            }
        }
    }
    Ok(HamiltonianMatrix { matrix: h, labels })
}

/// Exchange parity of a dimer state under (site 1 ↔ site 2, mode 1 ↔ mode 2).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Parity {
    Symmetric,
    Antisymmetric,
}

impl Parity {
    pub fn sign(self) -> f64 {
        match self {
            Parity::Symmetric => 1.0,
            Parity::Antisymmetric => -1.0,
        }
    }
}

/// Damped dimer Hamiltonian restricted to one exchange-parity sector, with the
/// constant site energy ε_e + δ removed from the diagonal.
///
/// Basis: (|1,k₁,k₂⟩ ± |2,k₂,k₁⟩)/√2 indexed by k₁·levels + k₂. Within a
/// sector H = H₁₁ ± V·Swap, where H₁₁ is the site-1 block.
pub(crate) fn parity_block(
    pm: &MonomerParams,
    coupling_v: f64,
    parity: Parity,
    b: &BasisSpec,
) -> Result<DMatrix<Complex64>> {
    let levels = b.levels();
    let n = levels * levels;
    b.check(2 * n)?;
    let g = pm.vibronic_coupling();
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for k1 in 0..levels {
        for k2 in 0..levels {
            let i = k1 * levels + k2;
            let q = (k1 + k2) as f64;
            h[(i, i)] += Complex64::new(q * pm.omega_vib, -q * pm.gamma);
            if k1 + 1 < levels {
                let j = (k1 + 1) * levels + k2;
                let off = Complex64::from(g * ((k1 + 1) as f64).sqrt());
                h[(i, j)] = off;
                h[(j, i)] = off;
            }
            let swapped = k2 * levels + k1;
            h[(i, swapped)] += Complex64::from(parity.sign() * coupling_v);
        }
    }
    Ok(h)
}

/// Damped monomer Hamiltonian with ε_e removed from the diagonal.
pub(crate) fn monomer_block(p: &MonomerParams, b: &BasisSpec) -> Result<DMatrix<Complex64>> {
    let n = b.monomer_dim();
    b.check(n)?;
    let g = p.vibronic_coupling();
    let mut h = DMatrix::<Complex64>::zeros(n, n);
    for k in 0..n {
        h[(k, k)] = Complex64::new(k as f64 * p.omega_vib, -(k as f64) * p.gamma);
        if k + 1 < n {
            let off = Complex64::from(g * ((k + 1) as f64).sqrt());
            h[(k, k + 1)] = off;
            h[(k + 1, k)] = off;
        }
    }
    Ok(h)
}
