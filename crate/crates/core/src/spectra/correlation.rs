//! Dipole correlation functions of the damped monomer and dimer.
//!
//! The vibrational damping enters as −i·γ·a†a on every mode. For the
//! zero-temperature linear response this reproduces the exponential bath
//! correlation S·ω²·e^{−(γ+iω)τ} exactly: the optical coherence keeps the
//! ground-manifold vacuum on its bra side, so quantum jumps never contribute.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::expansion::SpectralExpansion;
use super::grid::TimeGrid;
use crate::error::{Error, Result};
use crate::model::{monomer_block, parity_block, BasisSpec, DimerParams, MonomerParams, Parity};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum CorrelationKind {
    Monomer,
    DimerPlus,
    DimerMinus,
    DimerCombined,
}

#[derive(Debug, Clone)]
pub struct CorrelationSeries {
    pub grid: TimeGrid,
    pub values: Vec<Complex64>,
    pub kind: CorrelationKind,
}

impl CorrelationSeries {
    pub fn from_expansion(e: &SpectralExpansion, grid: TimeGrid, kind: CorrelationKind) -> Self {
        CorrelationSeries {
            grid,
            values: e.series(grid.dt, grid.n_steps),
            kind,
        }
    }
}

/// Eigen-expansion of ⟨e,0|e^{−iH_eff t}|e,0⟩ for the damped monomer, energies absolute.
pub fn monomer_expansion(p: &MonomerParams, b: &BasisSpec) -> Result<SpectralExpansion> {
    Ok(monomer_expansion_unshifted(p, b)?.shifted(p.epsilon_e))
}

/// Same as [`monomer_expansion`] with ε_e removed; depends on (ω, S, γ) only.
pub fn monomer_expansion_unshifted(p: &MonomerParams, b: &BasisSpec) -> Result<SpectralExpansion> {
    p.validate()?;
    let h = monomer_block(p, b)?;
    SpectralExpansion::for_basis_state(&h, 0)
}

/// Expansions of M₊ and M₋ with the site energy ε_e + δ removed; they depend
/// only on the monomer vibronic parameters and V.
pub fn dimer_expansions_unshifted(
    pm: &MonomerParams,
    coupling_v: f64,
    b: &BasisSpec,
) -> Result<(SpectralExpansion, SpectralExpansion)> {
    pm.validate()?;
    if !coupling_v.is_finite() {
        return Err(Error::param("coupling_v", "must be finite"));
    }
    let plus = SpectralExpansion::for_basis_state(&parity_block(pm, coupling_v, Parity::Symmetric, b)?, 0)?;
    let minus = SpectralExpansion::for_basis_state(&parity_block(pm, coupling_v, Parity::Antisymmetric, b)?, 0)?;
    Ok((plus, minus))
}

pub fn dimer_expansions(
    pm: &MonomerParams,
    pd: &DimerParams,
    b: &BasisSpec,
) -> Result<(SpectralExpansion, SpectralExpansion)> {
    pd.validate()?;
    let (p, m) = dimer_expansions_unshifted(pm, pd.coupling_v, b)?;
    let shift = pm.epsilon_e + pd.delta;
    Ok((p.shifted(shift), m.shifted(shift)))
}

pub fn monomer_correlation(p: &MonomerParams, b: &BasisSpec, g: &TimeGrid) -> Result<CorrelationSeries> {
    let e = monomer_expansion(p, b)?;
    let series = CorrelationSeries::from_expansion(&e, *g, CorrelationKind::Monomer);
    check_contractive(&series, p.gamma)?;
    Ok(series)
}

/// (M₊, M₋) from the two exchange-parity sectors seeded by (|1,0,0⟩ ± |2,0,0⟩)/√2.
pub fn dimer_correlation_components(
    pm: &MonomerParams,
    pd: &DimerParams,
    b: &BasisSpec,
    g: &TimeGrid,
) -> Result<(CorrelationSeries, CorrelationSeries)> {
    let (p, m) = dimer_expansions(pm, pd, b)?;
    let plus = CorrelationSeries::from_expansion(&p, *g, CorrelationKind::DimerPlus);
    let minus = CorrelationSeries::from_expansion(&m, *g, CorrelationKind::DimerMinus);
    check_contractive(&plus, pm.gamma)?;
    check_contractive(&minus, pm.gamma)?;
    Ok((plus, minus))
}

/// M_dim = (1 + cos α)·M₊ + (1 − cos α)·M₋ with α in degrees.
pub fn combine_dimer_correlation(
    mp: &CorrelationSeries,
    mm: &CorrelationSeries,
    alpha: f64,
) -> Result<CorrelationSeries> {
    if mp.grid != mm.grid || mp.values.len() != mm.values.len() {
        return Err(Error::GridMismatch(format!(
            "M+ grid {:?} differs from M- grid {:?}",
            mp.grid, mm.grid
        )));
    }
    let c = alpha.to_radians().cos();
    let values = mp
        .values
        .iter()
        .zip(&mm.values)
        .map(|(p, m)| p * (1.0 + c) + m * (1.0 - c))
        .collect();
    Ok(CorrelationSeries {
        grid: mp.grid,
        values,
        kind: CorrelationKind::DimerCombined,
    })
}

/// |M(t)| may not exceed M(0) beyond round-off when the propagation is damped.
fn check_contractive(series: &CorrelationSeries, gamma: f64) -> Result<()> {
    let m0 = series.values[0].norm();
    let tol = 1e-8 * m0.max(1.0);
    for (j, v) in series.values.iter().enumerate() {
        let a = v.norm();
        if !a.is_finite() || (gamma >= 0.0 && a > m0 + tol) {
            return Err(Error::Propagation(format!(
                "{:?}: |M(t)| = {a:.6e} exceeds M(0) = {m0:.6e} at t = {:.6e} (step {j}, dt = {:.3e})",
                series.kind,
                series.grid.t(j),
                series.grid.dt
            )));
        }
    }
    Ok(())
}
