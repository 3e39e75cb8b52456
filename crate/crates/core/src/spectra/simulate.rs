use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use super::correlation::{
    combine_dimer_correlation, dimer_expansions_unshifted, monomer_expansion_unshifted, CorrelationKind,
    CorrelationSeries,
};
use super::expansion::SpectralExpansion;
use super::grid::{FrequencyGrid, Spectrum, TimeGrid, TimeGridPolicy};
use super::transform::half_line_transform;
use crate::error::{Error, Result};
use crate::model::{BasisSpec, DimerParams, MonomerParams};

/// Weight threshold (relative to the total) for an eigencomponent to shape the time step.
const BAND_WEIGHT_TOL: f64 = 1e-12;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SimulationSettings {
    pub basis: BasisSpec,
    pub time: TimeGridPolicy,
    /// Fraction of the total spectral weight the frequency grid must capture
    /// before a coverage warning is raised.
    pub min_coverage: f64,
}

impl Default for SimulationSettings {
    fn default() -> Self {
        SimulationSettings {
            basis: BasisSpec::default(),
            time: TimeGridPolicy::default(),
            min_coverage: 0.95,
        }
    }
}

/// A normalized spectrum plus the numerical context it was computed with.
#[derive(Debug, Clone)]
pub struct SimulatedSpectrum {
    pub spectrum: Spectrum,
    /// ∫_grid A dν divided by the full-line weight π·Re M(0).
    pub coverage: f64,
    /// Grid points whose (tiny) negative amplitudes were clipped to 0.
    pub clipped: usize,
    pub time_grid: TimeGrid,
    pub warnings: Vec<String>,
}

/// Broadened, area-normalized absorption spectrum of a correlation function.
pub fn correlation_to_spectrum(m: &CorrelationSeries, sigma: f64, nu: &FrequencyGrid) -> Result<Spectrum> {
    let out = correlation_to_spectrum_with_diagnostics(m, sigma, nu, SimulationSettings::default().min_coverage)?;
    for w in &out.warnings {
        log::warn!("{w}");
    }
    Ok(out.spectrum)
}

pub fn correlation_to_spectrum_with_diagnostics(
    m: &CorrelationSeries,
    sigma: f64,
    nu: &FrequencyGrid,
    min_coverage: f64,
) -> Result<SimulatedSpectrum> {
    if !(sigma.is_finite() && sigma > 0.0) {
        return Err(Error::param("sigma", format!("must be positive, got {sigma}")));
    }
    m.grid.check_window(sigma)?;
    let mut amp = half_line_transform(&m.values, m.grid.dt, sigma, nu);
    let raw = Spectrum::new(*nu, amp.clone())?;
    let raw_area = raw.area();
    let full = PI * m.values[0].re;
    let coverage = if full > 0.0 { raw_area / full } else { 0.0 };
    let mut warnings = Vec::new();
    if coverage < min_coverage {
        warnings.push(format!(
            "frequency grid [{:.1}, {:.1}] captures only {:.2}% of the spectral weight",
            nu.start,
            nu.end(),
            100.0 * coverage
        ));
    }
    let mut clipped = 0;
    for a in &mut amp {
        if *a < 0.0 {
            *a = 0.0;
            clipped += 1;
        }
    }
    let spectrum = Spectrum::new(*nu, amp)?.normalize()?;
    Ok(SimulatedSpectrum {
        spectrum,
        coverage,
        clipped,
        time_grid: m.grid,
        warnings,
    })
}

/// Monomer spectrum from a cached expansion with ε_e removed.
pub fn monomer_spectrum_from_expansion(
    unshifted: &SpectralExpansion,
    p: &MonomerParams,
    settings: &SimulationSettings,
    nu: &FrequencyGrid,
) -> Result<SimulatedSpectrum> {
    let e = unshifted.shifted(p.epsilon_e);
    let band = e.significant_band(BAND_WEIGHT_TOL);
    let grid = TimeGrid::auto(&[band], p.epsilon_e, nu, p.sigma_m, &settings.time)?;
    let m = CorrelationSeries::from_expansion(&e, grid, CorrelationKind::Monomer);
    correlation_to_spectrum_with_diagnostics(&m, p.sigma_m, nu, settings.min_coverage)
}

/// Dimer spectrum from cached (M₊, M₋) expansions with ε_e + δ removed.
pub fn dimer_spectrum_from_expansions(
    plus: &SpectralExpansion,
    minus: &SpectralExpansion,
    pm: &MonomerParams,
    pd: &DimerParams,
    settings: &SimulationSettings,
    nu: &FrequencyGrid,
) -> Result<SimulatedSpectrum> {
    pd.validate()?;
    let shift = pm.epsilon_e + pd.delta;
    let plus = plus.shifted(shift);
    let minus = minus.shifted(shift);
    let bands = [plus.significant_band(BAND_WEIGHT_TOL), minus.significant_band(BAND_WEIGHT_TOL)];
    let grid = TimeGrid::auto(&bands, pm.epsilon_e, nu, pd.sigma_d, &settings.time)?;
    let mp = CorrelationSeries::from_expansion(&plus, grid, CorrelationKind::DimerPlus);
    let mm = CorrelationSeries::from_expansion(&minus, grid, CorrelationKind::DimerMinus);
    let m = combine_dimer_correlation(&mp, &mm, pd.alpha)?;
    correlation_to_spectrum_with_diagnostics(&m, pd.sigma_d, nu, settings.min_coverage)
}

pub fn simulate_monomer(
    p: &MonomerParams,
    settings: &SimulationSettings,
    nu: &FrequencyGrid,
) -> Result<SimulatedSpectrum> {
    let e = monomer_expansion_unshifted(p, &settings.basis)?;
    monomer_spectrum_from_expansion(&e, p, settings, nu)
}

pub fn simulate_dimer(
    pm: &MonomerParams,
    pd: &DimerParams,
    settings: &SimulationSettings,
    nu: &FrequencyGrid,
) -> Result<SimulatedSpectrum> {
    pd.validate()?;
    let (plus, minus) = dimer_expansions_unshifted(pm, pd.coupling_v, &settings.basis)?;
    dimer_spectrum_from_expansions(&plus, &minus, pm, pd, settings, nu)
}
