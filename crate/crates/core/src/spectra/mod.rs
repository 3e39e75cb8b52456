//! Dipole correlation functions and broadened absorption spectra.

mod correlation;
mod expansion;
mod grid;
pub mod io;
mod simulate;
mod transform;

pub use correlation::{
    combine_dimer_correlation, dimer_correlation_components, dimer_expansions, dimer_expansions_unshifted,
    monomer_correlation, monomer_expansion, monomer_expansion_unshifted, CorrelationKind, CorrelationSeries,
};
pub use expansion::SpectralExpansion;
pub use grid::{FrequencyGrid, Spectrum, TimeGrid, TimeGridPolicy, MIN_WINDOW_DECAY, NORMALIZATION_TOL};
pub use simulate::{
    correlation_to_spectrum, correlation_to_spectrum_with_diagnostics, dimer_spectrum_from_expansions,
    monomer_spectrum_from_expansion, simulate_dimer, simulate_monomer, SimulatedSpectrum, SimulationSettings,
};
pub use transform::{half_line_transform, half_line_transform_direct};
