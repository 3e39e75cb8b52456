//! Spectrum-fitting cost functions: parameter vector → simulate → cost.

use std::collections::HashMap;
use std::sync::{Arc, Mutex};

use sha2::{Digest, Sha256};

use crate::cost::spectral_cost;
use crate::error::{Error, Result};
use crate::gpr::{Dimension, Evaluator, ParameterSpace};
use crate::model::{DimerParams, MonomerParams};
use crate::spectra::{
    dimer_expansions_unshifted, dimer_spectrum_from_expansions, monomer_expansion_unshifted,
    monomer_spectrum_from_expansion, SimulatedSpectrum, SimulationSettings, SpectralExpansion, Spectrum,
};

const CACHE_CAP: usize = 4096;

/// Which parameters are searched and where the others are pinned.
#[derive(Debug, Clone, PartialEq)]
pub struct Layout {
    pub names: Vec<&'static str>,
    pub base: Vec<f64>,
    /// Indices into `names` of the searched parameters, in search-space order.
    pub free: Vec<usize>,
}

impl Layout {
    fn new(names: &[&'static str], base: Vec<f64>, space: &ParameterSpace) -> Result<Self> {
        let mut free = Vec::with_capacity(space.dim());
        for d in &space.dims {
            let i = names
                .iter()
                .position(|n| *n == d.name)
                .ok_or_else(|| Error::config(format!("bounds.{}", d.name), format!("unknown parameter (expected one of {names:?})")))?;
            free.push(i);
        }
        Ok(Layout {
            names: names.to_vec(),
            base,
            free,
        })
    }

    pub fn full(&self, x: &[f64]) -> Vec<f64> {
        let mut v = self.base.clone();
        for (k, &i) in self.free.iter().enumerate() {
            v[i] = x[k];
        }
        v
    }
}

fn spectrum_digest(s: &Spectrum) -> String {
    let mut h = Sha256::new();
    for v in [s.grid.start, s.grid.step, s.grid.len as f64].iter().chain(&s.amp) {
        h.update(v.to_bits().to_le_bytes());
    }
    hex::encode(&h.finalize()[..12])
}

fn cost_or_disjoint(target: &Spectrum, sim: Result<SimulatedSpectrum>) -> Result<f64> {
    match sim {
        Ok(s) => Ok(spectral_cost(target, &s.spectrum)?.value()),
        // No simulated weight on the grid at all: no overlap with the target.
        Err(Error::NotNormalized { .. }) => Ok(2.0),
        Err(e) => Err(e),
    }
}

struct BoundedCache<V> {
    map: Mutex<HashMap<Vec<u64>, Arc<V>>>,
}

impl<V> BoundedCache<V> {
    fn new() -> Self {
        BoundedCache {
            map: Mutex::new(HashMap::new()),
        }
    }

    fn get_or_try(&self, key: Vec<u64>, make: impl FnOnce() -> Result<V>) -> Result<Arc<V>> {
        if let Some(v) = self.map.lock().expect("cache lock").get(&key) {
            return Ok(v.clone());
        }
        let v = Arc::new(make()?);
        let mut map = self.map.lock().expect("cache lock");
        if map.len() >= CACHE_CAP {
            map.clear();
        }
        map.insert(key, v.clone());
        Ok(v)
    }
}

/// Monomer-stage cost; vectors are ordered as the search space.
pub struct MonomerEvaluator {
    pub target: Spectrum,
    pub settings: SimulationSettings,
    pub layout: Layout,
    cache: BoundedCache<SpectralExpansion>,
}

impl MonomerEvaluator {
    /// `base` supplies the values of parameters that are not in `space`.
    pub fn new(target: Spectrum, settings: SimulationSettings, space: &ParameterSpace, base: MonomerParams) -> Result<Self> {
        target.check_normalized()?;
        settings.basis.check(settings.basis.monomer_dim())?;
        Ok(MonomerEvaluator {
            target,
            settings,
            layout: Layout::new(&MonomerParams::NAMES, base.to_vec(), space)?,
            cache: BoundedCache::new(),
        })
    }

    pub fn params(&self, x: &[f64]) -> Result<MonomerParams> {
        MonomerParams::from_slice(&self.layout.full(x))
    }

    pub fn simulate(&self, x: &[f64]) -> Result<SimulatedSpectrum> {
        let p = self.params(x)?;
        let key = vec![p.omega_vib.to_bits(), p.huang_rhys.to_bits(), p.gamma.to_bits()];
        let e = self
            .cache
            .get_or_try(key, || monomer_expansion_unshifted(&p, &self.settings.basis))?;
        monomer_spectrum_from_expansion(&e, &p, &self.settings, &self.target.grid)
    }
}

impl Evaluator for MonomerEvaluator {
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        cost_or_disjoint(&self.target, self.simulate(x))
    }

    fn identity(&self) -> String {
        format!(
            "monomer|{}|basis={:?}|time={:?}|target={}|base={:?}|free={:?}",
            env!("CARGO_PKG_VERSION"),
            self.settings.basis,
            self.settings.time,
            spectrum_digest(&self.target),
            self.layout.base,
            self.layout.free
        )
    }
}

/// Dimer-stage cost at fixed monomer parameters.
pub struct DimerEvaluator {
    pub target: Spectrum,
    pub settings: SimulationSettings,
    pub monomer: MonomerParams,
    pub layout: Layout,
    cache: BoundedCache<(SpectralExpansion, SpectralExpansion)>,
}

impl DimerEvaluator {
    pub fn new(
        target: Spectrum,
        settings: SimulationSettings,
        space: &ParameterSpace,
        monomer: MonomerParams,
        base: DimerParams,
    ) -> Result<Self> {
        target.check_normalized()?;
        monomer.validate()?;
        settings.basis.check(settings.basis.dimer_dim())?;
        Ok(DimerEvaluator {
            target,
            settings,
            monomer,
            layout: Layout::new(&DimerParams::NAMES, base.to_vec(), space)?,
            cache: BoundedCache::new(),
        })
    }

    pub fn params(&self, x: &[f64]) -> Result<DimerParams> {
        DimerParams::from_slice(&self.layout.full(x))
    }

    pub fn simulate(&self, x: &[f64]) -> Result<SimulatedSpectrum> {
        let pd = self.params(x)?;
        let e = self.cache.get_or_try(vec![pd.coupling_v.to_bits()], || {
            dimer_expansions_unshifted(&self.monomer, pd.coupling_v, &self.settings.basis)
        })?;
        dimer_spectrum_from_expansions(&e.0, &e.1, &self.monomer, &pd, &self.settings, &self.target.grid)
    }
}

impl Evaluator for DimerEvaluator {
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        cost_or_disjoint(&self.target, self.simulate(x))
    }

    fn identity(&self) -> String {
        format!(
            "dimer|{}|basis={:?}|time={:?}|target={}|monomer={:?}|base={:?}|free={:?}",
            env!("CARGO_PKG_VERSION"),
            self.settings.basis,
            self.settings.time,
            spectrum_digest(&self.target),
            self.monomer.to_vec(),
            self.layout.base,
            self.layout.free
        )
    }
}

/// Default monomer search box (cm⁻¹ except the Huang–Rhys factor).
pub fn default_monomer_space() -> ParameterSpace {
    let two_pi = 2.0 * std::f64::consts::PI;
    ParameterSpace::new(vec![
        Dimension::new("epsilon_e", 2400.0 * two_pi, 2600.0 * two_pi, "cm-1"),
        Dimension::new("omega_vib", two_pi, 250.0 * two_pi, "cm-1"),
        Dimension::new("huang_rhys", 0.1, 1.0, ""),
        Dimension::new("gamma", 1.0, 50.0, "cm-1"),
        Dimension::new("sigma_m", 100.0, 1000.0, "cm-1"),
    ])
    .expect("static bounds")
}

/// Default dimer search box.
pub fn default_dimer_space() -> ParameterSpace {
    let two_pi = 2.0 * std::f64::consts::PI;
    ParameterSpace::new(vec![
        Dimension::new("coupling_v", two_pi, 250.0 * two_pi, "cm-1"),
        Dimension::new("delta", -300.0, 300.0, "cm-1"),
        Dimension::new("alpha", 0.0, 180.0, "deg"),
        Dimension::new("sigma_d", 100.0, 1000.0, "cm-1"),
    ])
    .expect("static bounds")
}
