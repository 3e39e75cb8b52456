//! Run configuration (TOML).
//!
//! ```toml
//! stage = "monomer"              # monomer | dimer
//! spectrum = "data/monomer.txt"
//! output_dir = "runs/monomer"
//! seed = 7
//! budget = 1000
//! n_sc = [0, 1, 2, 3]
//!
//! [bounds]                       # searched parameters; defaults per stage
//! huang_rhys = [0.1, 1.0]
//!
//! [fixed]                        # pinned parameters (removed from the search)
//! gamma = 37.0
//!
//! [monomer]                      # dimer stage: inline monomer values ...
//! epsilon_e = 16120.0
//! # ... or: monomer_manifest = "runs/monomer/manifest.json"
//! ```
//!
//! Optional tables: `[simulation]`, `[frequency_grid]`, `[thresholds]`,
//! `[gpr]`, `[landscape]`. Relative paths are resolved against the directory of
//! the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::cost::CostThresholds;
use crate::error::{Error, Result};
use crate::evaluate::{default_dimer_space, default_monomer_space};
use crate::gpr::{AcquisitionOptions, Dimension, FitOptions, HyperSchedule, OptimizeConfig, ParameterSpace};
use crate::landscape::{EXACT_NODE_CAP, EXACT_POINTS, SURROGATE_POINTS};
use crate::model::{BasisSpec, DimerParams, MonomerParams};
use crate::spectra::{FrequencyGrid, SimulationSettings, TimeGridPolicy};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Stage {
    Monomer,
    Dimer,
}

impl Stage {
    pub fn names(self) -> &'static [&'static str] {
        match self {
            Stage::Monomer => &MonomerParams::NAMES,
            Stage::Dimer => &DimerParams::NAMES,
        }
    }

    pub fn default_space(self) -> ParameterSpace {
        match self {
            Stage::Monomer => default_monomer_space(),
            Stage::Dimer => default_dimer_space(),
        }
    }

    pub fn default_n_sc(self) -> Vec<f64> {
        match self {
            Stage::Monomer => vec![0.0, 1.0, 2.0, 3.0],
            Stage::Dimer => vec![0.0, 20.0, 40.0, 60.0],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimulationConfig {
    #[serde(default = "default_n_max")]
    pub n_max: usize,
    #[serde(default = "default_max_dim")]
    pub max_dim: usize,
    #[serde(default = "default_phase")]
    pub phase_per_step: f64,
    #[serde(default = "default_decay")]
    pub window_decay: f64,
    #[serde(default = "default_coverage")]
    pub min_coverage: f64,
}

fn default_n_max() -> usize {
    BasisSpec::default().n_max
}
fn default_max_dim() -> usize {
    BasisSpec::default().max_dim
}
fn default_phase() -> f64 {
    TimeGridPolicy::default().phase_per_step
}
fn default_decay() -> f64 {
    TimeGridPolicy::default().window_decay
}
fn default_coverage() -> f64 {
    SimulationSettings::default().min_coverage
}

impl Default for SimulationConfig {
    fn default() -> Self {
        SimulationConfig {
            n_max: default_n_max(),
            max_dim: default_max_dim(),
            phase_per_step: default_phase(),
            window_decay: default_decay(),
            min_coverage: default_coverage(),
        }
    }
}

impl SimulationConfig {
    pub fn settings(&self) -> SimulationSettings {
        SimulationSettings {
            basis: BasisSpec {
                n_max: self.n_max,
                max_dim: self.max_dim,
            },
            time: TimeGridPolicy {
                phase_per_step: self.phase_per_step,
                window_decay: self.window_decay,
            },
            min_coverage: self.min_coverage,
        }
    }

    fn validate(&self) -> Result<()> {
        if !(self.phase_per_step > 0.0 && self.phase_per_step <= 1.0) {
            return Err(Error::config("simulation.phase_per_step", "must be in (0, 1]"));
        }
        if self.window_decay < crate::spectra::MIN_WINDOW_DECAY {
            return Err(Error::config(
                "simulation.window_decay",
                format!("must be >= {}", crate::spectra::MIN_WINDOW_DECAY),
            ));
        }
        if !(0.0..=1.0).contains(&self.min_coverage) {
            return Err(Error::config("simulation.min_coverage", "must be in [0, 1]"));
        }
        Ok(())
    }
}

/// Simulation frequency axis; defaults to the measured range with 2001 points.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GridConfig {
    pub start: Option<f64>,
    pub end: Option<f64>,
    #[serde(default = "default_points")]
    pub points: usize,
}

fn default_points() -> usize {
    2001
}

impl Default for GridConfig {
    fn default() -> Self {
        GridConfig {
            start: None,
            end: None,
            points: default_points(),
        }
    }
}

impl GridConfig {
    pub fn resolve(&self, data_range: (f64, f64)) -> Result<FrequencyGrid> {
        let start = self.start.unwrap_or(data_range.0);
        let end = self.end.unwrap_or(data_range.1);
        FrequencyGrid::new(start, end, self.points).map_err(|e| Error::config("frequency_grid", e.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
#[serde(deny_unknown_fields)]
pub struct GprConfig {
    pub initial_points: Option<usize>,
    #[serde(default)]
    pub fit: FitOptions,
    #[serde(default)]
    pub acquisition: AcquisitionOptions,
    #[serde(default)]
    pub hyper_schedule: HyperSchedule,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LandscapeConfig {
    /// Pairs of parameters scanned through the best point.
    #[serde(default)]
    pub cuts: Vec<[String; 2]>,
    #[serde(default = "default_surrogate_points")]
    pub points: usize,
    /// Also evaluate the simulator on the cut grids.
    #[serde(default)]
    pub exact_cuts: bool,
    /// Evaluate the simulator on a full grid and report E^C.
    #[serde(default)]
    pub exact_full: bool,
    #[serde(default = "default_exact_points")]
    pub exact_points: usize,
    #[serde(default = "default_exact_cap")]
    pub exact_cap: usize,
}

fn default_surrogate_points() -> usize {
    SURROGATE_POINTS
}
fn default_exact_points() -> usize {
    EXACT_POINTS
}
fn default_exact_cap() -> usize {
    EXACT_NODE_CAP
}

impl Default for LandscapeConfig {
    fn default() -> Self {
        LandscapeConfig {
            cuts: Vec::new(),
            points: SURROGATE_POINTS,
            exact_cuts: false,
            exact_full: false,
            exact_points: EXACT_POINTS,
            exact_cap: EXACT_NODE_CAP,
        }
    }
}

impl LandscapeConfig {
    /// Configured cuts, or the stage default.
    pub fn cuts_for(&self, stage: Stage, space: &ParameterSpace) -> Vec<[String; 2]> {
        if !self.cuts.is_empty() {
            return self.cuts.clone();
        }
        let defaults: &[[&str; 2]] = match stage {
            Stage::Monomer => &[["omega_vib", "huang_rhys"], ["epsilon_e", "sigma_m"], ["gamma", "huang_rhys"]],
            Stage::Dimer => &[["coupling_v", "alpha"], ["delta", "sigma_d"], ["coupling_v", "delta"]],
        };
        defaults
            .iter()
            .filter(|c| space.index_of(c[0]).is_some() && space.index_of(c[1]).is_some())
            .map(|c| [c[0].to_string(), c[1].to_string()])
            .collect()
    }
}

/// Where the dimer stage takes its monomer parameters from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MonomerSource {
    Inline(MonomerParams),
    Manifest { monomer_manifest: PathBuf },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub stage: Stage,
    pub spectrum: PathBuf,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub budget: usize,
    pub n_sc: Option<Vec<f64>>,
    /// Worker threads for evaluations; 0 picks the available parallelism.
    #[serde(default)]
    pub workers: usize,
    #[serde(default)]
    pub bounds: BTreeMap<String, [f64; 2]>,
    #[serde(default)]
    pub fixed: BTreeMap<String, f64>,
    pub monomer: Option<MonomerSource>,
    #[serde(default)]
    pub simulation: SimulationConfig,
    #[serde(default)]
    pub frequency_grid: GridConfig,
    #[serde(default)]
    pub thresholds: CostThresholds,
    #[serde(default)]
    pub gpr: GprConfig,
    #[serde(default)]
    pub landscape: LandscapeConfig,
}

fn default_output() -> PathBuf {
    PathBuf::from("dimerfit-out")
}
fn default_budget() -> usize {
    1000
}

impl RunConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| {
            let field = e.span().map(|s| format!("at bytes {}..{}", s.start, s.end)).unwrap_or_default();
            Error::config(field, e.message().to_string())
        })
    }

    /// Loads a TOML config, or the config stored in a run manifest (`.json`).
    /// Relative paths are made absolute against the file's directory.
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = if path.extension().is_some_and(|e| e == "json") {
            crate::manifest::RunManifest::from_json(&text)?.config
        } else {
            Self::from_toml(&text)?
        };
        let base = path
            .parent()
            .map(|p| if p.as_os_str().is_empty() { Path::new(".") } else { p })
            .unwrap_or(Path::new("."));
        let base = std::fs::canonicalize(base).unwrap_or_else(|_| base.to_path_buf());
        cfg.resolve_paths(&base);
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let fix = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        fix(&mut self.spectrum);
        fix(&mut self.output_dir);
        if let Some(MonomerSource::Manifest { monomer_manifest }) = &mut self.monomer {
            fix(monomer_manifest);
        }
    }

    pub fn n_sc(&self) -> Vec<f64> {
        self.n_sc.clone().unwrap_or_else(|| self.stage.default_n_sc())
    }

    /// Search space: stage defaults, overridden by `[bounds]`, minus `[fixed]`.
    pub fn space(&self) -> Result<ParameterSpace> {
        let names = self.stage.names();
        for k in self.bounds.keys().chain(self.fixed.keys()) {
            if !names.contains(&k.as_str()) {
                return Err(Error::config(
                    format!("bounds.{k}"),
                    format!("unknown parameter for the {:?} stage (expected one of {names:?})", self.stage),
                ));
            }
        }
        let dims: Vec<Dimension> = self
            .stage
            .default_space()
            .dims
            .into_iter()
            .filter(|d| !self.fixed.contains_key(&d.name))
            .map(|mut d| {
                if let Some([lo, hi]) = self.bounds.get(&d.name) {
                    d.lower = *lo;
                    d.upper = *hi;
                }
                d
            })
            .collect();
        ParameterSpace::new(dims)
    }

    pub fn optimize_config(&self) -> OptimizeConfig {
        OptimizeConfig {
            budget: self.budget,
            n_sc: self.n_sc(),
            seed: self.seed,
            initial_points: self.gpr.initial_points,
            fit: self.gpr.fit.clone(),
            acquisition: self.gpr.acquisition.clone(),
            hyper_schedule: self.gpr.hyper_schedule,
        }
    }

    /// Values for pinned parameters, on top of the reference set for the stage.
    pub fn base_values(&self) -> Vec<f64> {
        let mut base = match self.stage {
            Stage::Monomer => MonomerParams::reference().to_vec(),
            Stage::Dimer => DimerParams::reference_dimer0().to_vec(),
        };
        for (i, n) in self.stage.names().iter().enumerate() {
            if let Some(v) = self.fixed.get(*n) {
                base[i] = *v;
            }
        }
        base
    }

    /// Checks everything that does not need the file system.
    pub fn validate(&self) -> Result<()> {
        let space = self.space()?;
        self.simulation.validate()?;
        self.optimize_config().validate(space.dim())?;
        if self.stage == Stage::Dimer && self.monomer.is_none() {
            return Err(Error::config(
                "monomer",
                "the dimer stage needs monomer parameters ([monomer] values or monomer_manifest)",
            ));
        }
        if let Some(MonomerSource::Inline(p)) = &self.monomer {
            p.validate().map_err(|e| Error::config("monomer", e.to_string()))?;
        }
        let t = &self.thresholds;
        if !(t.inner > 0.0 && t.inner <= t.reference && t.reference <= 2.0) {
            return Err(Error::config("thresholds", "need 0 < inner <= reference <= 2"));
        }
        if self.landscape.points < 2 || self.landscape.exact_points < 2 {
            return Err(Error::config("landscape.points", "need at least 2 points per axis"));
        }
        let base = self.base_values();
        match self.stage {
            Stage::Monomer => MonomerParams::from_slice(&base).map(|_| ()),
            Stage::Dimer => DimerParams::from_slice(&base).map(|_| ()),
        }
        .map_err(|e| Error::config("fixed", e.to_string()))?;
        Ok(())
    }

    /// Monomer parameters for the dimer stage.
    pub fn monomer_params(&self) -> Result<MonomerParams> {
        match &self.monomer {
            Some(MonomerSource::Inline(p)) => Ok(*p),
            Some(MonomerSource::Manifest { monomer_manifest }) => {
                let text = std::fs::read_to_string(monomer_manifest).map_err(|e| Error::io(monomer_manifest, e))?;
                let m = crate::manifest::RunManifest::from_json(&text)?;
                if m.config.stage != Stage::Monomer {
                    return Err(Error::Manifest(format!(
                        "{} is not a monomer-stage manifest",
                        monomer_manifest.display()
                    )));
                }
                MonomerParams::from_slice(&m.best.full_params)
            }
            None => Err(Error::config("monomer", "missing monomer parameter source")),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn minimal_monomer_config() {
        let c = RunConfig::from_toml("stage = \"monomer\"\nspectrum = \"x.txt\"\n").unwrap();
        c.validate().unwrap();
        assert_eq!(c.n_sc(), vec![0.0, 1.0, 2.0, 3.0]);
        assert_eq!(c.space().unwrap().dim(), 5);
        assert_eq!(c.budget, 1000);
    }

    #[test]
    fn fixed_and_bounds() {
        let c = RunConfig::from_toml(
            "stage = \"monomer\"\nspectrum = \"x\"\n[bounds]\nhuang_rhys = [0.2, 0.9]\n[fixed]\ngamma = 10.0\n",
        )
        .unwrap();
        let s = c.space().unwrap();
        assert_eq!(s.dim(), 4);
        assert_eq!(s.index_of("gamma"), None);
        let d = &s.dims[s.index_of("huang_rhys").unwrap()];
        assert_eq!((d.lower, d.upper), (0.2, 0.9));
        assert_eq!(c.base_values()[3], 10.0);
    }

    #[test]
    fn dimer_needs_monomer_source() {
        let c = RunConfig::from_toml("stage = \"dimer\"\nspectrum = \"x\"\n").unwrap();
        match c.validate() {
            Err(Error::Config { field, .. }) => assert_eq!(field, "monomer"),
            other => panic!("{other:?}"),
        }
        let inline = RunConfig::from_toml(
            "stage = \"dimer\"\nspectrum = \"x\"\n[monomer]\nepsilon_e = 16120.0\nomega_vib = 1450.0\nhuang_rhys = 0.67\ngamma = 37.0\nsigma_m = 223.0\n",
        )
        .unwrap();
        inline.validate().unwrap();
        assert_eq!(inline.monomer_params().unwrap(), MonomerParams::reference());
        let by_file =
            RunConfig::from_toml("stage = \"dimer\"\nspectrum = \"x\"\n[monomer]\nmonomer_manifest = \"m.json\"\n").unwrap();
        assert!(matches!(by_file.monomer, Some(MonomerSource::Manifest { .. })));
    }

    #[test]
    fn rejects_unknown_and_bad_values() {
        assert!(RunConfig::from_toml("stage = \"trimer\"\nspectrum = \"x\"\n").is_err());
        assert!(RunConfig::from_toml("stage = \"monomer\"\nspectrum = \"x\"\ncolour = 1\n").is_err());
        let c = RunConfig::from_toml("stage = \"monomer\"\nspectrum = \"x\"\n[bounds]\nfoo = [0.0, 1.0]\n").unwrap();
        assert!(c.validate().is_err());
        let c = RunConfig::from_toml("stage = \"monomer\"\nspectrum = \"x\"\nbudget = 5\n").unwrap();
        assert!(matches!(c.validate(), Err(Error::Config { field, .. }) if field == "budget"));
        let c = RunConfig::from_toml("stage = \"monomer\"\nspectrum = \"x\"\n[bounds]\ngamma = [5.0, 1.0]\n").unwrap();
        assert!(c.validate().is_err());
    }
}
