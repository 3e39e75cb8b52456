//! JSON run manifest written next to the outputs of a fit.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::RunConfig;
use crate::error::{Error, Result};
use crate::gpr::{HyperTraceEntry, KernelHyperparams, ParameterSpace};
use crate::model::MonomerParams;
use crate::spectra::FrequencyGrid;

pub const MANIFEST_FILE: &str = "manifest.json";

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BestFit {
    /// Searched parameters, in search-space order.
    pub names: Vec<String>,
    pub values: Vec<f64>,
    /// Complete parameter set of the stage, pinned values included.
    pub full_names: Vec<String>,
    pub full_params: Vec<f64>,
    pub cost: f64,
    pub surrogate_mean: f64,
    pub surrogate_std: f64,
}

/// Output files, relative to the manifest's directory.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct OutputFiles {
    pub history: PathBuf,
    pub timing: PathBuf,
    pub best_spectrum: PathBuf,
    pub target_spectrum: PathBuf,
    #[serde(default)]
    pub landscapes: Vec<PathBuf>,
    #[serde(default)]
    pub landscape_report: Option<PathBuf>,
}

impl OutputFiles {
    pub fn all(&self) -> Vec<&Path> {
        let mut v: Vec<&Path> = vec![&self.history, &self.timing, &self.best_spectrum, &self.target_spectrum];
        v.extend(self.landscapes.iter().map(|p| p.as_path()));
        v.extend(self.landscape_report.as_deref());
        v
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct Timing {
    pub total_s: f64,
    pub evaluations_s: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TargetInfo {
    pub source: String,
    pub points: usize,
    /// Grid points outside the measured range.
    pub outside: usize,
    pub clipped: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunManifest {
    pub tool_version: String,
    pub config: RunConfig,
    pub seed: u64,
    pub space: ParameterSpace,
    pub frequency_grid: FrequencyGrid,
    pub target: TargetInfo,
    /// Monomer parameters used by the dimer stage.
    pub monomer: Option<MonomerParams>,
    pub best: BestFit,
    pub evaluations: usize,
    pub failures: usize,
    pub hyperparams: KernelHyperparams,
    pub hyper_trace: Vec<HyperTraceEntry>,
    pub files: OutputFiles,
    pub timing: Timing,
}

impl RunManifest {
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Manifest(e.to_string()))
    }

    pub fn load(path: &Path) -> Result<(Self, PathBuf)> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let m = Self::from_json(&text)?;
        let dir = path.parent().unwrap_or(Path::new(".")).to_path_buf();
        Ok((m, dir))
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    pub fn write(&self, dir: &Path) -> Result<PathBuf> {
        let path = dir.join(MANIFEST_FILE);
        std::fs::write(&path, self.to_json()?).map_err(|e| Error::io(&path, e))?;
        Ok(path)
    }

    /// Every listed output must exist under `dir`.
    pub fn check_files(&self, dir: &Path) -> Result<()> {
        for f in self.files.all() {
            if !dir.join(f).is_file() {
                return Err(Error::Manifest(format!("listed file {} is missing", f.display())));
            }
        }
        Ok(())
    }
}
