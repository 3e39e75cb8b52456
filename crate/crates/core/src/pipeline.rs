//! The fit / landscape / simulate / validate workflows behind the CLI.

use std::path::{Path, PathBuf};
use std::time::Instant;

use serde::{Deserialize, Serialize};

use crate::config::{LandscapeConfig, RunConfig, Stage};
use crate::cost::{ingest_spectrum, spectral_cost, to_common_grid, ExperimentalSpectrum, Resampled};
use crate::error::{Error, Result};
use crate::evaluate::{DimerEvaluator, MonomerEvaluator};
use crate::gpr::{optimize, Evaluator, GprModel, History, ParameterSpace};
use crate::landscape::{
    consistency_region, error_metric, exact_grid, surrogate_grid, uncertainty_metric, ExactCache, ExactStats,
    GridSpec, Landscape, SURROGATE_NODE_CAP,
};
use crate::manifest::{BestFit, OutputFiles, RunManifest, TargetInfo, Timing, MANIFEST_FILE};
use crate::model::{DimerParams, MonomerParams};
use crate::spectra::io::format_spectrum;
use crate::spectra::{simulate_dimer, simulate_monomer, FrequencyGrid, SimulatedSpectrum, SimulationSettings};

pub const HISTORY_FILE: &str = "history.tsv";
pub const TIMING_FILE: &str = "timing.tsv";
pub const BEST_SPECTRUM_FILE: &str = "best_spectrum.txt";
pub const TARGET_SPECTRUM_FILE: &str = "target_spectrum.txt";
pub const LANDSCAPE_REPORT_FILE: &str = "landscape.json";
pub const EXACT_CACHE_FILE: &str = "exact_cache.tsv";

pub enum StageEvaluator {
    Monomer(MonomerEvaluator),
    Dimer(DimerEvaluator),
}

impl StageEvaluator {
    pub fn simulate(&self, x: &[f64]) -> Result<SimulatedSpectrum> {
        match self {
            StageEvaluator::Monomer(e) => e.simulate(x),
            StageEvaluator::Dimer(e) => e.simulate(x),
        }
    }

    pub fn full_params(&self, x: &[f64]) -> Vec<f64> {
        match self {
            StageEvaluator::Monomer(e) => e.layout.full(x),
            StageEvaluator::Dimer(e) => e.layout.full(x),
        }
    }
}

impl Evaluator for StageEvaluator {
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        match self {
            StageEvaluator::Monomer(e) => e.evaluate(x),
            StageEvaluator::Dimer(e) => e.evaluate(x),
        }
    }

    fn identity(&self) -> String {
        match self {
            StageEvaluator::Monomer(e) => e.identity(),
            StageEvaluator::Dimer(e) => e.identity(),
        }
    }
}

/// A validated config with its target spectrum and cost function.
pub struct PreparedRun {
    pub config: RunConfig,
    pub space: ParameterSpace,
    pub experimental: ExperimentalSpectrum,
    pub target: Resampled,
    pub grid: FrequencyGrid,
    pub monomer: Option<MonomerParams>,
    pub evaluator: StageEvaluator,
}

pub fn prepare(cfg: &RunConfig) -> Result<PreparedRun> {
    cfg.validate()?;
    let space = cfg.space()?;
    let experimental = ingest_spectrum(&cfg.spectrum)?;
    let range = experimental.preprocessing.window.expect("ingest records the window");
    let grid = cfg.frequency_grid.resolve(range)?;
    let target = to_common_grid(&experimental, &grid)?;
    if target.outside > 0 {
        log::warn!(
            "{} of {} grid points lie outside the measured range and were set to 0",
            target.outside,
            grid.len
        );
    }
    let settings = cfg.simulation.settings();
    let base = cfg.base_values();
    let (monomer, evaluator) = match cfg.stage {
        Stage::Monomer => {
            let e = MonomerEvaluator::new(
                target.spectrum.clone(),
                settings,
                &space,
                MonomerParams::from_slice(&base)?,
            )?;
            (None, StageEvaluator::Monomer(e))
        }
        Stage::Dimer => {
            let pm = cfg.monomer_params()?;
            let e = DimerEvaluator::new(
                target.spectrum.clone(),
                settings,
                &space,
                pm,
                DimerParams::from_slice(&base)?,
            )?;
            (Some(pm), StageEvaluator::Dimer(e))
        }
    };
    Ok(PreparedRun {
        config: cfg.clone(),
        space,
        experimental,
        target,
        grid,
        monomer,
        evaluator,
    })
}

fn thread_pool(workers: usize) -> Result<rayon::ThreadPool> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::config("workers", e.to_string()))
}

fn write(path: &Path, text: &str) -> Result<()> {
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}

/// Runs one fitting stage and writes history, spectra and the manifest into the
/// configured output directory.
pub fn cmd_fit(cfg: &RunConfig) -> Result<(RunManifest, PathBuf)> {
    let started = Instant::now();
    let run = prepare(cfg)?;
    let out = &cfg.output_dir;
    std::fs::create_dir_all(out).map_err(|e| Error::io(out, e))?;
    let ocfg = cfg.optimize_config();
    let pool = thread_pool(cfg.workers)?;
    let result = pool.install(|| {
        optimize(&run.evaluator, &run.space, &ocfg, |info| {
            if info.iteration % 25 == 0 {
                log::info!(
                    "iteration {}: {} evaluations, best cost {:.5}",
                    info.iteration,
                    info.evaluated,
                    info.best_cost
                );
            }
        })
    })?;

    let files = OutputFiles {
        history: PathBuf::from(HISTORY_FILE),
        timing: PathBuf::from(TIMING_FILE),
        best_spectrum: PathBuf::from(BEST_SPECTRUM_FILE),
        target_spectrum: PathBuf::from(TARGET_SPECTRUM_FILE),
        landscapes: Vec::new(),
        landscape_report: None,
    };
    write(&out.join(&files.history), &result.history.to_tsv())?;
    write(&out.join(&files.timing), &result.history.timing_tsv())?;
    let best_sim = run.evaluator.simulate(&result.best_x)?;
    let full = run.evaluator.full_params(&result.best_x);
    let names = cfg.stage.names();
    let mut meta: Vec<(&str, String)> = names.iter().zip(&full).map(|(n, v)| (*n, v.to_string())).collect();
    meta.push(("cost", result.best_cost.to_string()));
    write(&out.join(&files.best_spectrum), &format_spectrum(&best_sim.spectrum, &meta))?;
    write(
        &out.join(&files.target_spectrum),
        &format_spectrum(&run.target.spectrum, &[("source", run.experimental.source.clone())]),
    )?;

    let pred = result.model.predict(&result.best_x)?;
    let evaluations_s = result.history.records.iter().map(|r| r.wall_time).sum();
    let manifest = RunManifest {
        tool_version: env!("CARGO_PKG_VERSION").to_string(),
        config: cfg.clone(),
        seed: cfg.seed,
        space: run.space.clone(),
        frequency_grid: run.grid,
        target: TargetInfo {
            source: run.experimental.source.clone(),
            points: run.experimental.len(),
            outside: run.target.outside,
            clipped: run.target.clipped,
        },
        monomer: run.monomer,
        best: BestFit {
            names: run.space.names().iter().map(|s| s.to_string()).collect(),
            values: result.best_x.clone(),
            full_names: names.iter().map(|s| s.to_string()).collect(),
            full_params: full,
            cost: result.best_cost,
            surrogate_mean: pred.mean,
            surrogate_std: pred.std,
        },
        evaluations: result.history.records.len(),
        failures: result.history.records.iter().filter(|r| r.cost.is_none()).count(),
        hyperparams: result.model.hyper.clone(),
        hyper_trace: result.hyper_trace.clone(),
        files,
        timing: Timing {
            total_s: started.elapsed().as_secs_f64(),
            evaluations_s,
        },
    };
    let path = manifest.write(out)?;
    manifest.check_files(out)?;
    Ok((manifest, path))
}

/// Surrogate model of a finished run, rebuilt from its history and final hyperparameters.
pub fn load_model(manifest: &RunManifest, dir: &Path) -> Result<GprModel> {
    let path = dir.join(&manifest.files.history);
    let text = std::fs::read_to_string(&path).map_err(|e| Error::io(&path, e))?;
    let history = History::from_tsv(&text)?;
    let train = history.training_prefix(&manifest.space, history.records.len())?;
    GprModel::with_hyperparams(train, manifest.hyperparams.clone())
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RegionSummary {
    pub threshold: f64,
    pub nodes: usize,
    pub extents: Vec<(String, f64, f64)>,
}

fn regions(l: &Landscape, thresholds: [f64; 2]) -> Result<Vec<RegionSummary>> {
    thresholds
        .iter()
        .map(|&t| {
            let r = consistency_region(l, t)?;
            Ok(RegionSummary {
                threshold: t,
                nodes: r.count,
                extents: r.extents,
            })
        })
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeEntry {
    pub label: String,
    pub file: PathBuf,
    pub nodes: usize,
    pub surrogate_regions: Vec<RegionSummary>,
    pub exact_regions: Option<Vec<RegionSummary>>,
    pub error_metric: Option<f64>,
    pub uncertainty_metric: f64,
    pub exact_stats: Option<ExactStats>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LandscapeReport {
    pub best_point: Vec<f64>,
    pub landscapes: Vec<LandscapeEntry>,
}

fn merge_exact(surrogate: &Landscape, exact: &Landscape) -> Landscape {
    let mut l = surrogate.clone();
    l.exact = exact.exact.clone();
    l
}

/// Surrogate cuts through the best point, optional exact grids, metrics and
/// consistency regions for a finished fit.
pub fn cmd_landscape(manifest_path: &Path, lc: &LandscapeConfig, workers: usize) -> Result<LandscapeReport> {
    let (mut manifest, dir) = RunManifest::load(manifest_path)?;
    let model = load_model(&manifest, &dir)?;
    let space = manifest.space.clone();
    let thresholds = manifest.config.thresholds;
    let best = manifest.best.values.clone();
    let pool = thread_pool(workers)?;

    let need_exact = lc.exact_cuts || lc.exact_full;
    let run = if need_exact { Some(prepare(&manifest.config)?) } else { None };
    let mut cache = if need_exact {
        Some(ExactCache::open(&dir.join(EXACT_CACHE_FILE))?)
    } else {
        None
    };

    let mut jobs: Vec<(String, GridSpec, bool)> = Vec::new();
    for [a, b] in lc.cuts_for(manifest.config.stage, &space) {
        let g = GridSpec::cut(&space, &best, &[a.as_str(), b.as_str()], lc.points)?;
        jobs.push((format!("{a}_{b}"), g, lc.exact_cuts));
    }
    if lc.exact_full {
        jobs.push(("full".into(), GridSpec::full(&space, lc.exact_points)?, true));
    }

    let mut entries = Vec::new();
    for (label, grid, with_exact) in jobs {
        let sur = pool.install(|| surrogate_grid(&model, &grid, &thresholds, SURROGATE_NODE_CAP))?;
        let mut entry = LandscapeEntry {
            label: label.clone(),
            file: PathBuf::from(format!("landscape_{label}.tsv")),
            nodes: grid.len(),
            surrogate_regions: regions(&sur, thresholds.as_array())?,
            exact_regions: None,
            error_metric: None,
            uncertainty_metric: uncertainty_metric(&sur),
            exact_stats: None,
        };
        let mut out = sur.clone();
        if with_exact {
            let run = run.as_ref().expect("prepared when exact grids are requested");
            let (ex, stats) =
                pool.install(|| exact_grid(&run.evaluator, &space, &grid, &thresholds, lc.exact_cap, cache.as_mut()))?;
            entry.exact_regions = Some(regions(&ex, thresholds.as_array())?);
            entry.error_metric = Some(error_metric(&ex, &sur)?);
            entry.exact_stats = Some(stats);
            out = merge_exact(&sur, &ex);
        }
        write(&dir.join(&entry.file), &out.to_tsv())?;
        entries.push(entry);
    }

    let report = LandscapeReport {
        best_point: best,
        landscapes: entries,
    };
    write(&dir.join(LANDSCAPE_REPORT_FILE), &serde_json::to_string_pretty(&report)?)?;
    for e in &report.landscapes {
        if !manifest.files.landscapes.contains(&e.file) {
            manifest.files.landscapes.push(e.file.clone());
        }
    }
    manifest.files.landscape_report = Some(PathBuf::from(LANDSCAPE_REPORT_FILE));
    std::fs::write(dir.join(MANIFEST_FILE), manifest.to_json()?).map_err(|e| Error::io(dir.join(MANIFEST_FILE), e))?;
    manifest.check_files(&dir)?;
    Ok(report)
}

pub struct SimulateRequest {
    pub monomer: MonomerParams,
    pub dimer: Option<DimerParams>,
    pub settings: SimulationSettings,
    pub grid: Option<FrequencyGrid>,
    pub reference: Option<PathBuf>,
    pub out: Option<PathBuf>,
}

pub struct SimulateReport {
    pub result: SimulatedSpectrum,
    pub cost: Option<f64>,
}

/// Default axis: the monomer window, widened by |V| and shifted by δ for dimers.
pub fn default_grid(pm: &MonomerParams, pd: Option<&DimerParams>) -> Result<FrequencyGrid> {
    match pd {
        None => FrequencyGrid::default_for(pm.epsilon_e, pm.omega_vib, pm.sigma_m),
        Some(d) => {
            let sigma = pm.sigma_m.max(d.sigma_d);
            let centre = pm.epsilon_e + d.delta;
            let v = d.coupling_v.abs();
            FrequencyGrid::new(
                centre - 10.0 * sigma - pm.omega_vib - v,
                centre + 6.0 * pm.omega_vib + 10.0 * sigma + v,
                2001,
            )
        }
    }
}

pub fn cmd_simulate(req: &SimulateRequest) -> Result<SimulateReport> {
    let grid = match req.grid {
        Some(g) => g,
        None => default_grid(&req.monomer, req.dimer.as_ref())?,
    };
    let result = match &req.dimer {
        None => simulate_monomer(&req.monomer, &req.settings, &grid)?,
        Some(pd) => simulate_dimer(&req.monomer, pd, &req.settings, &grid)?,
    };
    for w in &result.warnings {
        log::warn!("{w}");
    }
    let cost = match &req.reference {
        Some(path) => {
            let r = to_common_grid(&ingest_spectrum(path)?, &grid)?;
            Some(spectral_cost(&r.spectrum, &result.spectrum)?.value())
        }
        None => None,
    };
    if let Some(out) = &req.out {
        let mut meta: Vec<(&str, String)> = MonomerParams::NAMES
            .iter()
            .zip(req.monomer.to_vec())
            .map(|(n, v)| (*n, v.to_string()))
            .collect();
        if let Some(pd) = &req.dimer {
            meta.extend(DimerParams::NAMES.iter().zip(pd.to_vec()).map(|(n, v)| (*n, v.to_string())));
        }
        write(out, &format_spectrum(&result.spectrum, &meta))?;
    }
    Ok(SimulateReport { result, cost })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CheckStatus {
    Ok,
    Warning,
    Failed,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Check {
    pub name: String,
    pub status: CheckStatus,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize, Default)]
pub struct ValidationReport {
    pub checks: Vec<Check>,
}

impl ValidationReport {
    fn push(&mut self, name: &str, status: CheckStatus, detail: impl Into<String>) {
        self.checks.push(Check {
            name: name.to_string(),
            status,
            detail: detail.into(),
        });
    }

    pub fn ok(&self) -> bool {
        self.checks.iter().all(|c| c.status != CheckStatus::Failed)
    }

    pub fn render(&self) -> String {
        let mut s = String::new();
        for c in &self.checks {
            let tag = match c.status {
                CheckStatus::Ok => "ok",
                CheckStatus::Warning => "warning",
                CheckStatus::Failed => "FAILED",
            };
            s.push_str(&format!("{tag:8} {}: {}\n", c.name, c.detail));
        }
        s.push_str(if self.ok() { "ok\n" } else { "validation failed\n" });
        s
    }
}

/// Cost distance between spectra at n_max and n_max + 2 above which the basis
/// is reported as unconverged.
pub const CONVERGENCE_TOL: f64 = 1e-4;

/// Cost between spectra computed at `n_max` and `n_max + 2`.
pub fn basis_convergence(
    pm: &MonomerParams,
    pd: Option<&DimerParams>,
    settings: &SimulationSettings,
    grid: &FrequencyGrid,
) -> Result<f64> {
    let mut wide = *settings;
    wide.basis.n_max += 2;
    wide.basis.max_dim = wide.basis.max_dim.max(wide.basis.dimer_dim());
    let sim = |s: &SimulationSettings| match pd {
        None => simulate_monomer(pm, s, grid),
        Some(d) => simulate_dimer(pm, d, s, grid),
    };
    let a = sim(settings)?;
    let b = sim(&wide)?;
    Ok(spectral_cost(&a.spectrum, &b.spectrum)?.value())
}

/// Corners of the search box that stress the basis: largest Huang–Rhys factor
/// (monomer) or largest |V| (dimer), with the other searched values at the
/// box centre and the narrowest broadening.
fn probe_points(space: &ParameterSpace, stage: Stage) -> Vec<Vec<f64>> {
    let centre: Vec<f64> = space.dims.iter().map(|d| 0.5 * (d.lower + d.upper)).collect();
    let mut p = centre.clone();
    for (i, d) in space.dims.iter().enumerate() {
        match (stage, d.name.as_str()) {
            (Stage::Monomer, "huang_rhys") | (Stage::Dimer, "coupling_v") => p[i] = d.upper,
            (_, "gamma") | (_, "sigma_m") | (_, "sigma_d") => p[i] = d.lower,
            _ => {}
        }
    }
    let mut q = p.clone();
    if let Some(i) = space.index_of("omega_vib") {
        q[i] = space.dims[i].lower;
    }
    let mut v = vec![p];
    if v[0] != q {
        v.push(q);
    }
    v
}

pub fn cmd_validate(config_path: &Path) -> ValidationReport {
    use CheckStatus::{Failed, Warning};
    let mut r = ValidationReport::default();
    let cfg = match RunConfig::load(config_path) {
        Ok(c) => {
            r.push("config", CheckStatus::Ok, format!("parsed {}", config_path.display()));
            c
        }
        Err(e) => {
            r.push("config", Failed, e.to_string());
            return r;
        }
    };
    if let Err(e) = cfg.validate() {
        r.push("schema", Failed, e.to_string());
        return r;
    }
    r.push("schema", CheckStatus::Ok, format!("{:?} stage, budget {}", cfg.stage, cfg.budget));
    let run = match prepare(&cfg) {
        Ok(run) => {
            r.push(
                "spectrum",
                CheckStatus::Ok,
                format!("{} points from {}", run.experimental.len(), cfg.spectrum.display()),
            );
            run
        }
        Err(e) => {
            let name = match e {
                Error::Io { .. } | Error::Parse { .. } | Error::TooFewPoints(_) | Error::NoSupport => "spectrum",
                _ => "setup",
            };
            r.push(name, Failed, e.to_string());
            return r;
        }
    };
    if run.target.outside > 0 {
        r.push(
            "frequency_grid",
            Warning,
            format!("{} grid points outside the measured range", run.target.outside),
        );
    }

    let settings = cfg.simulation.settings();
    for x in probe_points(&run.space, cfg.stage) {
        let full = run.evaluator.full_params(&x);
        let probe = match cfg.stage {
            Stage::Monomer => MonomerParams::from_slice(&full)
                .and_then(|pm| basis_convergence(&pm, None, &settings, &run.grid)),
            Stage::Dimer => DimerParams::from_slice(&full).and_then(|pd| {
                basis_convergence(run.monomer.as_ref().expect("dimer stage"), Some(&pd), &settings, &run.grid)
            }),
        };
        match probe {
            Ok(d) if d <= CONVERGENCE_TOL => r.push(
                "basis",
                CheckStatus::Ok,
                format!("n_max = {}: change {d:.2e} at {x:?}", settings.basis.n_max),
            ),
            Ok(d) => r.push(
                "basis",
                Warning,
                format!(
                    "n_max = {} not converged at {x:?}: cost change {d:.2e} > {CONVERGENCE_TOL:e} when adding 2 levels",
                    settings.basis.n_max
                ),
            ),
            Err(e) => r.push("basis", Warning, format!("probe at {x:?} failed: {e}")),
        }
    }

    let centre: Vec<f64> = run.space.dims.iter().map(|d| 0.5 * (d.lower + d.upper)).collect();
    let t = Instant::now();
    match run.evaluator.evaluate(&centre) {
        Ok(_) => {
            let per = t.elapsed().as_secs_f64();
            r.push(
                "runtime",
                CheckStatus::Ok,
                format!(
                    "{:.3} s per evaluation, about {:.0} s of simulation for the budget",
                    per,
                    per * cfg.budget as f64
                ),
            );
        }
        Err(e) => r.push("runtime", Warning, format!("trial evaluation failed: {e}")),
    }
    r
}
