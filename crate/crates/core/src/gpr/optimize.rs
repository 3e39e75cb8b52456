//! Surrogate-driven optimization loop: space-filling start, then
//! {fit, propose one point per n_sc, evaluate} until the budget is spent.

use std::fmt::Write as _;
use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::acquisition::{propose, AcquisitionOptions};
use super::lowdisc::Halton;
use super::model::{FitOptions, GprModel, KernelHyperparams, TrainingSet};
use super::space::ParameterSpace;
use crate::error::{Error, Result};

/// A cost function over raw parameter vectors.
pub trait Evaluator: Sync {
    fn evaluate(&self, x: &[f64]) -> Result<f64>;

    /// Stable description used to key caches of evaluations.
    fn identity(&self) -> String {
        "anonymous".to_string()
    }
}

impl<F> Evaluator for F
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    fn evaluate(&self, x: &[f64]) -> Result<f64> {
        self(x)
    }
}

/// When to re-optimize kernel hyperparameters.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct HyperSchedule {
    /// Re-optimize at every iteration while fewer points than this are known.
    pub always_below: usize,
    /// Afterwards, re-optimize every `period` iterations and reuse the last
    /// hyperparameters in between.
    pub period: usize,
}

impl Default for HyperSchedule {
    fn default() -> Self {
        HyperSchedule {
            always_below: 100,
            period: 5,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct OptimizeConfig {
    pub budget: usize,
    pub n_sc: Vec<f64>,
    pub seed: u64,
    /// Size of the initial space-filling batch; 2·D + 2 when absent.
    pub initial_points: Option<usize>,
    pub fit: FitOptions,
    pub acquisition: AcquisitionOptions,
    pub hyper_schedule: HyperSchedule,
}

impl Default for OptimizeConfig {
    fn default() -> Self {
        OptimizeConfig {
            budget: 1000,
            n_sc: vec![0.0, 1.0, 2.0, 3.0],
            seed: 0,
            initial_points: None,
            fit: FitOptions::default(),
            acquisition: AcquisitionOptions::default(),
            hyper_schedule: HyperSchedule::default(),
        }
    }
}

impl OptimizeConfig {
    pub fn initial_count(&self, dim: usize) -> usize {
        self.initial_points.unwrap_or(2 * dim + 2)
    }

    pub fn validate(&self, dim: usize) -> Result<()> {
        let init = self.initial_count(dim);
        if init < 2 {
            return Err(Error::config("initial_points", "at least 2 initial points are required"));
        }
        if self.budget < init {
            return Err(Error::config(
                "budget",
                format!("budget {} is smaller than the initial design of {init} points", self.budget),
            ));
        }
        if self.n_sc.is_empty() || self.n_sc.iter().any(|v| !v.is_finite()) {
            return Err(Error::config("n_sc", "need at least one finite value"));
        }
        if self.hyper_schedule.period == 0 {
            return Err(Error::config("hyper_schedule.period", "must be >= 1"));
        }
        self.fit.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind", content = "n_sc")]
pub enum Source {
    Initial,
    Acquisition(f64),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistoryRecord {
    pub index: usize,
    pub iteration: usize,
    pub source: Source,
    pub x: Vec<f64>,
    pub cost: Option<f64>,
    pub error: Option<String>,
    /// Wall time of the evaluation in seconds; exported separately from the
    /// deterministic history table.
    pub wall_time: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HyperTraceEntry {
    pub iteration: usize,
    pub n_train: usize,
    pub optimized: bool,
    pub hyper: KernelHyperparams,
    pub log_marginal_likelihood: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct History {
    pub names: Vec<String>,
    pub records: Vec<HistoryRecord>,
}

impl History {
    pub fn successful(&self) -> impl Iterator<Item = (&[f64], f64)> {
        self.records.iter().filter_map(|r| r.cost.map(|c| (r.x.as_slice(), c)))
    }

    /// Training set built from the first `n` records.
    pub fn training_prefix(&self, space: &ParameterSpace, n: usize) -> Result<TrainingSet> {
        let mut t = TrainingSet::new(space.clone());
        for r in self.records.iter().take(n) {
            if let Some(c) = r.cost {
                t.push(&r.x, c)?;
            }
        }
        Ok(t)
    }

    pub fn best(&self) -> Option<&HistoryRecord> {
        self.records
            .iter()
            .filter(|r| r.cost.is_some())
            .min_by(|a, b| a.cost.unwrap().total_cmp(&b.cost.unwrap()))
    }

    /// Tab-separated table; deterministic for a given run.
    pub fn to_tsv(&self) -> String {
        let mut s = String::from("index\titeration\tsource\tn_sc");
        for n in &self.names {
            s.push('\t');
            s.push_str(n);
        }
        s.push_str("\tcost\tstatus\n");
        for r in &self.records {
            let (src, nsc) = match r.source {
                Source::Initial => ("initial", String::from("-")),
                Source::Acquisition(v) => ("acquisition", format!("{v}")),
            };
            let _ = write!(s, "{}\t{}\t{src}\t{nsc}", r.index, r.iteration);
            for v in &r.x {
                let _ = write!(s, "\t{v}");
            }
            match (&r.cost, &r.error) {
                (Some(c), _) => {
                    let _ = writeln!(s, "\t{c}\tok");
                }
                (None, e) => {
                    let msg = e.as_deref().unwrap_or("failed").replace(['\t', '\n'], " ");
                    let _ = writeln!(s, "\tnan\terror: {msg}");
                }
            }
        }
        s
    }

    /// Parses [`History::to_tsv`] output. Wall times are not part of the table and read as 0.
    pub fn from_tsv(text: &str) -> Result<Self> {
        let bad = |line: usize, reason: String| Error::Parse {
            source_name: "history".into(),
            line,
            reason,
        };
        let mut lines = text.lines().enumerate();
        let (_, header) = lines.next().ok_or_else(|| bad(1, "empty history".into()))?;
        let cols: Vec<&str> = header.split('\t').collect();
        if cols.len() < 7 || cols[..4] != ["index", "iteration", "source", "n_sc"] || cols[cols.len() - 2..] != ["cost", "status"] {
            return Err(bad(1, "unexpected header".into()));
        }
        let names: Vec<String> = cols[4..cols.len() - 2].iter().map(|s| s.to_string()).collect();
        let mut records = Vec::new();
        for (i, line) in lines {
            let f: Vec<&str> = line.splitn(cols.len(), '\t').collect();
            if f.len() != cols.len() {
                return Err(bad(i + 1, format!("expected {} columns", cols.len())));
            }
            let num = |s: &str| s.parse::<f64>().map_err(|_| bad(i + 1, format!("not a number: {s:?}")));
            let int = |s: &str| s.parse::<usize>().map_err(|_| bad(i + 1, format!("not an integer: {s:?}")));
            let source = match f[2] {
                "initial" => Source::Initial,
                "acquisition" => Source::Acquisition(num(f[3])?),
                other => return Err(bad(i + 1, format!("unknown source {other:?}"))),
            };
            let x = f[4..4 + names.len()].iter().map(|s| num(s)).collect::<Result<Vec<f64>>>()?;
            let status = f[cols.len() - 1];
            let (cost, error) = if status == "ok" {
                (Some(num(f[cols.len() - 2])?), None)
            } else {
                (None, Some(status.trim_start_matches("error: ").to_string()))
            };
            records.push(HistoryRecord {
                index: int(f[0])?,
                iteration: int(f[1])?,
                source,
                x,
                cost,
                error,
                wall_time: 0.0,
            });
        }
        Ok(History { names, records })
    }

    pub fn timing_tsv(&self) -> String {
        let mut s = String::from("index\twall_time_s\n");
        for r in &self.records {
            let _ = writeln!(s, "{}\t{:.6}", r.index, r.wall_time);
        }
        s
    }
}

/// Passed to the observer after each iteration's evaluations.
pub struct IterationInfo<'a> {
    pub iteration: usize,
    pub evaluated: usize,
    pub best_cost: f64,
    pub best_x: &'a [f64],
    /// Model fitted before this iteration's proposals (absent for the initial batch).
    pub model: Option<&'a GprModel>,
}

#[derive(Debug, Clone)]
pub struct OptimizeResult {
    pub best_x: Vec<f64>,
    pub best_cost: f64,
    pub model: GprModel,
    pub history: History,
    pub hyper_trace: Vec<HyperTraceEntry>,
}

fn evaluate_batch<E: Evaluator + ?Sized>(eval: &E, points: &[Vec<f64>]) -> Vec<(Result<f64>, f64)> {
    points
        .par_iter()
        .map(|x| {
            let t = Instant::now();
            let r = eval.evaluate(x).and_then(|c| {
                if c.is_finite() {
                    Ok(c)
                } else {
                    Err(Error::Propagation(format!("non-finite cost {c}")))
                }
            });
            (r, t.elapsed().as_secs_f64())
        })
        .collect()
}

pub fn optimize<E: Evaluator + ?Sized>(
    eval: &E,
    space: &ParameterSpace,
    cfg: &OptimizeConfig,
    mut observer: impl FnMut(&IterationInfo),
) -> Result<OptimizeResult> {
    let dim = space.dim();
    cfg.validate(dim)?;
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut history = History {
        names: space.names().iter().map(|s| s.to_string()).collect(),
        records: Vec::with_capacity(cfg.budget),
    };
    let mut train = TrainingSet::new(space.clone());
    let mut failed: Vec<Vec<f64>> = Vec::new();

    let record = |history: &mut History,
                      train: &mut TrainingSet,
                      failed: &mut Vec<Vec<f64>>,
                      iteration: usize,
                      points: Vec<(Vec<f64>, Source)>,
                      results: Vec<(Result<f64>, f64)>|
     -> Result<()> {
        for ((x, source), (res, wall)) in points.into_iter().zip(results) {
            let (cost, error) = match res {
                Ok(c) => {
                    train.push(&x, c)?;
                    (Some(c), None)
                }
                Err(e) => {
                    log::warn!("evaluation {} at {x:?} failed: {e}", history.records.len());
                    failed.push(space.to_unit(&x));
                    (None, Some(e.to_string()))
                }
            };
            history.records.push(HistoryRecord {
                index: history.records.len(),
                iteration,
                source,
                x,
                cost,
                error,
                wall_time: wall,
            });
        }
        Ok(())
    };

    let init: Vec<Vec<f64>> = Halton::scrambled(dim, &mut rng)
        .take_points(cfg.initial_count(dim))
        .iter()
        .map(|u| space.from_unit(u))
        .collect();
    let results = evaluate_batch(eval, &init);
    let points = init.into_iter().map(|x| (x, Source::Initial)).collect();
    record(&mut history, &mut train, &mut failed, 0, points, results)?;
    if let Some(b) = history.best() {
        observer(&IterationInfo {
            iteration: 0,
            evaluated: history.records.len(),
            best_cost: b.cost.unwrap(),
            best_x: &b.x,
            model: None,
        });
    }

    let mut hyper_trace = Vec::new();
    let mut last_hyper: Option<KernelHyperparams> = None;
    let mut iteration = 0;
    let mut last_model: Option<GprModel> = None;
    while history.records.len() < cfg.budget {
        iteration += 1;
        if train.len() < 2 {
            return Err(Error::Training(format!(
                "only {} successful evaluations after {} attempts",
                train.len(),
                history.records.len()
            )));
        }
        let reoptimize = last_hyper.is_none()
            || train.len() < cfg.hyper_schedule.always_below
            || iteration % cfg.hyper_schedule.period == 0;
        let model = if reoptimize {
            GprModel::fit(train.clone(), &cfg.fit, last_hyper.as_ref())?
        } else {
            GprModel::with_hyperparams(train.clone(), last_hyper.clone().expect("checked"))?
        };
        hyper_trace.push(HyperTraceEntry {
            iteration,
            n_train: train.len(),
            optimized: reoptimize,
            hyper: model.hyper.clone(),
            log_marginal_likelihood: model.log_marginal_likelihood(),
        });
        last_hyper = Some(model.hyper.clone());

        let remaining = cfg.budget - history.records.len();
        let n_sc: Vec<f64> = cfg.n_sc.iter().take(remaining).cloned().collect();
        let proposals = propose(&model, &n_sc, &cfg.acquisition, rng.random(), &failed);
        if proposals.is_empty() {
            log::warn!("no admissible proposals at iteration {iteration}; stopping early");
            last_model = Some(model);
            break;
        }
        let xs: Vec<Vec<f64>> = proposals.iter().map(|p| p.x.clone()).collect();
        let results = evaluate_batch(eval, &xs);
        let points = proposals.into_iter().map(|p| (p.x, Source::Acquisition(p.n_sc))).collect();
        record(&mut history, &mut train, &mut failed, iteration, points, results)?;

        let b = history.best().expect("training set is nonempty");
        observer(&IterationInfo {
            iteration,
            evaluated: history.records.len(),
            best_cost: b.cost.unwrap(),
            best_x: &b.x,
            model: Some(&model),
        });
        last_model = Some(model);
    }

    let model = match last_model {
        Some(m) if m.train.len() == train.len() => m,
        _ => {
            let m = GprModel::fit(train.clone(), &cfg.fit, last_hyper.as_ref())?;
            hyper_trace.push(HyperTraceEntry {
                iteration: iteration + 1,
                n_train: train.len(),
                optimized: true,
                hyper: m.hyper.clone(),
                log_marginal_likelihood: m.log_marginal_likelihood(),
            });
            m
        }
    };
    let best = history
        .best()
        .ok_or_else(|| Error::Training("no successful evaluation".into()))?;
    Ok(OptimizeResult {
        best_x: best.x.clone(),
        best_cost: best.cost.unwrap(),
        model,
        history,
        hyper_trace,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpr::space::Dimension;

    fn square() -> ParameterSpace {
        ParameterSpace::new(vec![Dimension::new("a", 0.0, 1.0, ""), Dimension::new("b", 0.0, 1.0, "")]).unwrap()
    }

    fn bowl(x: &[f64]) -> Result<f64> {
        Ok((x[0] - 0.3).powi(2) + (x[1] - 0.7).powi(2))
    }

    #[test]
    fn budget_equal_to_initial_batch() {
        let cfg = OptimizeConfig {
            budget: 6,
            ..Default::default()
        };
        let r = optimize(&bowl, &square(), &cfg, |_| {}).unwrap();
        assert_eq!(r.history.records.len(), 6);
        assert!(r.history.records.iter().all(|h| h.source == Source::Initial));
        let best = r.history.records.iter().filter_map(|h| h.cost).fold(f64::INFINITY, f64::min);
        assert_eq!(r.best_cost, best);
    }

    #[test]
    fn budget_below_initial_is_rejected() {
        let cfg = OptimizeConfig {
            budget: 3,
            ..Default::default()
        };
        assert!(matches!(optimize(&bowl, &square(), &cfg, |_| {}), Err(Error::Config { .. })));
    }

    #[test]
    fn failures_are_recorded_and_counted() {
        let flaky = |x: &[f64]| -> Result<f64> {
            if x[0] > 0.8 {
                Err(Error::Propagation("synthetic failure".into()))
            } else {
                bowl(x)
            }
        };
        let cfg = OptimizeConfig {
            budget: 30,
            seed: 4,
            ..Default::default()
        };
        let r = optimize(&flaky, &square(), &cfg, |_| {}).unwrap();
        assert_eq!(r.history.records.len(), 30);
        let fails = r.history.records.iter().filter(|h| h.cost.is_none()).count();
        assert_eq!(r.model.train.len(), 30 - fails);
        assert!(r.history.to_tsv().contains("error: propagation failed"));
    }

    #[test]
    fn deterministic_history() {
        let cfg = OptimizeConfig {
            budget: 26,
            seed: 11,
            ..Default::default()
        };
        let a = optimize(&bowl, &square(), &cfg, |_| {}).unwrap();
        let b = optimize(&bowl, &square(), &cfg, |_| {}).unwrap();
        assert_eq!(a.history.to_tsv(), b.history.to_tsv());
        let back = History::from_tsv(&a.history.to_tsv()).unwrap();
        assert_eq!(back.to_tsv(), a.history.to_tsv());
        assert_eq!(back.records[7].x, a.history.records[7].x);
    }
}
