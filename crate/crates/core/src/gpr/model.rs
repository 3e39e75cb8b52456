//! Gaussian-process regression with an anisotropic squared-exponential kernel
//!
//!   k(u, v) = s²·exp(−½ Σ_d (u_d − v_d)²/ℓ_d²) + σ_n²·δ_uv
//!
//! on unit-cube coordinates and a constant prior mean equal to the mean cost.

use std::collections::HashMap;

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use super::lowdisc::Halton;
use super::neldermead::NelderMead;
use super::space::ParameterSpace;
use crate::error::{Error, Result};

/// Smallest admissible observation-noise variance.
pub const NOISE_FLOOR: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq)]
pub struct TrainingSet {
    space: ParameterSpace,
    raw: Vec<Vec<f64>>,
    unit: Vec<Vec<f64>>,
    costs: Vec<f64>,
    index: HashMap<Vec<u64>, usize>,
}

impl TrainingSet {
    pub fn new(space: ParameterSpace) -> Self {
        TrainingSet {
            space,
            raw: Vec::new(),
            unit: Vec::new(),
            costs: Vec::new(),
            index: HashMap::new(),
        }
    }

    pub fn from_points(space: ParameterSpace, points: &[Vec<f64>], costs: &[f64]) -> Result<Self> {
        if points.len() != costs.len() {
            return Err(Error::Training(format!(
                "{} points but {} costs",
                points.len(),
                costs.len()
            )));
        }
        let mut t = TrainingSet::new(space);
        for (x, c) in points.iter().zip(costs) {
            t.push(x, *c)?;
        }
        Ok(t)
    }

    /// Adds a point. Returns `false` when an identical point with the same cost
    /// is already present (nothing is stored).
    pub fn push(&mut self, x: &[f64], cost: f64) -> Result<bool> {
        self.space.check(x)?;
        if !cost.is_finite() {
            return Err(Error::Training(format!("non-finite cost {cost} at {x:?}")));
        }
        let key: Vec<u64> = x.iter().map(|v| v.to_bits()).collect();
        if let Some(&i) = self.index.get(&key) {
            if self.costs[i] == cost {
                return Ok(false);
            }
            return Err(Error::Training(format!(
                "point {x:?} already has cost {} (new cost {cost})",
                self.costs[i]
            )));
        }
        self.index.insert(key, self.raw.len());
        self.raw.push(x.to_vec());
        self.unit.push(self.space.to_unit(x));
        self.costs.push(cost);
        Ok(true)
    }

    pub fn len(&self) -> usize {
        self.costs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.costs.is_empty()
    }

    pub fn space(&self) -> &ParameterSpace {
        &self.space
    }

    pub fn raw(&self) -> &[Vec<f64>] {
        &self.raw
    }

    pub fn unit(&self) -> &[Vec<f64>] {
        &self.unit
    }

    pub fn costs(&self) -> &[f64] {
        &self.costs
    }

    /// Index of the lowest cost.
    pub fn best(&self) -> Option<usize> {
        (0..self.len()).min_by(|&a, &b| self.costs[a].total_cmp(&self.costs[b]))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KernelHyperparams {
    pub signal_variance: f64,
    pub length_scales: Vec<f64>,
    pub noise_variance: f64,
}

impl KernelHyperparams {
    pub fn validate(&self) -> Result<()> {
        let ok = self.signal_variance.is_finite()
            && self.signal_variance >= 0.0
            && self.noise_variance.is_finite()
            && self.noise_variance >= NOISE_FLOOR * (1.0 - 1e-9)
            && self.length_scales.iter().all(|l| l.is_finite() && *l > 0.0);
        if ok {
            Ok(())
        } else {
            Err(Error::Training(format!("invalid kernel hyperparameters {self:?}")))
        }
    }

    fn to_log(&self) -> Vec<f64> {
        let mut v: Vec<f64> = self.length_scales.iter().map(|l| l.ln()).collect();
        v.push(self.signal_variance.ln());
        v.push(self.noise_variance.ln());
        v
    }

    fn from_log(v: &[f64]) -> Self {
        let d = v.len() - 2;
        KernelHyperparams {
            length_scales: v[..d].iter().map(|x| x.exp()).collect(),
            signal_variance: v[d].exp(),
            noise_variance: v[d + 1].exp(),
        }
    }
}

/// Hyperparameter search settings.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct FitOptions {
    pub restarts: usize,
    /// Likelihood evaluations per restart.
    pub evals_per_restart: usize,
    pub length_scale_bounds: (f64, f64),
    pub signal_variance_bounds: (f64, f64),
    pub noise_bounds: (f64, f64),
    /// The likelihood is maximized on an evenly strided subset of at most this
    /// many points; the final model always uses every point.
    pub max_hyper_points: usize,
}

impl Default for FitOptions {
    fn default() -> Self {
        FitOptions {
            restarts: 8,
            evals_per_restart: 120,
            length_scale_bounds: (1e-2, 1e1),
            signal_variance_bounds: (1e-4, 4.0),
            noise_bounds: (NOISE_FLOOR, 1e-2),
            max_hyper_points: 200,
        }
    }
}

impl FitOptions {
    fn log_box(&self, dim: usize) -> (Vec<f64>, Vec<f64>) {
        let mut lo = vec![self.length_scale_bounds.0.ln(); dim];
        let mut hi = vec![self.length_scale_bounds.1.ln(); dim];
        lo.push(self.signal_variance_bounds.0.ln());
        hi.push(self.signal_variance_bounds.1.ln());
        lo.push(self.noise_bounds.0.max(NOISE_FLOOR).ln());
        hi.push(self.noise_bounds.1.max(NOISE_FLOOR).ln());
        (lo, hi)
    }

    pub fn validate(&self) -> Result<()> {
        let ordered = |(a, b): (f64, f64)| a > 0.0 && b.is_finite() && a <= b;
        if self.restarts == 0
            || !ordered(self.length_scale_bounds)
            || !ordered(self.signal_variance_bounds)
            || !ordered(self.noise_bounds)
            || self.max_hyper_points < 2
        {
            return Err(Error::config("gpr.fit", format!("invalid options {self:?}")));
        }
        Ok(())
    }
}

/// Outcome of a hyperparameter search.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitReport {
    pub optimized: bool,
    pub points_used: usize,
    /// Log marginal likelihood at each restart's initial guess.
    pub start_lml: Vec<f64>,
    /// Best log marginal likelihood found (on the points used).
    pub best_lml: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Prediction {
    pub mean: f64,
    /// Posterior standard deviation of the latent function (noise excluded).
    pub std: f64,
}

#[derive(Debug, Clone)]
pub struct GprModel {
    pub train: TrainingSet,
    pub hyper: KernelHyperparams,
    pub prior_mean: f64,
    /// Diagonal jitter added on top of the noise to make the factorization succeed.
    pub jitter: f64,
    pub report: Option<FitReport>,
    l: DMatrix<f64>,
    alpha: DVector<f64>,
    inv_ls2: Vec<f64>,
    log_likelihood: f64,
}

fn sq_dist_scaled(a: &[f64], b: &[f64], inv_ls2: &[f64]) -> f64 {
    a.iter().zip(b).zip(inv_ls2).map(|((x, y), w)| (x - y) * (x - y) * w).sum()
}

fn kernel_matrix(unit: &[&[f64]], h: &KernelHyperparams, extra_diag: f64) -> DMatrix<f64> {
    let n = unit.len();
    let inv: Vec<f64> = h.length_scales.iter().map(|l| 1.0 / (l * l)).collect();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = h.signal_variance + extra_diag;
        for j in 0..i {
            let v = h.signal_variance * (-0.5 * sq_dist_scaled(unit[i], unit[j], &inv)).exp();
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

const JITTERS: [f64; 7] = [0.0, 1e-12, 1e-10, 1e-8, 1e-6, 1e-4, 1e-2];

/// Cholesky factor of K + (noise + jitter)·I, escalating the jitter on failure.
fn factorize(unit: &[&[f64]], h: &KernelHyperparams) -> Result<(DMatrix<f64>, f64)> {
    let scale = h.signal_variance + h.noise_variance;
    for rel in JITTERS {
        let jitter = rel * scale;
        let k = kernel_matrix(unit, h, h.noise_variance + jitter);
        if let Some(c) = k.cholesky() {
            return Ok((c.unpack(), jitter));
        }
    }
    let min_ls = h.length_scales.iter().cloned().fold(f64::INFINITY, f64::min);
    Err(Error::Factorization(format!(
        "n = {}, signal variance = {:.3e}, noise = {:.3e}, shortest length-scale = {:.3e}; \
         still not positive definite with jitter {:.1e}",
        unit.len(),
        h.signal_variance,
        h.noise_variance,
        min_ls,
        JITTERS[JITTERS.len() - 1] * scale
    )))
}

/// (α = K⁻¹ r, log marginal likelihood) from a Cholesky factor.
fn solve_lml(l: &DMatrix<f64>, r: &DVector<f64>) -> (DVector<f64>, f64) {
    let n = r.len();
    let mut z = r.clone();
    l.solve_lower_triangular_mut(&mut z);
    let mut alpha = z.clone();
    l.tr_solve_lower_triangular_mut(&mut alpha);
    let log_det_half: f64 = (0..n).map(|i| l[(i, i)].ln()).sum();
    let lml = -0.5 * z.norm_squared() - log_det_half - 0.5 * n as f64 * (2.0 * std::f64::consts::PI).ln();
    (alpha, lml)
}

fn mean_of(y: &[f64]) -> f64 {
    y.iter().sum::<f64>() / y.len() as f64
}

/// Log marginal likelihood of `y` at `unit` under `h` with prior mean mean(y);
/// −∞ if the kernel cannot be factorized.
pub fn log_marginal_likelihood(unit: &[&[f64]], y: &[f64], h: &KernelHyperparams) -> f64 {
    let m = mean_of(y);
    let r = DVector::from_iterator(y.len(), y.iter().map(|v| v - m));
    match factorize(unit, h) {
        Ok((l, _)) => solve_lml(&l, &r).1,
        Err(_) => f64::NEG_INFINITY,
    }
}

fn default_guess(y: &[f64], dim: usize, opts: &FitOptions) -> KernelHyperparams {
    let m = mean_of(y);
    let var = y.iter().map(|v| (v - m) * (v - m)).sum::<f64>() / y.len() as f64;
    let (ls_lo, ls_hi) = opts.length_scale_bounds;
    let (s_lo, s_hi) = opts.signal_variance_bounds;
    let (n_lo, n_hi) = opts.noise_bounds;
    KernelHyperparams {
        signal_variance: var.clamp(s_lo, s_hi),
        length_scales: vec![0.3f64.clamp(ls_lo, ls_hi); dim],
        noise_variance: 1e-6f64.clamp(n_lo.max(NOISE_FLOOR), n_hi.max(NOISE_FLOOR)),
    }
}

impl GprModel {
    /// Fits hyperparameters by multi-start maximization of the log marginal
    /// likelihood. `warm_start` replaces the first restart's default guess.
    pub fn fit(train: TrainingSet, opts: &FitOptions, warm_start: Option<&KernelHyperparams>) -> Result<Self> {
        opts.validate()?;
        let n = train.len();
        if n < 2 {
            return Err(Error::Training(format!("at least 2 training points are required, got {n}")));
        }
        let dim = train.space().dim();
        let m = n.min(opts.max_hyper_points);
        let subset: Vec<usize> = (0..m).map(|k| k * n / m).collect();
        let unit: Vec<&[f64]> = subset.iter().map(|&i| train.unit()[i].as_slice()).collect();
        let y: Vec<f64> = subset.iter().map(|&i| train.costs()[i]).collect();

        let (lo, hi) = opts.log_box(dim);
        let mut starts = Vec::with_capacity(opts.restarts);
        let first = warm_start.cloned().unwrap_or_else(|| default_guess(&y, dim, opts));
        starts.push(
            first
                .to_log()
                .iter()
                .zip(lo.iter().zip(&hi))
                .map(|(v, (a, b))| v.clamp(*a, *b))
                .collect::<Vec<f64>>(),
        );
        let halton = Halton::new(dim + 2);
        for k in 1..opts.restarts {
            let u = halton.point(k as u64);
            starts.push((0..dim + 2).map(|i| lo[i] + u[i] * (hi[i] - lo[i])).collect());
        }

        let mean = mean_of(&y);
        let r = DVector::from_iterator(m, y.iter().map(|v| v - mean));
        let objective = |theta: &[f64]| -> f64 {
            let h = KernelHyperparams::from_log(theta);
            match factorize(&unit, &h) {
                Ok((l, _)) => -solve_lml(&l, &r).1,
                Err(_) => f64::INFINITY,
            }
        };
        let nm = NelderMead {
            max_evals: opts.evals_per_restart,
            initial_step: 0.15,
            f_tol: 1e-9,
        };
        let mut start_lml = Vec::with_capacity(starts.len());
        let mut best: Option<(Vec<f64>, f64)> = None;
        for s in &starts {
            start_lml.push(-objective(s));
            let res = nm.minimize(objective, s, &lo, &hi);
            if best.as_ref().is_none_or(|b| res.f < b.1) {
                best = Some((res.x, res.f));
            }
        }
        let (theta, f) = best.expect("at least one restart");
        if !f.is_finite() {
            return Err(Error::Factorization(
                "no hyperparameter guess gave a positive-definite kernel".into(),
            ));
        }
        let mut model = Self::with_hyperparams(train, KernelHyperparams::from_log(&theta))?;
        model.report = Some(FitReport {
            optimized: true,
            points_used: m,
            start_lml,
            best_lml: -f,
        });
        Ok(model)
    }

    /// Conditions on the training data with fixed hyperparameters.
    pub fn with_hyperparams(train: TrainingSet, hyper: KernelHyperparams) -> Result<Self> {
        hyper.validate()?;
        let n = train.len();
        if n == 0 {
            return Err(Error::Training("empty training set".into()));
        }
        if hyper.length_scales.len() != train.space().dim() {
            return Err(Error::Training(format!(
                "{} length-scales for a {}-dimensional space",
                hyper.length_scales.len(),
                train.space().dim()
            )));
        }
        let unit: Vec<&[f64]> = train.unit().iter().map(|u| u.as_slice()).collect();
        let (l, jitter) = factorize(&unit, &hyper)?;
        let prior_mean = mean_of(train.costs());
        let r = DVector::from_iterator(n, train.costs().iter().map(|v| v - prior_mean));
        let (alpha, lml) = solve_lml(&l, &r);
        let inv_ls2 = hyper.length_scales.iter().map(|l| 1.0 / (l * l)).collect();
        Ok(GprModel {
            train,
            hyper,
            prior_mean,
            jitter,
            report: None,
            l,
            alpha,
            inv_ls2,
            log_likelihood: lml,
        })
    }

    pub fn space(&self) -> &ParameterSpace {
        self.train.space()
    }

    /// Log marginal likelihood of all training data under the stored hyperparameters.
    pub fn log_marginal_likelihood(&self) -> f64 {
        self.log_likelihood
    }

    fn cross_kernel(&self, u: &[f64]) -> DVector<f64> {
        let s2 = self.hyper.signal_variance;
        DVector::from_iterator(
            self.train.len(),
            self.train
                .unit()
                .iter()
                .map(|t| s2 * (-0.5 * sq_dist_scaled(u, t, &self.inv_ls2)).exp()),
        )
    }

    /// Prediction at a point given in unit-cube coordinates.
    pub fn predict_unit(&self, u: &[f64]) -> Prediction {
        let mut k = self.cross_kernel(u);
        let mean = self.prior_mean + k.dot(&self.alpha);
        self.l.solve_lower_triangular_mut(&mut k);
        let var = (self.hyper.signal_variance - k.norm_squared()).max(0.0);
        Prediction { mean, std: var.sqrt() }
    }

    /// Posterior mean only; O(n·D).
    pub fn predict_mean_unit(&self, u: &[f64]) -> f64 {
        self.prior_mean + self.cross_kernel(u).dot(&self.alpha)
    }

    /// Batched [`GprModel::predict_unit`].
    pub fn predict_unit_batch(&self, points: &[Vec<f64>]) -> Vec<Prediction> {
        const CHUNK: usize = 256;
        let mut out = Vec::with_capacity(points.len());
        for chunk in points.chunks(CHUNK) {
            let mut ks = DMatrix::zeros(self.train.len(), chunk.len());
            for (j, u) in chunk.iter().enumerate() {
                ks.set_column(j, &self.cross_kernel(u));
            }
            let means = ks.tr_mul(&self.alpha);
            self.l.solve_lower_triangular_mut(&mut ks);
            for j in 0..chunk.len() {
                let var = (self.hyper.signal_variance - ks.column(j).norm_squared()).max(0.0);
                out.push(Prediction {
                    mean: self.prior_mean + means[j],
                    std: var.sqrt(),
                });
            }
        }
        out
    }

    /// Prediction at a point in raw parameter coordinates.
    pub fn predict(&self, x: &[f64]) -> Result<Prediction> {
        self.space().check(x)?;
        Ok(self.predict_unit(&self.space().to_unit(x)))
    }
}
