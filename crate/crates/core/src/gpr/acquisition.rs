//! Proposal of new parameter sets by minimizing f(P, n_sc) = mean(P) − n_sc·std(P).

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::lowdisc::Halton;
use super::model::GprModel;
use super::neldermead::NelderMead;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AcquisitionOptions {
    /// Screening candidates shared by all n_sc values.
    pub pool_size: usize,
    /// Local searches per n_sc, started from the best screening candidates.
    pub starts: usize,
    /// Acquisition evaluations per local search.
    pub local_evals: usize,
    /// Minimum distance (unit cube) between a proposal and any existing input.
    pub min_separation: f64,
}

impl Default for AcquisitionOptions {
    fn default() -> Self {
        AcquisitionOptions {
            pool_size: 1024,
            starts: 32,
            local_evals: 40,
            min_separation: 1e-6,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Proposal {
    pub n_sc: f64,
    pub x: Vec<f64>,
    pub unit: Vec<f64>,
    pub acquisition: f64,
    pub mean: f64,
    pub std: f64,
}

pub fn acquisition(mean: f64, std: f64, n_sc: f64) -> f64 {
    mean - n_sc * std
}

fn far_enough(u: &[f64], others: &[&[f64]], min_sep: f64) -> bool {
    others.iter().all(|o| {
        let d2: f64 = u.iter().zip(o.iter()).map(|(a, b)| (a - b) * (a - b)).sum();
        d2 >= min_sep * min_sep
    })
}

/// One proposal per n_sc value. `avoid` lists extra unit-cube points (e.g.
/// failed evaluations) that proposals must stay away from, like training inputs.
pub fn propose(
    model: &GprModel,
    n_sc_values: &[f64],
    opts: &AcquisitionOptions,
    seed: u64,
    avoid: &[Vec<f64>],
) -> Vec<Proposal> {
    let dim = model.space().dim();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut pool = Halton::scrambled(dim, &mut rng).take_points(opts.pool_size);
    // The best observed inputs are natural starts for exploitation.
    let mut order: Vec<usize> = (0..model.train.len()).collect();
    order.sort_by(|&a, &b| model.train.costs()[a].total_cmp(&model.train.costs()[b]));
    pool.extend(order.iter().take(8).map(|&i| model.train.unit()[i].clone()));
    let pool_pred = model.predict_unit_batch(&pool);

    let lo = vec![0.0; dim];
    let hi = vec![1.0; dim];
    let nm = NelderMead {
        max_evals: opts.local_evals,
        initial_step: 0.05,
        f_tol: 1e-12,
    };
    let mut taken: Vec<Vec<f64>> = Vec::new();
    let mut out = Vec::with_capacity(n_sc_values.len());
    for &n_sc in n_sc_values {
        let f_pool: Vec<f64> = pool_pred.iter().map(|p| acquisition(p.mean, p.std, n_sc)).collect();
        let mut idx: Vec<usize> = (0..pool.len()).collect();
        idx.sort_by(|&a, &b| f_pool[a].total_cmp(&f_pool[b]));

        let f = |u: &[f64]| {
            if n_sc == 0.0 {
                model.predict_mean_unit(u)
            } else {
                let p = model.predict_unit(u);
                acquisition(p.mean, p.std, n_sc)
            }
        };
        let mut candidates: Vec<(Vec<f64>, f64)> = idx
            .iter()
            .take(opts.starts)
            .map(|&i| {
                let r = nm.minimize(f, &pool[i], &lo, &hi);
                (r.x, r.f)
            })
            .collect();
        candidates.sort_by(|a, b| a.1.total_cmp(&b.1));
        // Runner-ups: remaining local optima, then the screening pool.
        candidates.extend(idx.iter().map(|&i| (pool[i].clone(), f_pool[i])));

        let existing: Vec<&[f64]> = model
            .train
            .unit()
            .iter()
            .chain(avoid)
            .chain(&taken)
            .map(|v| v.as_slice())
            .collect();
        let chosen = candidates
            .into_iter()
            .find(|(u, _)| far_enough(u, &existing, opts.min_separation));
        let Some((u, _)) = chosen else {
            continue;
        };
        let p = model.predict_unit(&u);
        out.push(Proposal {
            n_sc,
            x: model.space().from_unit(&u),
            acquisition: acquisition(p.mean, p.std, n_sc),
            mean: p.mean,
            std: p.std,
            unit: u.clone(),
        });
        taken.push(u);
    }
    out
}
