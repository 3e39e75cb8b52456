//! Cost landscapes on dense parameter grids: surrogate predictions, exact
//! evaluations (with an on-disk cache), consistency regions and the grid
//! metrics E^C (mean |exact − surrogate|) and Δ^GPR (mean predicted std).

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs::OpenOptions;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::cost::CostThresholds;
use crate::error::{Error, Result};
use crate::gpr::{Evaluator, GprModel, ParameterSpace};

/// Points per scanned dimension for surrogate grids.
pub const SURROGATE_POINTS: usize = 25;
/// Points per scanned dimension for exact grids.
pub const EXACT_POINTS: usize = 11;
/// Largest exact grid evaluated without an explicit override.
pub const EXACT_NODE_CAP: usize = 200_000;
pub const SURROGATE_NODE_CAP: usize = 2_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Axis {
    Scan { lo: f64, hi: f64, n: usize },
    Fixed(f64),
}

impl Axis {
    pub fn len(&self) -> usize {
        match self {
            Axis::Scan { n, .. } => *n,
            Axis::Fixed(_) => 1,
        }
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn value(&self, i: usize) -> f64 {
        match *self {
            Axis::Scan { lo, hi, n } => lo + (hi - lo) * i as f64 / (n - 1) as f64,
            Axis::Fixed(v) => v,
        }
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len()).map(|i| self.value(i)).collect()
    }
}

/// Rectangular grid over a parameter space; nodes are ordered row-major with the
/// last axis varying fastest.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GridSpec {
    pub names: Vec<String>,
    pub axes: Vec<Axis>,
}

impl GridSpec {
    pub fn new(names: Vec<String>, axes: Vec<Axis>) -> Result<Self> {
        if names.len() != axes.len() {
            return Err(Error::config("grid", "one axis per parameter is required"));
        }
        for (name, a) in names.iter().zip(&axes) {
            match *a {
                Axis::Scan { lo, hi, n } => {
                    if n < 2 || !(lo.is_finite() && hi.is_finite() && lo < hi) {
                        return Err(Error::config(
                            format!("grid.{name}"),
                            format!("scan needs n >= 2 and lo < hi, got [{lo}, {hi}] x {n}"),
                        ));
                    }
                }
                Axis::Fixed(v) => {
                    if !v.is_finite() {
                        return Err(Error::config(format!("grid.{name}"), "fixed value must be finite"));
                    }
                }
            }
        }
        Ok(GridSpec { names, axes })
    }

    /// Every dimension scanned over its full bounds.
    pub fn full(space: &ParameterSpace, n: usize) -> Result<Self> {
        let axes = space
            .dims
            .iter()
            .map(|d| Axis::Scan {
                lo: d.lower,
                hi: d.upper,
                n,
            })
            .collect();
        Self::new(space.names().iter().map(|s| s.to_string()).collect(), axes)
    }

    /// Scans the named dimensions over their bounds; the rest are fixed at `point`.
    pub fn cut(space: &ParameterSpace, point: &[f64], scanned: &[&str], n: usize) -> Result<Self> {
        for s in scanned {
            if space.index_of(s).is_none() {
                return Err(Error::config("grid.scan", format!("unknown parameter {s:?}")));
            }
        }
        let axes = space
            .dims
            .iter()
            .zip(point)
            .map(|(d, &v)| {
                if scanned.contains(&d.name.as_str()) {
                    Axis::Scan {
                        lo: d.lower,
                        hi: d.upper,
                        n,
                    }
                } else {
                    Axis::Fixed(v)
                }
            })
            .collect();
        Self::new(space.names().iter().map(|s| s.to_string()).collect(), axes)
    }

    pub fn check_within(&self, space: &ParameterSpace) -> Result<()> {
        if self.names.len() != space.dim() || self.names.iter().zip(space.names()).any(|(a, b)| a != b) {
            return Err(Error::GridMismatch(format!(
                "grid axes {:?} do not match parameters {:?}",
                self.names,
                space.names()
            )));
        }
        for (a, d) in self.axes.iter().zip(&space.dims) {
            let (lo, hi) = match *a {
                Axis::Scan { lo, hi, .. } => (lo, hi),
                Axis::Fixed(v) => (v, v),
            };
            let slack = 1e-12 * d.width();
            if lo < d.lower - slack || hi > d.upper + slack {
                return Err(Error::OutOfBounds(format!(
                    "grid axis {} [{lo}, {hi}] outside [{}, {}]",
                    d.name, d.lower, d.upper
                )));
            }
        }
        Ok(())
    }

    pub fn len(&self) -> usize {
        self.axes.iter().map(Axis::len).product()
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn scanned(&self) -> Vec<usize> {
        (0..self.axes.len())
            .filter(|&i| matches!(self.axes[i], Axis::Scan { .. }))
            .collect()
    }

    /// Per-axis indices of node `k`.
    pub fn multi_index(&self, mut k: usize) -> Vec<usize> {
        let mut idx = vec![0; self.axes.len()];
        for (d, a) in self.axes.iter().enumerate().rev() {
            idx[d] = k % a.len();
            k /= a.len();
        }
        idx
    }

    pub fn flat_index(&self, idx: &[usize]) -> usize {
        idx.iter().zip(&self.axes).fold(0, |acc, (i, a)| acc * a.len() + i)
    }

    pub fn node(&self, k: usize) -> Vec<f64> {
        self.multi_index(k)
            .iter()
            .zip(&self.axes)
            .map(|(&i, a)| a.value(i))
            .collect()
    }

    pub fn nodes(&self) -> Vec<Vec<f64>> {
        (0..self.len()).map(|k| self.node(k)).collect()
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelMask {
    pub threshold: f64,
    pub mask: Vec<bool>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Landscape {
    pub grid: GridSpec,
    /// Surrogate mean, or the exact cost for exact landscapes (NaN where missing).
    pub mean: Vec<f64>,
    pub uncertainty: Vec<f64>,
    pub exact: Option<Vec<f64>>,
    pub masks: Vec<LevelMask>,
}

impl Landscape {
    fn assemble(grid: GridSpec, mean: Vec<f64>, uncertainty: Vec<f64>, exact: Option<Vec<f64>>, thresholds: &CostThresholds) -> Self {
        let masks = thresholds
            .as_array()
            .iter()
            .map(|&t| LevelMask {
                threshold: t,
                mask: mean.iter().map(|&c| c <= t).collect(),
            })
            .collect();
        Landscape {
            grid,
            mean,
            uncertainty,
            exact,
            masks,
        }
    }

    /// Exact values when present, surrogate means otherwise.
    pub fn values(&self) -> &[f64] {
        self.exact.as_deref().unwrap_or(&self.mean)
    }

    pub fn len(&self) -> usize {
        self.mean.len()
    }

    pub fn is_empty(&self) -> bool {
        self.mean.is_empty()
    }

    /// Node with the lowest finite mean.
    pub fn argmin(&self) -> Option<usize> {
        (0..self.len())
            .filter(|&k| self.mean[k].is_finite())
            .min_by(|&a, &b| self.mean[a].total_cmp(&self.mean[b]))
    }

    /// Tab-separated rows: scanned coordinates, mean, uncertainty, exact, mask flags.
    pub fn to_tsv(&self) -> String {
        let scanned = self.grid.scanned();
        let mut s = String::new();
        for (i, &d) in scanned.iter().enumerate() {
            if i > 0 {
                s.push('\t');
            }
            s.push_str(&self.grid.names[d]);
        }
        s.push_str("\tmean\tuncertainty\texact");
        for m in &self.masks {
            let _ = write!(s, "\tbelow_{}", m.threshold);
        }
        s.push('\n');
        for k in 0..self.len() {
            let node = self.grid.node(k);
            for (i, &d) in scanned.iter().enumerate() {
                if i > 0 {
                    s.push('\t');
                }
                let _ = write!(s, "{}", node[d]);
            }
            let exact = self.exact.as_ref().map(|e| format!("{}", e[k])).unwrap_or_else(|| "-".into());
            let _ = write!(s, "\t{}\t{}\t{exact}", self.mean[k], self.uncertainty[k]);
            for m in &self.masks {
                let _ = write!(s, "\t{}", m.mask[k] as u8);
            }
            s.push('\n');
        }
        s
    }
}

pub fn surrogate_grid(model: &GprModel, grid: &GridSpec, thresholds: &CostThresholds, cap: usize) -> Result<Landscape> {
    grid.check_within(model.space())?;
    let n = grid.len();
    if n > cap {
        return Err(Error::GridTooLarge { nodes: n, cap });
    }
    const CHUNK: usize = 1024;
    let preds: Vec<_> = (0..n)
        .collect::<Vec<_>>()
        .par_chunks(CHUNK)
        .flat_map_iter(|ks| {
            let unit: Vec<Vec<f64>> = ks.iter().map(|&k| model.space().to_unit(&grid.node(k))).collect();
            model.predict_unit_batch(&unit)
        })
        .collect();
    let mean = preds.iter().map(|p| p.mean).collect();
    let std = preds.iter().map(|p| p.std).collect();
    Ok(Landscape::assemble(grid.clone(), mean, std, None, thresholds))
}

/// Append-only record file of `key<TAB>cost` lines.
pub struct ExactCache {
    path: PathBuf,
    entries: HashMap<String, f64>,
}

impl ExactCache {
    pub fn open(path: &Path) -> Result<Self> {
        let mut entries = HashMap::new();
        if path.exists() {
            let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
            for line in text.lines() {
                if let Some((k, v)) = line.split_once('\t') {
                    if let Ok(c) = v.trim().parse::<f64>() {
                        entries.insert(k.to_string(), c);
                    }
                }
            }
        }
        Ok(ExactCache {
            path: path.to_path_buf(),
            entries,
        })
    }

    pub fn key(identity: &str, x: &[f64]) -> String {
        let mut h = Sha256::new();
        h.update(identity.as_bytes());
        for v in x {
            h.update(v.to_bits().to_le_bytes());
        }
        hex::encode(h.finalize())
    }

    pub fn get(&self, key: &str) -> Option<f64> {
        self.entries.get(key).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    fn append(&mut self, new: &[(String, f64)]) -> Result<()> {
        if new.is_empty() {
            return Ok(());
        }
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&self.path)
            .map_err(|e| Error::io(&self.path, e))?;
        let mut buf = String::new();
        for (k, c) in new {
            let _ = writeln!(buf, "{k}\t{c}");
        }
        f.write_all(buf.as_bytes()).map_err(|e| Error::io(&self.path, e))?;
        for (k, c) in new {
            self.entries.insert(k.clone(), *c);
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct ExactStats {
    pub evaluated: usize,
    pub cached: usize,
    pub failed: usize,
}

/// Runs the evaluator at every node not already in `cache`. Failed nodes are NaN.
pub fn exact_grid<E: Evaluator + ?Sized>(
    eval: &E,
    space: &ParameterSpace,
    grid: &GridSpec,
    thresholds: &CostThresholds,
    cap: usize,
    mut cache: Option<&mut ExactCache>,
) -> Result<(Landscape, ExactStats)> {
    grid.check_within(space)?;
    let n = grid.len();
    if n > cap {
        return Err(Error::GridTooLarge { nodes: n, cap });
    }
    let identity = eval.identity();
    let nodes = grid.nodes();
    let keys: Vec<String> = nodes.iter().map(|x| ExactCache::key(&identity, x)).collect();
    let mut values = vec![f64::NAN; n];
    let mut todo = Vec::new();
    let mut stats = ExactStats::default();
    for k in 0..n {
        match cache.as_ref().and_then(|c| c.get(&keys[k])) {
            Some(v) => {
                values[k] = v;
                stats.cached += 1;
            }
            None => todo.push(k),
        }
    }
    let results: Vec<(usize, Result<f64>)> = todo.par_iter().map(|&k| (k, eval.evaluate(&nodes[k]))).collect();
    let mut fresh = Vec::new();
    for (k, r) in results {
        stats.evaluated += 1;
        match r {
            Ok(c) if c.is_finite() => {
                values[k] = c;
                fresh.push((keys[k].clone(), c));
            }
            Ok(c) => {
                log::warn!("grid node {:?}: non-finite cost {c}", nodes[k]);
                stats.failed += 1;
            }
            Err(e) => {
                log::warn!("grid node {:?}: {e}", nodes[k]);
                stats.failed += 1;
            }
        }
    }
    if let Some(c) = cache.as_mut() {
        c.append(&fresh)?;
    }
    let l = Landscape::assemble(grid.clone(), values.clone(), vec![0.0; n], Some(values), thresholds);
    Ok((l, stats))
}

/// E^C: mean |a − b| over nodes where both landscapes have finite values
/// (exact values where present, surrogate means otherwise).
pub fn error_metric(a: &Landscape, b: &Landscape) -> Result<f64> {
    if a.grid != b.grid {
        return Err(Error::GridMismatch("landscapes are on different grids".into()));
    }
    let (mut sum, mut count) = (0.0, 0usize);
    for (x, y) in a.values().iter().zip(b.values()) {
        if x.is_finite() && y.is_finite() {
            sum += (x - y).abs();
            count += 1;
        }
    }
    if count == 0 {
        return Err(Error::GridMismatch("no node has values in both landscapes".into()));
    }
    Ok(sum / count as f64)
}

/// Δ^GPR: mean predicted standard deviation.
pub fn uncertainty_metric(l: &Landscape) -> f64 {
    if l.uncertainty.is_empty() {
        return 0.0;
    }
    l.uncertainty.iter().sum::<f64>() / l.uncertainty.len() as f64
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub threshold: f64,
    pub mask: Vec<bool>,
    pub count: usize,
    /// (name, min, max) per parameter; empty when no node qualifies.
    pub extents: Vec<(String, f64, f64)>,
}

impl Region {
    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn extent(&self, name: &str) -> Option<(f64, f64)> {
        self.extents.iter().find(|e| e.0 == name).map(|e| (e.1, e.2))
    }
}

/// Nodes with mean cost ≤ threshold and their axis-aligned bounding box.
pub fn consistency_region(l: &Landscape, threshold: f64) -> Result<Region> {
    if !(threshold > 0.0 && threshold <= 2.0) {
        return Err(Error::param("threshold", format!("must be in (0, 2], got {threshold}")));
    }
    consistency_region_where(l, threshold, |_| true)
}

/// As [`consistency_region`], restricted to nodes accepted by `filter`.
pub fn consistency_region_where(l: &Landscape, threshold: f64, filter: impl Fn(&[f64]) -> bool) -> Result<Region> {
    let d = l.grid.axes.len();
    let mut lo = vec![f64::INFINITY; d];
    let mut hi = vec![f64::NEG_INFINITY; d];
    let mut mask = vec![false; l.len()];
    let mut count = 0;
    for (k, m) in mask.iter_mut().enumerate() {
        if !(l.mean[k] <= threshold) {
            continue;
        }
        let x = l.grid.node(k);
        if !filter(&x) {
            continue;
        }
        *m = true;
        count += 1;
        for i in 0..d {
            lo[i] = lo[i].min(x[i]);
            hi[i] = hi[i].max(x[i]);
        }
    }
    let extents = if count == 0 {
        Vec::new()
    } else {
        (0..d).map(|i| (l.grid.names[i].clone(), lo[i], hi[i])).collect()
    };
    Ok(Region {
        threshold,
        mask,
        count,
        extents,
    })
}

/// Sub-landscape with the named scanned axes pinned to grid indices.
pub fn slice(l: &Landscape, pinned: &[(&str, usize)]) -> Result<Landscape> {
    let mut axes = l.grid.axes.clone();
    for (name, i) in pinned {
        let d = l
            .grid
            .names
            .iter()
            .position(|n| n == name)
            .ok_or_else(|| Error::GridMismatch(format!("no axis {name:?}")))?;
        if *i >= axes[d].len() {
            return Err(Error::GridMismatch(format!("index {i} outside axis {name:?}")));
        }
        axes[d] = Axis::Fixed(l.grid.axes[d].value(*i));
    }
    let sub = GridSpec::new(l.grid.names.clone(), axes)?;
    let pick: Vec<usize> = (0..sub.len())
        .map(|k| {
            let mut idx = sub.multi_index(k);
            for (name, i) in pinned {
                let d = l.grid.names.iter().position(|n| n == name).expect("checked");
                idx[d] = *i;
            }
            l.grid.flat_index(&idx)
        })
        .collect();
    let take = |v: &[f64]| pick.iter().map(|&k| v[k]).collect::<Vec<f64>>();
    let masks = l
        .masks
        .iter()
        .map(|m| LevelMask {
            threshold: m.threshold,
            mask: pick.iter().map(|&k| m.mask[k]).collect(),
        })
        .collect();
    Ok(Landscape {
        grid: sub,
        mean: take(&l.mean),
        uncertainty: take(&l.uncertainty),
        exact: l.exact.as_deref().map(take),
        masks,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gpr::{Dimension, FitOptions, TrainingSet};
    use std::sync::atomic::{AtomicUsize, Ordering};

    fn space() -> ParameterSpace {
        ParameterSpace::new(vec![
            Dimension::new("a", 0.0, 1.0, ""),
            Dimension::new("b", -1.0, 1.0, ""),
            Dimension::new("c", 0.0, 2.0, ""),
        ])
        .unwrap()
    }

    fn f(x: &[f64]) -> f64 {
        ((x[0] - 0.5).powi(2) + x[1] * x[1] * 0.5 + (x[2] - 1.0).powi(2) * 0.2).min(2.0)
    }

    fn model() -> GprModel {
        let s = space();
        let mut h = crate::gpr::lowdisc::Halton::new(3);
        let pts: Vec<Vec<f64>> = h.take_points(40).iter().map(|u| s.from_unit(u)).collect();
        let y: Vec<f64> = pts.iter().map(|p| f(p)).collect();
        GprModel::fit(TrainingSet::from_points(s, &pts, &y).unwrap(), &FitOptions::default(), None).unwrap()
    }

    #[test]
    fn indexing_round_trip() {
        let g = GridSpec::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![
                Axis::Scan { lo: 0.0, hi: 1.0, n: 3 },
                Axis::Fixed(0.5),
                Axis::Scan { lo: 0.0, hi: 2.0, n: 5 },
            ],
        )
        .unwrap();
        assert_eq!(g.len(), 15);
        for k in 0..15 {
            assert_eq!(g.flat_index(&g.multi_index(k)), k);
        }
        assert_eq!(g.node(7), vec![0.5, 0.5, 1.0]);
        assert_eq!(g.scanned(), vec![0, 2]);
    }

    #[test]
    fn rejects_degenerate_and_out_of_bounds() {
        assert!(GridSpec::new(vec!["a".into()], vec![Axis::Scan { lo: 0.0, hi: 1.0, n: 1 }]).is_err());
        let g = GridSpec::cut(&space(), &[0.5, 0.0, 1.0], &["a"], 5).unwrap();
        assert!(g.check_within(&space()).is_ok());
        let bad = GridSpec::cut(&space(), &[0.5, 3.0, 1.0], &["a"], 5).unwrap();
        assert!(bad.check_within(&space()).is_err());
    }

    #[test]
    fn surrogate_matches_direct_predictions() {
        let m = model();
        let g = GridSpec::cut(&space(), &[0.5, 0.0, 1.0], &["a"], 2).unwrap();
        let l = surrogate_grid(&m, &g, &CostThresholds::default(), SURROGATE_NODE_CAP).unwrap();
        for k in 0..2 {
            let p = m.predict(&g.node(k)).unwrap();
            assert!((p.mean - l.mean[k]).abs() < 1e-12);
            assert!((p.std - l.uncertainty[k]).abs() < 1e-12);
        }
        assert!(matches!(
            surrogate_grid(&m, &GridSpec::full(&space(), 25).unwrap(), &CostThresholds::default(), 1000),
            Err(Error::GridTooLarge { .. })
        ));
    }

    #[test]
    fn cut_equals_slice_of_full_grid() {
        let m = model();
        let t = CostThresholds::default();
        let full = surrogate_grid(&m, &GridSpec::full(&space(), 6).unwrap(), &t, SURROGATE_NODE_CAP).unwrap();
        let s = slice(&full, &[("b", 2)]).unwrap();
        let b = full.grid.axes[1].value(2);
        let direct_grid = GridSpec::cut(&space(), &[0.0, b, 0.0], &["a", "c"], 6).unwrap();
        let direct = surrogate_grid(&m, &direct_grid, &t, SURROGATE_NODE_CAP).unwrap();
        assert_eq!(s.grid, direct.grid);
        for k in 0..s.len() {
            assert!((s.mean[k] - direct.mean[k]).abs() < 1e-12);
        }
    }

    #[test]
    fn metrics_and_regions() {
        let g = GridSpec::full(&space(), 4).unwrap();
        let ev = |x: &[f64]| -> Result<f64> { Ok(f(x)) };
        let t = CostThresholds::default();
        let (exact, _) = exact_grid(&ev, &space(), &g, &t, EXACT_NODE_CAP, None).unwrap();
        let mut shifted = exact.clone();
        shifted.exact = None;
        for v in &mut shifted.mean {
            *v += 0.07;
        }
        assert!(error_metric(&exact, &exact).unwrap() == 0.0);
        assert!((error_metric(&exact, &shifted).unwrap() - 0.07).abs() < 1e-12);
        assert_eq!(error_metric(&exact, &shifted).unwrap(), error_metric(&shifted, &exact).unwrap());

        let all = consistency_region(&exact, 2.0).unwrap();
        assert_eq!(all.count, exact.len());
        let none = consistency_region(&exact, 1e-9).unwrap();
        assert!(none.is_empty() && none.extents.is_empty());
        let r05 = consistency_region(&exact, 0.05).unwrap();
        let r10 = consistency_region(&exact, 0.1).unwrap();
        for k in 0..exact.len() {
            assert!(!r05.mask[k] || r10.mask[k]);
            if r10.mask[k] {
                let x = exact.grid.node(k);
                for (i, e) in r10.extents.iter().enumerate() {
                    assert!(x[i] >= e.1 && x[i] <= e.2);
                }
            }
        }
        assert!(consistency_region(&exact, 0.0).is_err());
    }

    #[test]
    fn cache_makes_reruns_free() {
        let dir = tempfile::tempdir().unwrap();
        let path = dir.path().join("cache.tsv");
        let calls = AtomicUsize::new(0);
        let ev = |x: &[f64]| -> Result<f64> {
            calls.fetch_add(1, Ordering::SeqCst);
            Ok(f(x))
        };
        let g = GridSpec::full(&space(), 3).unwrap();
        let t = CostThresholds::default();
        let mut cache = ExactCache::open(&path).unwrap();
        let (a, s1) = exact_grid(&ev, &space(), &g, &t, EXACT_NODE_CAP, Some(&mut cache)).unwrap();
        assert_eq!(s1.evaluated, 27);
        let mut cache = ExactCache::open(&path).unwrap();
        let (b, s2) = exact_grid(&ev, &space(), &g, &t, EXACT_NODE_CAP, Some(&mut cache)).unwrap();
        assert_eq!((s2.evaluated, s2.cached), (0, 27));
        assert_eq!(calls.load(Ordering::SeqCst), 27);
        assert_eq!(a.mean, b.mean);

        let one = GridSpec::new(
            vec!["a".into(), "b".into(), "c".into()],
            vec![Axis::Fixed(0.1), Axis::Fixed(0.2), Axis::Fixed(0.3)],
        )
        .unwrap();
        let (_, s3) = exact_grid(&ev, &space(), &one, &t, EXACT_NODE_CAP, None).unwrap();
        assert_eq!(s3.evaluated, 1);
    }

    #[test]
    fn failed_nodes_are_missing() {
        let ev = |x: &[f64]| -> Result<f64> {
            if x[0] > 0.9 {
                Err(Error::Propagation("boom".into()))
            } else {
                Ok(f(x))
            }
        };
        let g = GridSpec::full(&space(), 3).unwrap();
        let (l, s) = exact_grid(&ev, &space(), &g, &CostThresholds::default(), EXACT_NODE_CAP, None).unwrap();
        assert_eq!(s.failed, 9);
        assert_eq!(l.mean.iter().filter(|v| v.is_nan()).count(), 9);
        assert!(l.to_tsv().lines().count() == 28);
    }
}
