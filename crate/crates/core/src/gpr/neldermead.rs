//! Nelder–Mead simplex search restricted to a box by clamping.

#[derive(Debug, Clone, Copy)]
pub struct NelderMead {
    pub max_evals: usize,
    /// Initial simplex edge, relative to the box width.
    pub initial_step: f64,
    /// Stop when the spread of simplex values drops below this.
    pub f_tol: f64,
}

impl Default for NelderMead {
    fn default() -> Self {
        NelderMead {
            max_evals: 200,
            initial_step: 0.1,
            f_tol: 1e-10,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Minimum {
    pub x: Vec<f64>,
    pub f: f64,
    pub evals: usize,
}

impl NelderMead {
    /// Minimizes `f` over the box [lo, hi] starting at `x0`. The returned value is
    /// never worse than f(x0).
    pub fn minimize<F: FnMut(&[f64]) -> f64>(&self, mut f: F, x0: &[f64], lo: &[f64], hi: &[f64]) -> Minimum {
        let n = x0.len();
        let clamp = |x: &mut Vec<f64>| {
            for i in 0..n {
                x[i] = x[i].clamp(lo[i], hi[i]);
            }
        };
        let mut evals = 0;
        let mut eval = |x: &[f64], evals: &mut usize| {
            *evals += 1;
            let v = f(x);
            if v.is_nan() {
                f64::INFINITY
            } else {
                v
            }
        };

        let mut start = x0.to_vec();
        clamp(&mut start);
        let mut simplex: Vec<(Vec<f64>, f64)> = Vec::with_capacity(n + 1);
        let f0 = eval(&start, &mut evals);
        simplex.push((start.clone(), f0));
        for i in 0..n {
            let mut x = start.clone();
            let step = self.initial_step * (hi[i] - lo[i]);
            x[i] = if x[i] + step <= hi[i] { x[i] + step } else { x[i] - step };
            let fx = eval(&x, &mut evals);
            simplex.push((x, fx));
        }

        while evals < self.max_evals {
            simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
            let (best, worst) = (simplex[0].1, simplex[n].1);
            if (worst - best).abs() <= self.f_tol * (1.0 + best.abs()) {
                break;
            }
            let mut centroid = vec![0.0; n];
            for (x, _) in &simplex[..n] {
                for i in 0..n {
                    centroid[i] += x[i] / n as f64;
                }
            }
            let along = |t: f64, from: &[f64]| {
                let mut p: Vec<f64> = (0..n).map(|i| centroid[i] + t * (from[i] - centroid[i])).collect();
                clamp(&mut p);
                p
            };
            let xr = along(-1.0, &simplex[n].0);
            let fr = eval(&xr, &mut evals);
            if fr < simplex[0].1 {
                let xe = along(-2.0, &simplex[n].0);
                let fe = eval(&xe, &mut evals);
                simplex[n] = if fe < fr { (xe, fe) } else { (xr, fr) };
            } else if fr < simplex[n - 1].1 {
                simplex[n] = (xr, fr);
            } else {
                let (xc, fc) = if fr < simplex[n].1 {
                    let xc = along(-0.5, &simplex[n].0);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                } else {
                    let xc = along(0.5, &simplex[n].0);
                    let fc = eval(&xc, &mut evals);
                    (xc, fc)
                };
                if fc < simplex[n].1.min(fr) {
                    simplex[n] = (xc, fc);
                } else {
                    let x_best = simplex[0].0.clone();
                    for item in simplex.iter_mut().skip(1) {
                        let mut p: Vec<f64> = (0..n).map(|i| x_best[i] + 0.5 * (item.0[i] - x_best[i])).collect();
                        clamp(&mut p);
                        let fp = eval(&p, &mut evals);
                        *item = (p, fp);
                    }
                }
            }
        }
        simplex.sort_by(|a, b| a.1.total_cmp(&b.1));
        let (x, fx) = simplex.swap_remove(0);
        if fx <= f0 {
            Minimum { x, f: fx, evals }
        } else {
            Minimum { x: start, f: f0, evals }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn finds_rosenbrock_minimum() {
        let nm = NelderMead {
            max_evals: 2000,
            ..Default::default()
        };
        let r = nm.minimize(
            |x| (1.0 - x[0]).powi(2) + 100.0 * (x[1] - x[0] * x[0]).powi(2),
            &[-1.0, 1.5],
            &[-2.0, -2.0],
            &[2.0, 2.0],
        );
        assert!((r.x[0] - 1.0).abs() < 1e-3 && (r.x[1] - 1.0).abs() < 1e-3, "{:?}", r);
    }

    #[test]
    fn respects_bounds() {
        let r = NelderMead::default().minimize(|x| x[0], &[0.5], &[0.2], &[1.0]);
        assert!((r.x[0] - 0.2).abs() < 1e-9);
    }
}
