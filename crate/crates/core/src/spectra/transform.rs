//! Half-line Fourier transform A(ν) = Re ∫₀^∞ e^{iνt} M(t) W_σ(t) dt with the
//! Gaussian window W_σ(t) = exp(−σ²t²/2), evaluated by the trapezoid rule on the
//! stored time grid for every point of a uniform frequency grid at once
//! (chirp-z / Bluestein).

use std::cell::RefCell;
use std::f64::consts::PI;

use num_complex::Complex64;
use rustfft::FftPlanner;

use super::grid::FrequencyGrid;

thread_local! {
    static PLANNER: RefCell<FftPlanner<f64>> = RefCell::new(FftPlanner::new());
}

/// Windowed, trapezoid-weighted integrand samples x_j = c_j·dt·M_j·W(t_j).
fn weighted_samples(values: &[Complex64], dt: f64, sigma: f64) -> Vec<Complex64> {
    let n = values.len();
    values
        .iter()
        .enumerate()
        .map(|(j, m)| {
            let t = j as f64 * dt;
            let trap = if j == 0 || j == n - 1 { 0.5 } else { 1.0 };
            m * (trap * dt * (-0.5 * sigma * sigma * t * t).exp())
        })
        .collect()
}

/// Trapezoid estimate of A(ν) on `grid`.
pub fn half_line_transform(values: &[Complex64], dt: f64, sigma: f64, grid: &FrequencyGrid) -> Vec<f64> {
    let n = values.len();
    let m = grid.len;
    if n == 0 {
        return vec![0.0; m];
    }
    let theta = grid.step * dt;
    let nu0 = grid.start;

    // a_j = x_j e^{iν₀t_j} e^{iθj²/2}
    let x = weighted_samples(values, dt, sigma);
    let len = (n + m - 1).next_power_of_two();
    let mut a = vec![Complex64::from(0.0); len];
    for (j, xj) in x.iter().enumerate() {
        let jf = j as f64;
        let phase = nu0 * jf * dt + 0.5 * theta * jf * jf;
        a[j] = xj * Complex64::from_polar(1.0, reduce(phase));
    }
    // b_l = e^{−iθl²/2}, l in −(n−1)..(m−1), stored circularly
    let mut b = vec![Complex64::from(0.0); len];
    let chirp = |l: usize| {
        let lf = l as f64;
        Complex64::from_polar(1.0, reduce(-0.5 * theta * lf * lf))
    };
    for (l, slot) in b.iter_mut().enumerate().take(m) {
        *slot = chirp(l);
    }
    for l in 1..n {
        b[len - l] = chirp(l);
    }

    PLANNER.with(|p| {
        let mut planner = p.borrow_mut();
        let fwd = planner.plan_fft_forward(len);
        let inv = planner.plan_fft_inverse(len);
        fwd.process(&mut a);
        fwd.process(&mut b);
        for (ai, bi) in a.iter_mut().zip(&b) {
            *ai *= bi;
        }
        inv.process(&mut a);
    });

    let scale = 1.0 / len as f64;
    (0..m)
        .map(|k| {
            let kf = k as f64;
            let post = Complex64::from_polar(1.0, reduce(0.5 * theta * kf * kf));
            (a[k] * scale * post).re
        })
        .collect()
}

/// Direct O(N·M) trapezoid sum; reference implementation for the chirp-z path.
pub fn half_line_transform_direct(values: &[Complex64], dt: f64, sigma: f64, grid: &FrequencyGrid) -> Vec<f64> {
    let x = weighted_samples(values, dt, sigma);
    (0..grid.len)
        .map(|k| {
            let nu = grid.value(k);
            x.iter()
                .enumerate()
                .map(|(j, xj)| (xj * Complex64::from_polar(1.0, nu * j as f64 * dt)).re)
                .sum()
        })
        .collect()
}

fn reduce(phase: f64) -> f64 {
    phase.rem_euclid(2.0 * PI)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pure_line(eps0: f64, dt: f64, n: usize) -> Vec<Complex64> {
        (0..n)
            .map(|j| Complex64::from_polar(1.0, -eps0 * j as f64 * dt))
            .collect()
    }

    #[test]
    fn chirp_matches_direct_sum() {
        let grid = FrequencyGrid::new(15000.0, 17000.0, 301).unwrap();
        let sigma = 120.0;
        let dt = 0.1 / 2500.0;
        let n = (6.5 / sigma / dt) as usize + 1;
        let m: Vec<Complex64> = (0..n)
            .map(|j| {
                let t = j as f64 * dt;
                Complex64::from_polar(1.0, -16000.0 * t) * 0.7 + Complex64::from_polar(0.5, -15500.0 * t) * (-30.0 * t).exp()
            })
            .collect();
        let fast = half_line_transform(&m, dt, sigma, &grid);
        let slow = half_line_transform_direct(&m, dt, sigma, &grid);
        let peak = slow.iter().cloned().fold(0.0, f64::max);
        for (a, b) in fast.iter().zip(&slow) {
            assert!((a - b).abs() < 1e-10 * peak, "{a} vs {b}");
        }
    }

    #[test]
    fn single_line_gives_half_gaussian() {
        // Re ∫₀^∞ cos(xt) e^{−σ²t²/2} dt = ½·√(2π)/σ·exp(−x²/(2σ²))
        let eps0 = 16000.0;
        let sigma: f64 = 200.0;
        let grid = FrequencyGrid::new(14000.0, 18000.0, 801).unwrap();
        let dt = 0.1 / 2000.0;
        let n = (6.5 / sigma / dt).ceil() as usize + 1;
        let a = half_line_transform(&pure_line(eps0, dt, n), dt, sigma, &grid);
        for (k, ak) in a.iter().enumerate() {
            let x = grid.value(k) - eps0;
            let exact = 0.5 * (2.0 * PI).sqrt() / sigma * (-x * x / (2.0 * sigma * sigma)).exp();
            assert!((ak - exact).abs() < 1e-9, "nu = {}: {ak} vs {exact}", grid.value(k));
        }
    }
}
