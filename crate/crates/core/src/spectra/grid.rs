use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum value of t_max·σ accepted for a broadening width σ.
pub const MIN_WINDOW_DECAY: f64 = 6.0;

/// Uniform time grid t_j = j·dt, j = 0..n_steps, in units of 1/cm⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGrid {
    pub dt: f64,
    pub n_steps: usize,
}

impl TimeGrid {
    pub fn new(dt: f64, n_steps: usize) -> Result<Self> {
        if !(dt.is_finite() && dt > 0.0) {
            return Err(Error::param("dt", format!("must be positive, got {dt}")));
        }
        if n_steps < 2 {
            return Err(Error::param("n_steps", "at least 2 time points are required"));
        }
        Ok(TimeGrid { dt, n_steps })
    }

    /// Grid whose step keeps every relevant phase increment below `phase_per_step`
    /// radians and whose extent lets the Gaussian window of width `sigma` decay.
    ///
    /// `bands` are the (min, max) real energies of the significant eigencomponents,
    /// `reference` the monomer excitation energy.
    pub fn auto(
        bands: &[(f64, f64)],
        reference: f64,
        nu: &FrequencyGrid,
        sigma: f64,
        policy: &TimeGridPolicy,
    ) -> Result<Self> {
        if !(sigma.is_finite() && sigma > 0.0) {
            return Err(Error::param("sigma", "must be positive"));
        }
        let (nu_lo, nu_hi) = (nu.start, nu.end());
        let mut omega = sigma;
        for &(lo, hi) in bands {
            if !(lo.is_finite() && hi.is_finite()) {
                continue;
            }
            for e in [lo, hi] {
                omega = omega
                    .max((e - reference).abs())
                    .max((nu_lo - e).abs())
                    .max((nu_hi - e).abs());
            }
        }
        let dt = policy.phase_per_step / omega;
        let t_max = policy.window_decay / sigma;
        let n_steps = (t_max / dt).ceil() as usize + 1;
        TimeGrid::new(dt, n_steps.max(2))
    }

    pub fn t(&self, j: usize) -> f64 {
        j as f64 * self.dt
    }

    pub fn t_max(&self) -> f64 {
        self.t(self.n_steps - 1)
    }

    pub fn check_window(&self, sigma: f64) -> Result<()> {
        if self.t_max() * sigma < MIN_WINDOW_DECAY {
            return Err(Error::param(
                "time_grid",
                format!(
                    "t_max·σ = {:.3} < {MIN_WINDOW_DECAY}; the broadening window has not decayed",
                    self.t_max() * sigma
                ),
            ));
        }
        Ok(())
    }
}

/// How simulations pick their time grid.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TimeGridPolicy {
    /// Largest phase advance per step of any relevant (ν − λ) pair, radians.
    pub phase_per_step: f64,
    /// t_max·σ.
    pub window_decay: f64,
}

impl Default for TimeGridPolicy {
    fn default() -> Self {
        TimeGridPolicy {
            phase_per_step: 0.1,
            window_decay: 6.5,
        }
    }
}

/// Uniform, strictly increasing frequency axis in cm⁻¹.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FrequencyGrid {
    pub start: f64,
    pub step: f64,
    pub len: usize,
}

impl FrequencyGrid {
    pub fn new(start: f64, end: f64, len: usize) -> Result<Self> {
        if !(start.is_finite() && end.is_finite() && end > start) {
            return Err(Error::param("frequency_grid", format!("need start < end, got [{start}, {end}]")));
        }
        if len < 2 {
            return Err(Error::param("frequency_grid", "at least 2 points are required"));
        }
        Ok(FrequencyGrid {
            start,
            step: (end - start) / (len - 1) as f64,
            len,
        })
    }

    /// Default simulation window [ε − 10σ − ω, ε + 6ω + 10σ] with 2001 points.
    pub fn default_for(epsilon: f64, omega_vib: f64, sigma: f64) -> Result<Self> {
        Self::new(
            epsilon - 10.0 * sigma - omega_vib,
            epsilon + 6.0 * omega_vib + 10.0 * sigma,
            2001,
        )
    }

    pub fn end(&self) -> f64 {
        self.value(self.len - 1)
    }

    pub fn value(&self, i: usize) -> f64 {
        self.start + i as f64 * self.step
    }

    pub fn values(&self) -> Vec<f64> {
        (0..self.len).map(|i| self.value(i)).collect()
    }

    /// Same axis up to a relative tolerance on start/step.
    pub fn matches(&self, other: &FrequencyGrid) -> bool {
        let scale = self.start.abs().max(self.end().abs()).max(1.0);
        self.len == other.len
            && (self.start - other.start).abs() <= 1e-9 * scale
            && (self.step - other.step).abs() <= 1e-9 * self.step.abs()
    }

    /// Trapezoid integral of samples on this grid.
    pub fn integrate(&self, f: &[f64]) -> f64 {
        debug_assert_eq!(f.len(), self.len);
        let inner: f64 = f[1..f.len() - 1].iter().sum();
        self.step * (inner + 0.5 * (f[0] + f[f.len() - 1]))
    }

    pub fn refined(&self, factor: usize) -> FrequencyGrid {
        FrequencyGrid {
            start: self.start,
            step: self.step / factor as f64,
            len: (self.len - 1) * factor + 1,
        }
    }
}

/// Amplitudes on a uniform frequency axis.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spectrum {
    pub grid: FrequencyGrid,
    pub amp: Vec<f64>,
    pub normalized: bool,
}

/// Tolerance on |area − 1| for a spectrum to count as normalized.
pub const NORMALIZATION_TOL: f64 = 1e-8;

impl Spectrum {
    pub fn new(grid: FrequencyGrid, amp: Vec<f64>) -> Result<Self> {
        if amp.len() != grid.len {
            return Err(Error::GridMismatch(format!(
                "{} amplitudes for a grid of {} points",
                amp.len(),
                grid.len
            )));
        }
        Ok(Spectrum {
            grid,
            amp,
            normalized: false,
        })
    }

    pub fn nu(&self) -> Vec<f64> {
        self.grid.values()
    }

    pub fn area(&self) -> f64 {
        self.grid.integrate(&self.amp)
    }

    pub fn normalize(mut self) -> Result<Self> {
        let area = self.area();
        if !(area.is_finite() && area > 0.0) {
            return Err(Error::NotNormalized { area });
        }
        for a in &mut self.amp {
            *a /= area;
        }
        self.normalized = true;
        Ok(self)
    }

    pub fn check_normalized(&self) -> Result<()> {
        let area = self.area();
        if !self.normalized || (area - 1.0).abs() > NORMALIZATION_TOL.max(1e-6) {
            return Err(Error::NotNormalized { area });
        }
        Ok(())
    }

    /// Index of the largest amplitude.
    pub fn argmax(&self) -> usize {
        let mut best = 0;
        for (i, a) in self.amp.iter().enumerate() {
            if *a > self.amp[best] {
                best = i;
            }
        }
        best
    }

    /// Interior local maxima above `min_rel` of the global maximum, as grid indices.
    pub fn peaks(&self, min_rel: f64) -> Vec<usize> {
        let max = self.amp[self.argmax()];
        (1..self.amp.len() - 1)
            .filter(|&i| {
                self.amp[i] > self.amp[i - 1] && self.amp[i] >= self.amp[i + 1] && self.amp[i] >= min_rel * max
            })
            .collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn frequency_grid_basics() {
        let g = FrequencyGrid::new(0.0, 10.0, 11).unwrap();
        assert_eq!(g.step, 1.0);
        assert_eq!(g.end(), 10.0);
        assert_eq!(g.integrate(&[1.0; 11]), 10.0);
        assert!(FrequencyGrid::new(1.0, 1.0, 5).is_err());
        assert!(FrequencyGrid::new(0.0, 1.0, 1).is_err());
        let r = g.refined(2);
        assert_eq!(r.len, 21);
        assert_eq!(r.end(), 10.0);
    }

    #[test]
    fn time_grid_window_check() {
        let g = TimeGrid::new(1e-3, 101).unwrap();
        assert!(g.check_window(50.0).is_err());
        assert!(g.check_window(70.0).is_ok());
        assert!(TimeGrid::new(0.0, 10).is_err());
        assert!(TimeGrid::new(1e-3, 1).is_err());
    }

    #[test]
    fn normalize_spectrum() {
        let g = FrequencyGrid::new(0.0, 4.0, 5).unwrap();
        let s = Spectrum::new(g, vec![0.0, 1.0, 2.0, 1.0, 0.0]).unwrap().normalize().unwrap();
        assert!((s.area() - 1.0).abs() < 1e-15);
        assert!(s.check_normalized().is_ok());
        let z = Spectrum::new(g, vec![0.0; 5]).unwrap();
        assert!(z.normalize().is_err());
    }
}
