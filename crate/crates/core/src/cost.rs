//! Experimental spectrum ingest, resampling, and the spectral distance
//! Cost = ∫ |A_exp(ν) − A_cal(ν)| dν between area-normalized spectra.
//!
//! Spectrum files are plain text:
//!
//! ```text
//! # free comment
//! #@ units = nm          (cm-1 | nm; default cm-1)
//! #@ baseline = 0.002    (subtracted from every amplitude at ingest)
//! #@ any_key = value     (kept as metadata)
//! 16000.0  0.131
//! 16010.0, 0.135
//! ```
//!
//! Rows hold `ν amplitude` separated by whitespace or a single comma. Blank
//! lines are ignored.

use std::collections::BTreeMap;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::spectra::{FrequencyGrid, Spectrum};

pub const MIN_POINTS: usize = 10;

/// Below this cost spectra are hard to tell apart by eye.
pub const C_INNER: f64 = 0.05;
/// Reference threshold for "reasonable agreement".
pub const C_REF: f64 = 0.1;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CostThresholds {
    pub inner: f64,
    pub reference: f64,
}

impl Default for CostThresholds {
    fn default() -> Self {
        CostThresholds {
            inner: C_INNER,
            reference: C_REF,
        }
    }
}

impl CostThresholds {
    pub fn as_array(&self) -> [f64; 2] {
        [self.inner, self.reference]
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum AxisUnits {
    #[serde(rename = "cm-1")]
    Wavenumber,
    Nm,
}

/// What was done to the raw file on the way in.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct Preprocessing {
    pub converted_from_nm: bool,
    pub duplicates_merged: usize,
    pub baseline_offset: Option<f64>,
    /// (ν_min, ν_max) of the data actually used.
    pub window: Option<(f64, f64)>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentalSpectrum {
    pub nu: Vec<f64>,
    pub amp: Vec<f64>,
    pub source: String,
    pub metadata: BTreeMap<String, String>,
    pub preprocessing: Preprocessing,
}

impl ExperimentalSpectrum {
    /// Builds from raw points: sorts ascending, averages duplicate ν.
    pub fn from_points(points: Vec<(f64, f64)>, source: impl Into<String>) -> Result<Self> {
        let source = source.into();
        for (i, (nu, a)) in points.iter().enumerate() {
            if !nu.is_finite() || !a.is_finite() {
                return Err(Error::Parse {
                    source_name: source.clone(),
                    line: i + 1,
                    reason: "non-finite value".into(),
                });
            }
        }
        let mut points = points;
        points.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut nu: Vec<f64> = Vec::with_capacity(points.len());
        let mut amp: Vec<f64> = Vec::with_capacity(points.len());
        let mut count = 1usize;
        let mut merged = 0;
        for (x, a) in points {
            if nu.last() == Some(&x) {
                let last = amp.last_mut().expect("nonempty");
                *last = (*last * count as f64 + a) / (count + 1) as f64;
                count += 1;
                merged += 1;
            } else {
                nu.push(x);
                amp.push(a);
                count = 1;
            }
        }
        if nu.len() < MIN_POINTS {
            return Err(Error::TooFewPoints(nu.len()));
        }
        if nu.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Parse {
                source_name: source,
                line: 0,
                reason: "frequencies are not strictly increasing after de-duplication".into(),
            });
        }
        let window = Some((nu[0], nu[nu.len() - 1]));
        Ok(ExperimentalSpectrum {
            nu,
            amp,
            source,
            metadata: BTreeMap::new(),
            preprocessing: Preprocessing {
                duplicates_merged: merged,
                window,
                ..Default::default()
            },
        })
    }

    pub fn len(&self) -> usize {
        self.nu.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nu.is_empty()
    }

    /// Linear interpolation at `x`; `None` outside the measured range.
    pub fn interpolate(&self, x: f64) -> Option<f64> {
        let n = self.nu.len();
        if x < self.nu[0] || x > self.nu[n - 1] {
            return None;
        }
        let i = self.nu.partition_point(|&v| v <= x);
        if i == 0 {
            return Some(self.amp[0]);
        }
        if i >= n {
            return Some(self.amp[n - 1]);
        }
        let (x0, x1) = (self.nu[i - 1], self.nu[i]);
        let w = (x - x0) / (x1 - x0);
        Some(self.amp[i - 1] * (1.0 - w) + self.amp[i] * w)
    }
}

pub fn ingest_spectrum(path: &Path) -> Result<ExperimentalSpectrum> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_spectrum(&text, &path.display().to_string())
}

pub fn parse_spectrum(text: &str, source: &str) -> Result<ExperimentalSpectrum> {
    let bad = |line: usize, reason: String| Error::Parse {
        source_name: source.to_string(),
        line,
        reason,
    };
    let mut metadata = BTreeMap::new();
    let mut points = Vec::new();
    for (i, raw) in text.lines().enumerate() {
        let lineno = i + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(rest) = line.strip_prefix("#@") {
            let (k, v) = rest
                .split_once('=')
                .ok_or_else(|| bad(lineno, format!("metadata line needs `key = value`: {line:?}")))?;
            metadata.insert(k.trim().to_ascii_lowercase(), v.trim().to_string());
            continue;
        }
        if line.starts_with('#') {
            continue;
        }
        let fields: Vec<&str> = if line.contains(',') {
            line.split(',').map(str::trim).collect()
        } else {
            line.split_whitespace().collect()
        };
        if fields.len() != 2 {
            return Err(bad(lineno, format!("expected 2 columns, found {}", fields.len())));
        }
        let parse = |s: &str| {
            s.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(lineno, format!("not a finite number: {s:?}")))
        };
        points.push((parse(fields[0])?, parse(fields[1])?));
    }

    let units = match metadata.get("units").map(|s| s.to_ascii_lowercase()) {
        None => AxisUnits::Wavenumber,
        Some(u) if u == "cm-1" || u == "cm^-1" || u == "1/cm" => AxisUnits::Wavenumber,
        Some(u) if u == "nm" => AxisUnits::Nm,
        Some(u) => return Err(bad(0, format!("unknown units {u:?} (expected cm-1 or nm)"))),
    };
    let baseline = match metadata.get("baseline") {
        Some(b) => Some(
            b.parse::<f64>()
                .ok()
                .filter(|v| v.is_finite())
                .ok_or_else(|| bad(0, format!("baseline is not a number: {b:?}")))?,
        ),
        None => None,
    };
    if units == AxisUnits::Nm {
        for (k, (x, _)) in points.iter_mut().enumerate() {
            if *x <= 0.0 {
                return Err(bad(0, format!("row {}: wavelength must be positive", k + 1)));
            }
            *x = 1e7 / *x;
        }
    }
    if let Some(b) = baseline {
        for (_, a) in &mut points {
            *a -= b;
        }
    }
    let mut e = ExperimentalSpectrum::from_points(points, source)?;
    e.metadata = metadata;
    e.preprocessing.converted_from_nm = units == AxisUnits::Nm;
    e.preprocessing.baseline_offset = baseline;
    Ok(e)
}

/// Experimental spectrum placed on a simulation grid.
#[derive(Debug, Clone)]
pub struct Resampled {
    pub spectrum: Spectrum,
    /// Grid points outside the measured range, set to 0.
    pub outside: usize,
    /// Negative interpolated amplitudes clipped to 0.
    pub clipped: usize,
}

pub fn to_common_grid(e: &ExperimentalSpectrum, grid: &FrequencyGrid) -> Result<Resampled> {
    let mut outside = 0;
    let mut clipped = 0;
    let amp: Vec<f64> = (0..grid.len)
        .map(|i| match e.interpolate(grid.value(i)) {
            None => {
                outside += 1;
                0.0
            }
            Some(a) if a < 0.0 => {
                clipped += 1;
                0.0
            }
            Some(a) => a,
        })
        .collect();
    if outside == grid.len {
        return Err(Error::NoSupport);
    }
    let spectrum = Spectrum::new(*grid, amp)?;
    if !(spectrum.area() > 0.0) {
        return Err(Error::NoSupport);
    }
    Ok(Resampled {
        spectrum: spectrum.normalize()?,
        outside,
        clipped,
    })
}

/// A cost in [0, 2].
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(transparent)]
pub struct CostValue(f64);

impl CostValue {
    pub const MAX: f64 = 2.0;

    pub fn new(v: f64) -> Self {
        CostValue(if v.is_nan() { Self::MAX } else { v.clamp(0.0, Self::MAX) })
    }

    pub fn value(self) -> f64 {
        self.0
    }
}

fn check_pair(a: &Spectrum, b: &Spectrum) -> Result<()> {
    if !a.grid.matches(&b.grid) {
        return Err(Error::GridMismatch(format!("{:?} vs {:?}", a.grid, b.grid)));
    }
    a.check_normalized()?;
    b.check_normalized()
}

pub fn spectral_cost(a_exp: &Spectrum, a_cal: &Spectrum) -> Result<CostValue> {
    check_pair(a_exp, a_cal)?;
    // No common support: the value is 2 for normalized inputs; summing the two
    // areas would only reproduce it up to round-off.
    if a_exp.amp.iter().zip(&a_cal.amp).all(|(x, y)| x.min(*y) <= 0.0) {
        return Ok(CostValue::new(2.0));
    }
    let diff: Vec<f64> = a_exp.amp.iter().zip(&a_cal.amp).map(|(x, y)| (x - y).abs()).collect();
    Ok(CostValue::new(a_exp.grid.integrate(&diff)))
}

/// ∫ (A_exp − A_cal) dν without the absolute value. Vanishes up to round-off for
/// normalized inputs; kept for diagnostics only.
pub fn signed_difference(a_exp: &Spectrum, a_cal: &Spectrum) -> Result<f64> {
    check_pair(a_exp, a_cal)?;
    let diff: Vec<f64> = a_exp.amp.iter().zip(&a_cal.amp).map(|(x, y)| x - y).collect();
    Ok(a_exp.grid.integrate(&diff))
}
