use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Dimension {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub unit: String,
}

impl Dimension {
    pub fn new(name: impl Into<String>, lower: f64, upper: f64, unit: impl Into<String>) -> Self {
        Dimension {
            name: name.into(),
            lower,
            upper,
            unit: unit.into(),
        }
    }

    pub fn width(&self) -> f64 {
        self.upper - self.lower
    }
}

/// Box-bounded search space. The surrogate works in unit-cube coordinates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParameterSpace {
    pub dims: Vec<Dimension>,
}

impl ParameterSpace {
    pub fn new(dims: Vec<Dimension>) -> Result<Self> {
        if dims.is_empty() {
            return Err(Error::config("bounds", "at least one dimension is required"));
        }
        for (i, d) in dims.iter().enumerate() {
            if !(d.lower.is_finite() && d.upper.is_finite() && d.lower < d.upper) {
                return Err(Error::config(
                    format!("bounds.{}", d.name),
                    format!("need lower < upper, got [{}, {}]", d.lower, d.upper),
                ));
            }
            if dims[..i].iter().any(|o| o.name == d.name) {
                return Err(Error::config(format!("bounds.{}", d.name), "duplicate name"));
            }
        }
        Ok(ParameterSpace { dims })
    }

    pub fn dim(&self) -> usize {
        self.dims.len()
    }

    pub fn names(&self) -> Vec<&str> {
        self.dims.iter().map(|d| d.name.as_str()).collect()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }

    pub fn to_unit(&self, x: &[f64]) -> Vec<f64> {
        x.iter().zip(&self.dims).map(|(v, d)| (v - d.lower) / d.width()).collect()
    }

    pub fn from_unit(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(&self.dims).map(|(v, d)| d.lower + v * d.width()).collect()
    }

    /// Bounds check with a relative slack of 1e-12 per dimension.
    pub fn check(&self, x: &[f64]) -> Result<()> {
        if x.len() != self.dim() {
            return Err(Error::OutOfBounds(format!(
                "point has {} coordinates, space has {}",
                x.len(),
                self.dim()
            )));
        }
        for (v, d) in x.iter().zip(&self.dims) {
            let slack = 1e-12 * d.width();
            if !v.is_finite() || *v < d.lower - slack || *v > d.upper + slack {
                return Err(Error::OutOfBounds(format!(
                    "{} = {v} not in [{}, {}]",
                    d.name, d.lower, d.upper
                )));
            }
        }
        Ok(())
    }
}
