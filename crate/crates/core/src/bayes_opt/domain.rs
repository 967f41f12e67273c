use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Axis-aligned box of physical settings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Domain {
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    #[serde(default, skip_serializing_if = "Vec::is_empty")]
    pub names: Vec<String>,
}

impl Domain {
    pub fn new(bounds: &[(f64, f64)]) -> Result<Self> {
        let d = Domain {
            lower: bounds.iter().map(|b| b.0).collect(),
            upper: bounds.iter().map(|b| b.1).collect(),
            names: Vec::new(),
        };
        d.validate()?;
        Ok(d)
    }

    pub fn unit(dim: usize) -> Self {
        Domain { lower: vec![0.0; dim], upper: vec![1.0; dim], names: Vec::new() }
    }

    pub fn with_names<S: Into<String>>(mut self, names: impl IntoIterator<Item = S>) -> Self {
        self.names = names.into_iter().map(Into::into).collect();
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.lower.is_empty() || self.lower.len() != self.upper.len() {
            return Err(Error::arg("domain needs matching, non-empty lower/upper bounds"));
        }
        if !self.names.is_empty() && self.names.len() != self.lower.len() {
            return Err(Error::arg("domain names must match its dimension"));
        }
        for (lo, hi) in self.lower.iter().zip(&self.upper) {
            if !(lo.is_finite() && hi.is_finite() && lo < hi) {
                return Err(Error::arg(format!("invalid domain axis [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    pub fn dim(&self) -> usize {
        self.lower.len()
    }

    /// Physical settings to unit-cube coordinates (clipped to the cube).
    pub fn normalize(&self, x: &[f64]) -> Vec<f64> {
        x.iter()
            .zip(self.lower.iter().zip(&self.upper))
            .map(|(v, (lo, hi))| ((v - lo) / (hi - lo)).clamp(0.0, 1.0))
            .collect()
    }

    /// Unit-cube coordinates to physical settings.
    pub fn denormalize(&self, u: &[f64]) -> Vec<f64> {
        u.iter().zip(self.lower.iter().zip(&self.upper)).map(|(v, (lo, hi))| lo + v * (hi - lo)).collect()
    }
}
