use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Stationary covariance families available to the surrogate.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum KernelFamily {
    /// Squared exponential.
    Rbf,
    /// Exp-sine-squared with period `p`.
    Periodic,
    /// Matern with smoothness fixed at 5/2.
    Matern52,
}

impl KernelFamily {
    pub const ALL: [KernelFamily; 3] = [KernelFamily::Rbf, KernelFamily::Periodic, KernelFamily::Matern52];

    pub fn name(self) -> &'static str {
        match self {
            KernelFamily::Rbf => "rbf",
            KernelFamily::Periodic => "periodic",
            KernelFamily::Matern52 => "matern52",
        }
    }
}

impl fmt::Display for KernelFamily {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for KernelFamily {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "rbf" | "se" | "squared_exponential" => Ok(KernelFamily::Rbf),
            "periodic" => Ok(KernelFamily::Periodic),
            "matern52" | "matern" => Ok(KernelFamily::Matern52),
            other => Err(Error::arg(format!("unknown kernel family `{other}`"))),
        }
    }
}

/// Kernel family together with its hyperparameters.
///
/// Inputs are expected in normalized `[0, 1]^D` coordinates, so the length
/// scale and period are in those units as well.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct KernelConfig {
    pub family: KernelFamily,
    pub length_scale: f64,
    /// Only read by the periodic family.
    pub period: f64,
    pub output_scale: f64,
    pub noise_variance: f64,
}

impl KernelConfig {
    pub fn new(family: KernelFamily) -> Self {
        KernelConfig { family, length_scale: 0.2, period: 1.0, output_scale: 1.0, noise_variance: 1e-6 }
    }

    pub fn with_length_scale(mut self, length_scale: f64) -> Self {
        self.length_scale = length_scale;
        self
    }

    pub fn with_period(mut self, period: f64) -> Self {
        self.period = period;
        self
    }

    pub fn with_output_scale(mut self, output_scale: f64) -> Self {
        self.output_scale = output_scale;
        self
    }

    pub fn with_noise(mut self, noise_variance: f64) -> Self {
        self.noise_variance = noise_variance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        let positive = |v: f64| v.is_finite() && v > 0.0;
        if !positive(self.length_scale) {
            return Err(Error::arg(format!("length scale must be > 0, got {}", self.length_scale)));
        }
        if !positive(self.output_scale) {
            return Err(Error::arg(format!("output scale must be > 0, got {}", self.output_scale)));
        }
        if self.family == KernelFamily::Periodic && !positive(self.period) {
            return Err(Error::arg(format!("period must be > 0, got {}", self.period)));
        }
        if !(self.noise_variance.is_finite() && self.noise_variance >= 0.0) {
            return Err(Error::arg(format!("noise variance must be >= 0, got {}", self.noise_variance)));
        }
        Ok(())
    }

    /// Unit-amplitude correlation as a function of Euclidean distance `r`
    /// (for the periodic family, a separation along one axis).
    #[inline]
    pub fn correlation(&self, r: f64) -> f64 {
        let l = self.length_scale;
        match self.family {
            KernelFamily::Rbf => (-0.5 * r * r / (l * l)).exp(),
            KernelFamily::Periodic => {
                let s = (PI * r / self.period).sin();
                (-2.0 * s * s / (l * l)).exp()
            }
            KernelFamily::Matern52 => {
                let a = 5f64.sqrt() * r / l;
                (1.0 + a + a * a / 3.0) * (-a).exp()
            }
        }
    }

    #[inline]
    pub(crate) fn eval_unchecked(&self, x: &[f64], y: &[f64]) -> f64 {
        if self.family == KernelFamily::Periodic {
            // product over axes keeps the Gram matrix positive semi-definite in D > 1
            let l = self.length_scale;
            let s: f64 = x.iter().zip(y).map(|(a, b)| (PI * (a - b) / self.period).sin().powi(2)).sum();
            return self.output_scale * (-2.0 * s / (l * l)).exp();
        }
        let r2: f64 = x.iter().zip(y).map(|(a, b)| (a - b) * (a - b)).sum();
        self.output_scale * self.correlation(r2.sqrt())
    }
}

/// `output_scale * k(x, x')` for the configured family.
pub fn kernel_eval(config: &KernelConfig, x: &[f64], x_prime: &[f64]) -> Result<f64> {
    if x.len() != x_prime.len() {
        return Err(Error::arg(format!("point dimensions differ: {} vs {}", x.len(), x_prime.len())));
    }
    config.validate()?;
    Ok(config.eval_unchecked(x, x_prime))
}

/// Cross-covariance between the rows of `a` and the rows of `b`.
pub fn gram_matrix(config: &KernelConfig, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    if a.ncols() != b.ncols() {
        return Err(Error::arg(format!("column dimensions differ: {} vs {}", a.ncols(), b.ncols())));
    }
    config.validate()?;
    let rows_a = row_vectors(a);
    let rows_b = row_vectors(b);
    Ok(DMatrix::from_fn(a.nrows(), b.nrows(), |i, j| config.eval_unchecked(&rows_a[i], &rows_b[j])))
}

/// Symmetric Gram matrix of `a` with itself; fills one triangle and mirrors it.
pub(crate) fn gram_symmetric(config: &KernelConfig, a: &DMatrix<f64>) -> DMatrix<f64> {
    let rows = row_vectors(a);
    let n = rows.len();
    let mut k = DMatrix::zeros(n, n);
    for i in 0..n {
        k[(i, i)] = config.output_scale;
        for j in 0..i {
            let v = config.eval_unchecked(&rows[i], &rows[j]);
            k[(i, j)] = v;
            k[(j, i)] = v;
        }
    }
    k
}

pub(crate) fn row_vectors(m: &DMatrix<f64>) -> Vec<Vec<f64>> {
    (0..m.nrows()).map(|i| m.row(i).iter().copied().collect()).collect()
}
