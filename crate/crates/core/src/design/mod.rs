//! Initial experimental designs on the unit cube.

mod sobol;

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::seq::SliceRandom;
use rand::Rng;
use serde::{Deserialize, Serialize};

pub use sobol::{Halton, Sobol, MAX_HALTON_DIM, MAX_SOBOL_DIM};

use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DesignScheme {
    Random,
    Lhs,
    MaximinLhs,
    Sobol,
    Halton,
}

impl DesignScheme {
    pub const ALL: [DesignScheme; 5] =
        [DesignScheme::Sobol, DesignScheme::Halton, DesignScheme::Random, DesignScheme::MaximinLhs, DesignScheme::Lhs];

    pub fn name(self) -> &'static str {
        match self {
            DesignScheme::Random => "random",
            DesignScheme::Lhs => "lhs",
            DesignScheme::MaximinLhs => "maximin",
            DesignScheme::Sobol => "sobol",
            DesignScheme::Halton => "halton",
        }
    }
}

impl fmt::Display for DesignScheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for DesignScheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "random" | "uniform" => Ok(DesignScheme::Random),
            "lhs" => Ok(DesignScheme::Lhs),
            "maximin" | "maximin_lhs" | "maximin-lhs" => Ok(DesignScheme::MaximinLhs),
            "sobol" => Ok(DesignScheme::Sobol),
            "halton" => Ok(DesignScheme::Halton),
            other => Err(Error::arg(format!("unknown design scheme `{other}`"))),
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct DesignSpec {
    pub scheme: DesignScheme,
    pub n_points: usize,
    pub dim: usize,
    /// Number of random LHS draws compared by the maximin scheme.
    pub maximin_candidates: usize,
}

impl DesignSpec {
    pub fn new(scheme: DesignScheme, n_points: usize, dim: usize) -> Self {
        DesignSpec { scheme, n_points, dim, maximin_candidates: 1000 }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_points == 0 || self.dim == 0 {
            return Err(Error::arg("design needs n_points >= 1 and dim >= 1"));
        }
        if self.scheme == DesignScheme::MaximinLhs && self.maximin_candidates == 0 {
            return Err(Error::arg("maximin design needs at least one candidate"));
        }
        Ok(())
    }
}

/// `n_points x dim` design. Sobol and Halton ignore the generator.
pub fn generate_design<R: Rng + ?Sized>(spec: &DesignSpec, rng: &mut R) -> Result<DMatrix<f64>> {
    spec.validate()?;
    let (n, d) = (spec.n_points, spec.dim);
    let m = match spec.scheme {
        DesignScheme::Random => DMatrix::from_fn(n, d, |_, _| rng.random::<f64>()),
        DesignScheme::Lhs => latin_hypercube(n, d, rng),
        DesignScheme::MaximinLhs => {
            let mut best = latin_hypercube(n, d, rng);
            let mut best_score = min_pairwise_distance(&best);
            for _ in 1..spec.maximin_candidates {
                let cand = latin_hypercube(n, d, rng);
                let score = min_pairwise_distance(&cand);
                if score > best_score {
                    best = cand;
                    best_score = score;
                }
            }
            best
        }
        DesignScheme::Sobol => from_rows(Sobol::new(d)?.take(n), n, d),
        DesignScheme::Halton => from_rows(Halton::new(d)?.take(n), n, d),
    };
    Ok(m)
}

fn from_rows(rows: impl Iterator<Item = Vec<f64>>, n: usize, d: usize) -> DMatrix<f64> {
    let flat: Vec<f64> = rows.flatten().collect();
    DMatrix::from_row_slice(n, d, &flat)
}

/// One point per stratum in every coordinate, jittered uniformly inside its cell.
pub fn latin_hypercube<R: Rng + ?Sized>(n: usize, d: usize, rng: &mut R) -> DMatrix<f64> {
    let mut m = DMatrix::zeros(n, d);
    let mut perm: Vec<usize> = (0..n).collect();
    for j in 0..d {
        perm.shuffle(rng);
        for (i, &stratum) in perm.iter().enumerate() {
            // keep the value strictly inside its stratum even when u rounds up
            let u: f64 = rng.random();
            let v = (stratum as f64 + u) / n as f64;
            m[(i, j)] = v.min((stratum as f64 + 1.0) / n as f64 - f64::EPSILON).max(0.0);
        }
    }
    m
}

/// Smallest Euclidean distance between any two rows (infinite for a single row).
pub fn min_pairwise_distance(m: &DMatrix<f64>) -> f64 {
    let mut best = f64::INFINITY;
    for i in 0..m.nrows() {
        for j in 0..i {
            let d2: f64 = (0..m.ncols()).map(|k| (m[(i, k)] - m[(j, k)]).powi(2)).sum();
            best = best.min(d2);
        }
    }
    best.sqrt()
}
