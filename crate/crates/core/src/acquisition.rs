//! Acquisition functions and next-point selection.
//!
//! All kinds are expressed as utilities to maximize for a minimization
//! problem: the lower confidence bound enters negated.

use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::{Distribution, Normal};
use serde::{Deserialize, Serialize};
use statrs::function::erf::erfc;

use crate::design::Sobol;
use crate::error::{Error, Result};
use crate::gp::GpPosterior;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum AcquisitionKind {
    Pi,
    Ei,
    Lcb,
}

impl AcquisitionKind {
    pub const ALL: [AcquisitionKind; 3] = [AcquisitionKind::Lcb, AcquisitionKind::Pi, AcquisitionKind::Ei];

    pub fn name(self) -> &'static str {
        match self {
            AcquisitionKind::Pi => "pi",
            AcquisitionKind::Ei => "ei",
            AcquisitionKind::Lcb => "lcb",
        }
    }
}

impl fmt::Display for AcquisitionKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for AcquisitionKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "pi" => Ok(AcquisitionKind::Pi),
            "ei" => Ok(AcquisitionKind::Ei),
            "lcb" => Ok(AcquisitionKind::Lcb),
            other => Err(Error::arg(format!("unknown acquisition `{other}`"))),
        }
    }
}

/// Where candidate settings come from.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum CandidateSource {
    /// The objective's own node set (tabulated objectives).
    Grid,
    /// Randomly shifted Sobol points plus local perturbations of the best observations.
    Sobol,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AcquisitionConfig {
    pub kind: AcquisitionKind,
    /// LCB exploration weight.
    pub beta: f64,
    pub candidate_source: CandidateSource,
    pub candidate_count: usize,
    /// Extra candidates scattered around the incumbents (Sobol source only).
    pub local_candidates: usize,
    /// Skip grid nodes that were already measured (noiseless grid replay).
    pub exclude_visited: bool,
}

impl Default for AcquisitionConfig {
    fn default() -> Self {
        AcquisitionConfig {
            kind: AcquisitionKind::Lcb,
            beta: 2.0,
            candidate_source: CandidateSource::Sobol,
            candidate_count: 4096,
            local_candidates: 512,
            exclude_visited: false,
        }
    }
}

impl AcquisitionConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.beta > 0.0 && self.beta.is_finite()) {
            return Err(Error::arg(format!("beta must be > 0, got {}", self.beta)));
        }
        if self.candidate_count == 0 {
            return Err(Error::arg("candidate_count must be >= 1"));
        }
        Ok(())
    }
}

pub fn std_normal_cdf(z: f64) -> f64 {
    0.5 * erfc(-z * FRAC_1_SQRT_2)
}

pub fn std_normal_pdf(z: f64) -> f64 {
    (-0.5 * z * z).exp() / (2.0 * PI).sqrt()
}

/// Utility of a candidate with predictive mean `mean` and standard deviation
/// `std`, given the best (smallest) observed value `best`.
pub fn acquisition_value(kind: AcquisitionKind, mean: f64, std: f64, best: f64, beta: f64) -> Result<f64> {
    if std.is_nan() || std < 0.0 {
        return Err(Error::arg(format!("standard deviation must be >= 0, got {std}")));
    }
    let gap = best - mean;
    let v = match kind {
        AcquisitionKind::Pi => {
            if std == 0.0 {
                if gap > 0.0 {
                    1.0
                } else if gap == 0.0 {
                    0.5
                } else {
                    0.0
                }
            } else {
                std_normal_cdf(gap / std)
            }
        }
        AcquisitionKind::Ei => {
            if std == 0.0 {
                gap.max(0.0)
            } else {
                let z = gap / std;
                (gap * std_normal_cdf(z) + std * std_normal_pdf(z)).max(0.0)
            }
        }
        AcquisitionKind::Lcb => -(mean - beta * std),
    };
    Ok(v)
}

/// The selected candidate.
#[derive(Clone, Debug, PartialEq)]
pub struct Proposal {
    pub index: usize,
    pub point: Vec<f64>,
    pub utility: f64,
    pub mean: f64,
    pub std: f64,
}

/// Score every candidate row and return the maximizer (lowest index on ties).
pub fn propose_next(posterior: &GpPosterior, config: &AcquisitionConfig, candidates: &DMatrix<f64>) -> Result<Proposal> {
    config.validate()?;
    if candidates.nrows() == 0 {
        return Err(Error::arg("no candidates to score"));
    }
    let best = posterior.dataset().y().min();
    let (means, vars) = posterior.predict(candidates)?;
    let mut chosen: Option<(usize, f64)> = None;
    for i in 0..candidates.nrows() {
        let u = acquisition_value(config.kind, means[i], vars[i].sqrt(), best, config.beta)?;
        if !u.is_finite() {
            continue;
        }
        if chosen.is_none_or(|(_, b)| u > b) {
            chosen = Some((i, u));
        }
    }
    let (index, utility) = chosen.ok_or_else(|| Error::numeric("acquisition is non-finite at every candidate"))?;
    Ok(Proposal {
        index,
        point: candidates.row(index).iter().copied().collect(),
        utility,
        mean: means[index],
        std: vars[index].sqrt(),
    })
}

/// Continuous-domain candidate set: `count` Sobol points under a random
/// toroidal shift, followed by `local` Gaussian perturbations (clipped to the
/// cube) around the given incumbents at several scales.
pub fn sobol_candidates<R: Rng + ?Sized>(
    count: usize,
    dim: usize,
    incumbents: &[Vec<f64>],
    local: usize,
    rng: &mut R,
) -> Result<DMatrix<f64>> {
    if count == 0 {
        return Err(Error::arg("candidate_count must be >= 1"));
    }
    let shift: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    let mut rows: Vec<f64> = Vec::with_capacity((count + local) * dim);
    for p in Sobol::new(dim)?.take(count) {
        rows.extend(p.iter().zip(&shift).map(|(v, s)| (v + s).fract()));
    }
    let mut n = count;
    if !incumbents.is_empty() && local > 0 {
        const SCALES: [f64; 3] = [0.1, 0.03, 0.01];
        for k in 0..local {
            let centre = &incumbents[k % incumbents.len()];
            let sd = SCALES[(k / incumbents.len()) % SCALES.len()];
            let normal = Normal::new(0.0, sd).expect("positive scale");
            rows.extend(centre.iter().map(|c| (c + normal.sample(rng)).clamp(0.0, 1.0)));
            n += 1;
        }
    }
    Ok(DMatrix::from_row_slice(n, dim, &rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn closed_form_spot_values() {
        assert_abs_diff_eq!(acquisition_value(AcquisitionKind::Lcb, 1.0, 0.5, 0.0, 2.0).unwrap(), 0.0);
        assert_abs_diff_eq!(acquisition_value(AcquisitionKind::Pi, 0.7, 0.3, 0.7, 2.0).unwrap(), 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(
            acquisition_value(AcquisitionKind::Ei, 0.2, 1.0, 0.2, 2.0).unwrap(),
            0.398_942_280_401_432_7,
            epsilon = 1e-12
        );
    }

    #[test]
    fn zero_std_limits() {
        let pi = |m| acquisition_value(AcquisitionKind::Pi, m, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(pi(0.5), 1.0);
        assert_eq!(pi(1.0), 0.5);
        assert_eq!(pi(1.5), 0.0);
        let ei = |m| acquisition_value(AcquisitionKind::Ei, m, 0.0, 1.0, 2.0).unwrap();
        assert_eq!(ei(0.25), 0.75);
        assert_eq!(ei(2.0), 0.0);
    }

    #[test]
    fn negative_std_rejected() {
        assert!(acquisition_value(AcquisitionKind::Ei, 0.0, -1e-3, 0.0, 2.0).is_err());
        assert!(acquisition_value(AcquisitionKind::Ei, 0.0, f64::NAN, 0.0, 2.0).is_err());
    }

    #[test]
    fn config_validation() {
        let bad = AcquisitionConfig { beta: 0.0, ..AcquisitionConfig::default() };
        assert!(bad.validate().is_err());
        let bad = AcquisitionConfig { candidate_count: 0, ..AcquisitionConfig::default() };
        assert!(bad.validate().is_err());
    }

    #[test]
    fn candidates_stay_in_cube() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let inc = vec![vec![0.0, 1.0], vec![0.5, 0.5]];
        let c = sobol_candidates(64, 2, &inc, 30, &mut rng).unwrap();
        assert_eq!(c.nrows(), 94);
        assert!(c.iter().all(|v| (0.0..=1.0).contains(v)));
    }

    #[test]
    fn kind_names_parse() {
        for k in AcquisitionKind::ALL {
            assert_eq!(k.name().parse::<AcquisitionKind>().unwrap(), k);
        }
    }
}
