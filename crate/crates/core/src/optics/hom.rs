use std::f64::consts::PI;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::state::{make_state, GaussianState, StateKind};
use crate::error::{Error, Result};

/// Source feeding the two interferometer arms.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum InputKind {
    /// Degenerate pair: squeezed vacuum split on a 50/50 beam splitter.
    Sv,
    /// Non-degenerate pair: one mode of a two-mode squeezed vacuum per arm.
    Tmsv,
    /// Independent thermal states, one per arm.
    Thermal,
}

impl fmt::Display for InputKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            InputKind::Sv => "sv",
            InputKind::Tmsv => "tmsv",
            InputKind::Thermal => "thermal",
        })
    }
}

impl FromStr for InputKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "sv" => Ok(InputKind::Sv),
            "tmsv" => Ok(InputKind::Tmsv),
            "thermal" => Ok(InputKind::Thermal),
            other => Err(Error::arg(format!("unknown input kind `{other}`"))),
        }
    }
}

/// Physical settings of one interference measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ScenarioParams {
    pub input_kind: InputKind,
    /// Squeezing parameter (sv, tmsv).
    pub squeezing: f64,
    /// Mean photon number of the upper-arm thermal input.
    pub mu: f64,
    /// Mean photon number of the lower-arm thermal input.
    pub mu_prime: f64,
    pub eta_u: f64,
    pub eta_d: f64,
    /// Indistinguishable fraction ζ of the two wave packets.
    pub overlap: f64,
    /// Number of points of the uniform phase grid over [0, 2π).
    pub phase_grid: usize,
    /// Filter detuning in GHz; `Some` turns on the degenerate/non-degenerate blend.
    pub detuning: Option<f64>,
    /// Gaussian width (GHz) of the spectral-overlap weight.
    pub filter_sigma: f64,
}

impl Default for ScenarioParams {
    fn default() -> Self {
        ScenarioParams {
            input_kind: InputKind::Sv,
            squeezing: 0.2,
            mu: 0.04,
            mu_prime: 0.04,
            eta_u: 0.8,
            eta_d: 0.8,
            overlap: 1.0,
            phase_grid: 32,
            detuning: None,
            filter_sigma: 5.1,
        }
    }
}

impl ScenarioParams {
    pub fn validate(&self) -> Result<()> {
        let unit = |v: f64, name: &str| {
            if (0.0..=1.0).contains(&v) {
                Ok(())
            } else {
                Err(Error::arg(format!("{name} must be in [0, 1], got {v}")))
            }
        };
        let nonneg = |v: f64, name: &str| {
            if v >= 0.0 && v.is_finite() {
                Ok(())
            } else {
                Err(Error::arg(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        unit(self.eta_u, "eta_u")?;
        unit(self.eta_d, "eta_d")?;
        unit(self.overlap, "overlap")?;
        nonneg(self.squeezing, "squeezing")?;
        nonneg(self.mu, "mu")?;
        nonneg(self.mu_prime, "mu_prime")?;
        if self.phase_grid == 0 {
            return Err(Error::arg("phase_grid must be >= 1"));
        }
        if let Some(dnu) = self.detuning {
            nonneg(dnu, "detuning")?;
            if self.input_kind != InputKind::Sv {
                return Err(Error::arg("detuning blend is defined for the sv input only"));
            }
            if !(self.filter_sigma > 0.0 && self.filter_sigma.is_finite()) {
                return Err(Error::arg(format!("filter_sigma must be > 0, got {}", self.filter_sigma)));
            }
        }
        Ok(())
    }

    /// Weight of the degenerate contribution at the configured detuning.
    pub fn spectral_weight(&self) -> f64 {
        match self.detuning {
            None => 1.0,
            Some(dnu) => (-dnu * dnu / (2.0 * self.filter_sigma * self.filter_sigma)).exp(),
        }
    }
}

/// Single and coincidence click probabilities of the two threshold detectors.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClickProbabilities {
    pub p_d1: f64,
    pub p_d2: f64,
    pub p_coinc: f64,
}

impl ClickProbabilities {
    pub const ZERO: ClickProbabilities = ClickProbabilities { p_d1: 0.0, p_d2: 0.0, p_coinc: 0.0 };

    pub fn validate(&self) -> Result<()> {
        let ok = |v: f64| (0.0..=1.0).contains(&v);
        if !(ok(self.p_d1) && ok(self.p_d2) && ok(self.p_coinc)) {
            return Err(Error::arg(format!("probabilities outside [0, 1]: {self:?}")));
        }
        Ok(())
    }

    /// `P_coinc / (P_D1 P_D2)`. Singles at roundoff level count as zero.
    pub fn g2(&self) -> Result<f64> {
        const FLOOR: f64 = 64.0 * f64::EPSILON;
        if !(self.p_d1 > FLOOR && self.p_d2 > FLOOR) {
            return Err(Error::Degenerate(format!("zero singles probability ({self:?})")));
        }
        Ok(self.p_coinc / (self.p_d1 * self.p_d2))
    }

    fn blend(&self, other: &ClickProbabilities, w: f64) -> ClickProbabilities {
        ClickProbabilities {
            p_d1: w * self.p_d1 + (1.0 - w) * other.p_d1,
            p_d2: w * self.p_d2 + (1.0 - w) * other.p_d2,
            p_coinc: w * self.p_coinc + (1.0 - w) * other.p_coinc,
        }
    }
}

/// Mode labels of the fixed eight-mode pipeline.
pub mod modes {
    pub const UPPER: usize = 0;
    pub const LOWER: usize = 1;
    pub const LOSS_U: usize = 2;
    pub const LOSS_D: usize = 3;
    /// Distinguishable (reflected) part of the upper arm.
    pub const DIST_U: usize = 4;
    pub const DIST_D: usize = 5;
    pub const VAC_U: usize = 6;
    pub const VAC_D: usize = 7;
    pub const COUNT: usize = 8;
    pub const D1: [usize; 3] = [UPPER, DIST_U, DIST_D];
    pub const D2: [usize; 3] = [LOWER, VAC_U, VAC_D];
    pub const BOTH: [usize; 6] = [UPPER, DIST_U, DIST_D, LOWER, VAC_U, VAC_D];
}

/// State after the source and the loss splitters (phase independent).
fn arm_state(params: &ScenarioParams) -> Result<GaussianState> {
    use modes::*;
    let mut s = GaussianState::vacuum(COUNT);
    match params.input_kind {
        InputKind::Sv => {
            s.embed(&[UPPER], &make_state(StateKind::Squeezed(params.squeezing))?)?;
            s.apply_beam_splitter(UPPER, LOWER, 0.5)?;
        }
        InputKind::Tmsv => s.embed(&[UPPER, LOWER], &make_state(StateKind::Tmsv(params.squeezing))?)?,
        InputKind::Thermal => {
            s.embed(&[UPPER], &make_state(StateKind::Thermal(params.mu))?)?;
            s.embed(&[LOWER], &make_state(StateKind::Thermal(params.mu_prime))?)?;
        }
    }
    s.apply_beam_splitter(UPPER, LOSS_U, params.eta_u)?;
    s.apply_beam_splitter(LOWER, LOSS_D, params.eta_d)?;
    Ok(s)
}

/// Overlap transmittance actually applied. The non-degenerate pair is
/// spectrally distinguishable, so none of it reaches the interfering port.
fn effective_overlap(params: &ScenarioParams) -> f64 {
    match params.input_kind {
        InputKind::Tmsv => 0.0,
        _ => params.overlap,
    }
}

/// Run the post-source part of the pipeline at one phase and return the
/// log no-click probabilities `(ln P0(D1), ln P0(D2), ln P0(D1 ∪ D2))`.
fn detect_at_phase(prefix: &GaussianState, overlap: f64, phase: f64) -> Result<(f64, f64, f64)> {
    use modes::*;
    let mut s = prefix.clone();
    s.apply_phase_shift(LOWER, phase)?;
    s.apply_beam_splitter(UPPER, DIST_U, overlap)?;
    s.apply_beam_splitter(LOWER, DIST_D, overlap)?;
    s.apply_beam_splitter(UPPER, LOWER, 0.5)?;
    s.apply_beam_splitter(DIST_U, VAC_U, 0.5)?;
    s.apply_beam_splitter(DIST_D, VAC_D, 0.5)?;
    Ok((s.log_no_click(&D1)?, s.log_no_click(&D2)?, s.log_no_click(&BOTH)?))
}

/// Final eight-mode state at a single phase, for inspection and oracle checks.
pub fn pipeline_state(params: &ScenarioParams, phase: f64) -> Result<GaussianState> {
    use modes::*;
    params.validate()?;
    let mut s = arm_state(params)?;
    let overlap = effective_overlap(params);
    s.apply_phase_shift(LOWER, phase)?;
    s.apply_beam_splitter(UPPER, DIST_U, overlap)?;
    s.apply_beam_splitter(LOWER, DIST_D, overlap)?;
    s.apply_beam_splitter(UPPER, LOWER, 0.5)?;
    s.apply_beam_splitter(DIST_U, VAC_U, 0.5)?;
    s.apply_beam_splitter(DIST_D, VAC_D, 0.5)?;
    Ok(s)
}

/// Phase-averaged click probabilities of a single (non-blended) scenario.
pub fn hom_probabilities(params: &ScenarioParams) -> Result<ClickProbabilities> {
    params.validate()?;
    let prefix = arm_state(params)?;
    let overlap = effective_overlap(params);
    let n = params.phase_grid;
    let (mut p1, mut p2, mut pc) = (0.0, 0.0, 0.0);
    for k in 0..n {
        let phase = 2.0 * PI * k as f64 / n as f64;
        let (a, b, c) = detect_at_phase(&prefix, overlap, phase)?;
        // 1 - e^a and 1 - e^a - e^b + e^c without cancellation
        let (q1, q2) = (-a.exp_m1(), -b.exp_m1());
        p1 += q1;
        p2 += q2;
        pc += q1 * q2 + (a + b).exp() * (c - a - b).exp_m1();
    }
    let nf = n as f64;
    Ok(ClickProbabilities {
        p_d1: (p1 / nf).clamp(0.0, 1.0),
        p_d2: (p2 / nf).clamp(0.0, 1.0),
        p_coinc: (pc / nf).clamp(0.0, 1.0),
    })
}

/// Click probabilities including the detuning blend when `detuning` is set.
pub fn blended_probabilities(params: &ScenarioParams) -> Result<ClickProbabilities> {
    params.validate()?;
    if params.detuning.is_none() {
        return hom_probabilities(params);
    }
    let w = params.spectral_weight();
    let degenerate = ScenarioParams { input_kind: InputKind::Sv, detuning: None, ..*params };
    let non_degenerate = ScenarioParams { input_kind: InputKind::Tmsv, detuning: None, overlap: 0.0, ..*params };
    let deg = if w > 0.0 { hom_probabilities(&degenerate)? } else { ClickProbabilities::ZERO };
    let non = if w < 1.0 { hom_probabilities(&non_degenerate)? } else { ClickProbabilities::ZERO };
    Ok(deg.blend(&non, w))
}

/// Normalized zero-delay correlation `P_D1D2 / (P_D1 P_D2)` of the scenario.
pub fn g2_objective(params: &ScenarioParams) -> Result<f64> {
    blended_probabilities(params)?.g2()
}

/// Coincidence dip visibility `1 - P_coinc(ζ=1) / P_coinc(ζ=0)` at otherwise fixed settings.
pub fn visibility(params: &ScenarioParams) -> Result<f64> {
    let on = blended_probabilities(&ScenarioParams { overlap: 1.0, ..*params })?.p_coinc;
    let off = blended_probabilities(&ScenarioParams { overlap: 0.0, ..*params })?.p_coinc;
    if off.is_nan() || off <= 0.0 {
        return Err(Error::Degenerate("no coincidences without overlap".into()));
    }
    Ok(1.0 - on / off)
}

/// Ratio `g²(ζ=1) / g²(ζ=0)` at otherwise fixed settings.
pub fn g2_dip_ratio(params: &ScenarioParams) -> Result<f64> {
    let on = g2_objective(&ScenarioParams { overlap: 1.0, ..*params })?;
    let off = g2_objective(&ScenarioParams { overlap: 0.0, ..*params })?;
    Ok(on / off)
}
