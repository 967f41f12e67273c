//! Gaussian-state model of a Hong-Ou-Mandel interferometer with threshold detectors.
//!
//! States are tracked by quadrature covariance matrices in the convention where
//! the vacuum is the identity, ordered `(x1, p1, x2, p2, ...)`. All pipelines
//! keep the displacement at zero.

mod hom;
mod state;

use serde::{Deserialize, Serialize};

pub use hom::{
    blended_probabilities, g2_dip_ratio, g2_objective, hom_probabilities, modes, pipeline_state, visibility, ClickProbabilities,
    InputKind, ScenarioParams,
};
pub use state::{beam_splitter, make_state, no_click_probability, phase_shift, GaussianState, StateKind};

use crate::error::{Error, Result};

/// How one physical control maps onto the scenario parameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Knob {
    /// Delay-stage position; overlap `exp(-(x - x0)^2 / width^2)`.
    Stage { x0: f64, width: f64 },
    /// Half-waveplate angle in degrees before a polarizer in the upper arm;
    /// `eta_u = eta_max cos^2(2 (theta - theta0))`.
    Waveplate { theta0: f64, eta_max: f64 },
    EtaU,
    EtaD,
    Overlap,
    /// Filter detuning in GHz.
    Detuning,
}

impl Knob {
    pub fn name(&self) -> &'static str {
        match self {
            Knob::Stage { .. } => "stage",
            Knob::Waveplate { .. } => "waveplate",
            Knob::EtaU => "eta_u",
            Knob::EtaD => "eta_d",
            Knob::Overlap => "overlap",
            Knob::Detuning => "detuning",
        }
    }

    fn apply(&self, value: f64, p: &mut ScenarioParams) -> Result<()> {
        if !value.is_finite() {
            return Err(Error::arg(format!("{} setting is not finite", self.name())));
        }
        match *self {
            Knob::Stage { x0, width } => {
                if width.is_nan() || width <= 0.0 {
                    return Err(Error::arg("stage width must be > 0"));
                }
                p.overlap = (-((value - x0) / width).powi(2)).exp();
            }
            Knob::Waveplate { theta0, eta_max } => {
                let c = (2.0 * (value - theta0).to_radians()).cos();
                p.eta_u = (eta_max * c * c).clamp(0.0, 1.0);
            }
            Knob::EtaU => p.eta_u = value,
            Knob::EtaD => p.eta_d = value,
            Knob::Overlap => p.overlap = value,
            Knob::Detuning => p.detuning = Some(value),
        }
        Ok(())
    }
}

/// A scenario template plus the controls an optimizer may move.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct KnobMap {
    pub template: ScenarioParams,
    pub knobs: Vec<Knob>,
}

impl KnobMap {
    pub fn dim(&self) -> usize {
        self.knobs.len()
    }

    /// Scenario parameters at the physical settings `x` (one value per knob).
    pub fn params_at(&self, x: &[f64]) -> Result<ScenarioParams> {
        if x.len() != self.knobs.len() {
            return Err(Error::arg(format!("expected {} settings, got {}", self.knobs.len(), x.len())));
        }
        let mut p = self.template;
        for (k, &v) in self.knobs.iter().zip(x) {
            k.apply(v, &mut p)?;
        }
        p.validate()?;
        Ok(p)
    }

    /// Exact g²(0) at the physical settings `x`.
    pub fn g2_at(&self, x: &[f64]) -> Result<f64> {
        g2_objective(&self.params_at(x)?)
    }
}
