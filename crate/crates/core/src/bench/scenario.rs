use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::bayes_opt::Domain;
use crate::error::{Error, Result};
use crate::measurement::{CountConfig, Noise, ObjectiveSource, ObjectiveSpec};
use crate::optics::{InputKind, Knob, KnobMap, ScenarioParams};

/// A simulated experiment: knob mappings, their physical ranges and default noise.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Scenario {
    pub name: String,
    pub map: KnobMap,
    pub domain: Domain,
    /// Count settings used when Poisson noise is requested.
    #[serde(default = "preset_counts")]
    pub counts: CountConfig,
    /// Default baseline grid, e.g. `"35x10"`.
    #[serde(default)]
    pub grid: Option<String>,
}

/// Count settings of the presets: 60 s integration with a 1 MHz window rate.
pub fn preset_counts() -> CountConfig {
    CountConfig { integration_time: 60.0, coincidence_window: 2e-9, window_rate: Some(1e6), seed: 0 }
}

const STAGE: Knob = Knob::Stage { x0: 7.5, width: 1.5 };
const WAVEPLATE: Knob = Knob::Waveplate { theta0: 62.5, eta_max: 0.8 };

impl Scenario {
    pub const PRESETS: [&'static str; 3] = ["sv2d", "sv3d", "thermal2d"];

    /// Delay stage (mm) and half-waveplate angle (deg), squeezed-vacuum source.
    pub fn sv2d() -> Self {
        Scenario {
            name: "sv2d".into(),
            map: KnobMap {
                template: ScenarioParams { squeezing: 0.2, eta_d: 0.8, ..ScenarioParams::default() },
                knobs: vec![STAGE, WAVEPLATE],
            },
            domain: Domain::new(&[(0.0, 15.0), (0.0, 90.0)]).expect("static bounds").with_names(["stage_mm", "hwp_deg"]),
            counts: preset_counts(),
            grid: Some("35x10".into()),
        }
    }

    /// `sv2d` plus the filter detuning (GHz) blending in the non-degenerate pair.
    pub fn sv3d() -> Self {
        let mut s = Scenario::sv2d();
        s.name = "sv3d".into();
        s.map.knobs.push(Knob::Detuning);
        s.map.template.detuning = Some(0.0);
        s.domain = Domain::new(&[(0.0, 15.0), (0.0, 90.0), (0.0, 6.0)])
            .expect("static bounds")
            .with_names(["stage_mm", "hwp_deg", "detuning_ghz"]);
        s.grid = Some("35x10x7".into());
        s
    }

    /// Thermal inputs; stage offset `x` with overlap `exp(-x^2)` and upper transmittance.
    pub fn thermal2d() -> Self {
        Scenario {
            name: "thermal2d".into(),
            map: KnobMap {
                template: ScenarioParams {
                    input_kind: InputKind::Thermal,
                    mu: 0.04,
                    mu_prime: 0.04,
                    eta_d: 0.2,
                    ..ScenarioParams::default()
                },
                knobs: vec![Knob::Stage { x0: 0.0, width: 1.0 }, Knob::EtaU],
            },
            domain: Domain::new(&[(0.0, 2.5), (0.0, 1.0)]).expect("static bounds").with_names(["x", "eta_u"]),
            counts: preset_counts(),
            grid: Some("26x21".into()),
        }
    }

    /// `sv2d`, `sv3d`, `thermal2d` or `custom:<json file>`.
    pub fn from_name(name: &str) -> Result<Self> {
        match name {
            "sv2d" => Ok(Scenario::sv2d()),
            "sv3d" => Ok(Scenario::sv3d()),
            "thermal2d" => Ok(Scenario::thermal2d()),
            other => match other.strip_prefix("custom:") {
                Some(path) => Scenario::load(Path::new(path)),
                None => Err(Error::arg(format!("unknown scenario `{other}` (expected sv2d, sv3d, thermal2d or custom:<file>)"))),
            },
        }
    }

    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::arg(format!("cannot read scenario {}: {e}", path.display())))?;
        let s: Scenario = serde_json::from_str(&text)
            .map_err(|e| Error::arg(format!("scenario {}: {e}", path.display())))?;
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        self.domain.validate()?;
        if self.domain.dim() != self.map.dim() {
            return Err(Error::arg(format!("scenario has {} knobs but {} domain axes", self.map.dim(), self.domain.dim())));
        }
        self.map.template.validate()?;
        self.counts.validate()
    }

    pub fn dim(&self) -> usize {
        self.map.dim()
    }

    /// Noise model for a noise name (`none` or `poisson`) at integration time `t_int`.
    pub fn noise(&self, name: &str, t_int: Option<f64>) -> Result<Noise> {
        match name {
            "none" => Ok(Noise::None),
            "poisson" => {
                let mut c = self.counts;
                if let Some(t) = t_int {
                    c.integration_time = t;
                }
                c.validate()?;
                Ok(Noise::Poisson(c))
            }
            other => Err(Error::arg(format!("unknown noise `{other}` (expected none or poisson)"))),
        }
    }

    /// Simulator objective over this scenario.
    pub fn objective_spec(&self, noise: Noise) -> ObjectiveSpec {
        ObjectiveSpec {
            source: ObjectiveSource::Simulator { map: self.map.clone() },
            noise,
            domain: Some(self.domain.clone()),
        }
    }
}

/// Per-axis node counts parsed from `"35x10"`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct GridSpec {
    pub counts: Vec<usize>,
}

impl GridSpec {
    pub fn parse(s: &str) -> Result<Self> {
        let counts: std::result::Result<Vec<usize>, _> = s.split(['x', 'X']).map(|p| p.trim().parse::<usize>()).collect();
        let counts = counts.map_err(|_| Error::arg(format!("grid spec `{s}` must look like 35x10")))?;
        if counts.is_empty() || counts.contains(&0) {
            return Err(Error::arg(format!("grid spec `{s}` needs positive counts")));
        }
        Ok(GridSpec { counts })
    }

    /// Evenly spaced nodes including both ends (the midpoint for a single node).
    pub fn axes(&self, domain: &Domain) -> Result<Vec<Vec<f64>>> {
        if self.counts.len() != domain.dim() {
            return Err(Error::arg(format!("grid has {} axes, domain has {}", self.counts.len(), domain.dim())));
        }
        Ok(self
            .counts
            .iter()
            .zip(domain.lower.iter().zip(&domain.upper))
            .map(|(&n, (&lo, &hi))| {
                if n == 1 {
                    vec![0.5 * (lo + hi)]
                } else {
                    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
                }
            })
            .collect())
    }
}
