//! Shot-noisy measurements and objective handles for the optimizer.

mod counts;
mod external;
mod grid;

use std::path::PathBuf;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

pub use counts::{g2_estimate, sample_counts, CountConfig, Counts};
pub use external::ExternalProcess;
pub use grid::GridTable;

use crate::bayes_opt::Domain;
use crate::error::{Error, Result};
use crate::optics::{blended_probabilities, ClickProbabilities, KnobMap};
use crate::seed::{stream, StreamRng};

/// A black box mapping physical settings to a scalar to be minimized.
pub trait Objective: Send {
    fn domain(&self) -> &Domain;

    fn evaluate(&mut self, x: &[f64]) -> Result<f64>;

    /// Physical settings the objective is defined on, if it is tabulated.
    fn nodes(&self) -> Option<DMatrix<f64>> {
        None
    }

    fn dim(&self) -> usize {
        self.domain().dim()
    }
}

/// Objective from a plain function.
pub struct FnObjective<F> {
    domain: Domain,
    f: F,
}

impl<F: FnMut(&[f64]) -> f64 + Send> FnObjective<F> {
    pub fn new(domain: Domain, f: F) -> Self {
        FnObjective { domain, f }
    }
}

impl<F: FnMut(&[f64]) -> f64 + Send> Objective for FnObjective<F> {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        let y = (self.f)(x);
        if y.is_finite() {
            Ok(y)
        } else {
            Err(Error::objective(format!("non-finite value at {x:?}")))
        }
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize, Default)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum Noise {
    #[default]
    None,
    Poisson(CountConfig),
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase")]
pub enum ObjectiveSource {
    Simulator { map: KnobMap },
    Grid { path: PathBuf },
    External { command: String },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ObjectiveSpec {
    pub source: ObjectiveSource,
    #[serde(default)]
    pub noise: Noise,
    /// Required for simulator and external sources; grids supply their own.
    #[serde(default)]
    pub domain: Option<Domain>,
}

impl ObjectiveSpec {
    pub fn validate(&self) -> Result<()> {
        if let Noise::Poisson(c) = &self.noise {
            c.validate()?;
            if !matches!(self.source, ObjectiveSource::Simulator { .. }) {
                return Err(Error::arg("Poisson noise applies to simulator objectives only"));
            }
        }
        match (&self.source, &self.domain) {
            (ObjectiveSource::Grid { .. }, Some(d)) | (ObjectiveSource::External { .. }, Some(d)) => d.validate(),
            (ObjectiveSource::Simulator { map }, Some(d)) => {
                d.validate()?;
                if d.dim() != map.dim() {
                    return Err(Error::arg(format!("domain has {} axes for {} knobs", d.dim(), map.dim())));
                }
                Ok(())
            }
            (ObjectiveSource::Grid { .. }, None) => Ok(()),
            (_, None) => Err(Error::arg("simulator and external objectives need a domain")),
        }
    }
}

/// Gaussian-state simulator behind knob mappings, optionally with Poisson counts.
pub struct SimulatorObjective {
    map: KnobMap,
    domain: Domain,
    noise: Noise,
    rng: StreamRng,
}

impl SimulatorObjective {
    pub fn new(map: KnobMap, domain: Domain, noise: Noise, seed: u64) -> Result<Self> {
        domain.validate()?;
        if domain.dim() != map.dim() {
            return Err(Error::arg(format!("domain has {} axes for {} knobs", domain.dim(), map.dim())));
        }
        let stream_seed = match noise {
            Noise::Poisson(c) => c.seed,
            Noise::None => 0,
        };
        Ok(SimulatorObjective { map, domain, noise, rng: stream(stream_seed, seed) })
    }

    pub fn map(&self) -> &KnobMap {
        &self.map
    }

    /// Exact g²(0), ignoring the noise setting.
    pub fn exact(&self, x: &[f64]) -> Result<f64> {
        self.map.g2_at(x)
    }
}

impl Objective for SimulatorObjective {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        let p = blended_probabilities(&self.map.params_at(x)?)?;
        observe(&p, &self.noise, &mut self.rng)
    }
}

/// One g²(0) reading: exact without noise, otherwise estimated from Poisson
/// counts. A reading without singles is repeated once with doubled T.
pub fn observe<R: rand::Rng + ?Sized>(p: &ClickProbabilities, noise: &Noise, rng: &mut R) -> Result<f64> {
    match noise {
        Noise::None => p.g2(),
        Noise::Poisson(cfg) => {
            let c = sample_counts(p, cfg, rng)?;
            match g2_estimate(c.s1, c.s2, c.c12, cfg) {
                Err(Error::InsufficientCounts { .. }) => {
                    let longer = cfg.with_integration_time(2.0 * cfg.integration_time);
                    log::debug!("no singles; repeating with T = {}", longer.integration_time);
                    let c = sample_counts(p, &longer, rng)?;
                    g2_estimate(c.s1, c.s2, c.c12, &longer)
                }
                other => other,
            }
        }
    }
}

/// Nearest-node lookup into a tabulated grid.
pub struct GridObjective {
    table: GridTable,
    domain: Domain,
}

impl GridObjective {
    pub fn new(table: GridTable) -> Result<Self> {
        let bounds: Vec<(f64, f64)> = table
            .bounds()
            .into_iter()
            .map(|(lo, hi)| if lo < hi { (lo, hi) } else { (lo - 0.5, hi + 0.5) })
            .collect();
        Ok(GridObjective { domain: Domain::new(&bounds)?, table })
    }

    pub fn table(&self) -> &GridTable {
        &self.table
    }
}

impl Objective for GridObjective {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        self.table.lookup(x)
    }

    fn nodes(&self) -> Option<DMatrix<f64>> {
        Some(self.table.nodes())
    }
}

/// Objective answered by a child process over the line protocol.
pub struct ExternalObjective {
    process: ExternalProcess,
    domain: Domain,
}

impl ExternalObjective {
    pub fn new(command: &str, domain: Domain) -> Result<Self> {
        domain.validate()?;
        Ok(ExternalObjective { process: ExternalProcess::spawn(command)?, domain })
    }
}

impl Objective for ExternalObjective {
    fn domain(&self) -> &Domain {
        &self.domain
    }

    fn evaluate(&mut self, x: &[f64]) -> Result<f64> {
        self.process.query(x)
    }
}

/// Build the objective handle described by `spec`; `seed` selects the noise stream.
pub fn make_objective(spec: &ObjectiveSpec, seed: u64) -> Result<Box<dyn Objective>> {
    spec.validate()?;
    Ok(match &spec.source {
        ObjectiveSource::Simulator { map } => Box::new(SimulatorObjective::new(
            map.clone(),
            spec.domain.clone().expect("validated"),
            spec.noise,
            seed,
        )?),
        ObjectiveSource::Grid { path } => {
            let obj = GridObjective::new(GridTable::load(path)?)?;
            if let Some(d) = &spec.domain {
                if d.dim() != obj.dim() {
                    return Err(Error::arg(format!("domain has {} axes, grid has {}", d.dim(), obj.dim())));
                }
            }
            Box::new(obj)
        }
        ObjectiveSource::External { command } => {
            Box::new(ExternalObjective::new(command, spec.domain.clone().expect("validated"))?)
        }
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::optics::{Knob, ScenarioParams};

    fn sim_spec(noise: Noise) -> ObjectiveSpec {
        ObjectiveSpec {
            source: ObjectiveSource::Simulator {
                map: KnobMap { template: ScenarioParams::default(), knobs: vec![Knob::Overlap, Knob::EtaU] },
            },
            noise,
            domain: Some(Domain::new(&[(0.0, 1.0), (0.05, 1.0)]).unwrap()),
        }
    }

    #[test]
    fn noiseless_simulator_is_pure() {
        let mut obj = make_objective(&sim_spec(Noise::None), 3).unwrap();
        let a = obj.evaluate(&[0.7, 0.4]).unwrap();
        assert_eq!(a, obj.evaluate(&[0.7, 0.4]).unwrap());
    }

    #[test]
    fn poisson_simulator_scatters_near_exact() {
        let cfg = CountConfig { integration_time: 1.0, window_rate: Some(1e6), ..Default::default() };
        let mut noisy = make_objective(&sim_spec(Noise::Poisson(cfg)), 1).unwrap();
        let exact = make_objective(&sim_spec(Noise::None), 1).unwrap().evaluate(&[1.0, 0.8]).unwrap();
        let ys: Vec<f64> = (0..50).map(|_| noisy.evaluate(&[1.0, 0.8]).unwrap()).collect();
        let mean = ys.iter().sum::<f64>() / ys.len() as f64;
        assert!((mean / exact - 1.0).abs() < 0.05, "{mean} vs {exact}");
        assert!(ys.windows(2).any(|w| w[0] != w[1]));
    }

    #[test]
    fn spec_validation() {
        let mut s = sim_spec(Noise::None);
        s.domain = None;
        assert!(matches!(make_objective(&s, 0), Err(Error::Argument(_))));
        let mut s = sim_spec(Noise::None);
        s.domain = Some(Domain::unit(3));
        assert!(make_objective(&s, 0).is_err());
        let s = ObjectiveSpec {
            source: ObjectiveSource::External { command: "cat".into() },
            noise: Noise::Poisson(CountConfig::default()),
            domain: Some(Domain::unit(1)),
        };
        assert!(s.validate().is_err());
    }

    #[test]
    fn spec_json_shape() {
        let s = sim_spec(Noise::Poisson(CountConfig::default()));
        let j = serde_json::to_value(&s).unwrap();
        assert_eq!(j["source"]["type"], "simulator");
        assert_eq!(j["noise"]["type"], "poisson");
        let back: ObjectiveSpec = serde_json::from_value(j).unwrap();
        assert_eq!(back, s);
    }

    #[test]
    fn fn_objective_rejects_nan() {
        let mut f = FnObjective::new(Domain::unit(1), |_x: &[f64]| f64::NAN);
        assert!(matches!(f.evaluate(&[0.5]), Err(Error::Objective(_))));
    }
}
