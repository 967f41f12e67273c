//! The Bayesian-optimization loop and a finite-difference gradient-descent baseline.
//!
//! Both optimizers work in unit-cube coordinates internally and record
//! physical settings. Every objective evaluation becomes one record entry, so
//! the two are compared per measurement.

mod domain;
mod record;

use std::time::Instant;

use nalgebra::DMatrix;
use rand::{Rng, SeedableRng};
use serde::{Deserialize, Serialize};

pub use domain::Domain;
pub use record::{read_jsonl, write_jsonl, RecordEntry, RunRecord, Theta};

use crate::acquisition::{propose_next, sobol_candidates, AcquisitionConfig, CandidateSource};
use crate::design::{generate_design, DesignScheme, DesignSpec};
use crate::error::{Error, Result};
use crate::gp::{fit, optimize_hyperparameters_with, Dataset, HyperBounds, HyperOptions, KernelConfig, KernelFamily, PriorMean};
use crate::measurement::Objective;
use crate::seed::StreamRng;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct BoConfig {
    pub n_init: usize,
    /// Total number of objective evaluations.
    pub budget: usize,
    pub design: DesignScheme,
    pub maximin_candidates: usize,
    pub kernel_family: KernelFamily,
    pub acquisition: AcquisitionConfig,
    /// Refit hyperparameters every this many iterations.
    pub refit_every: usize,
    pub hyper_bounds: HyperBounds,
    /// Random starts of the hyperparameter search (the previous optimum is always added).
    pub hyper_restarts: usize,
    pub hyper_max_iters: u64,
    /// Stop after this many evaluations without improvement.
    pub patience: Option<usize>,
    /// Store wall-clock times in the record (makes records non-reproducible byte for byte).
    pub record_timing: bool,
    pub seed: u64,
}

impl Default for BoConfig {
    fn default() -> Self {
        BoConfig {
            n_init: 12,
            budget: 30,
            design: DesignScheme::Lhs,
            maximin_candidates: 1000,
            kernel_family: KernelFamily::Matern52,
            acquisition: AcquisitionConfig::default(),
            refit_every: 1,
            hyper_bounds: HyperBounds::default(),
            hyper_restarts: 8,
            hyper_max_iters: 150,
            patience: None,
            record_timing: false,
            seed: 0,
        }
    }
}

impl BoConfig {
    /// Default initial-design size for a `dim`-dimensional problem.
    pub fn default_n_init(dim: usize) -> usize {
        match dim {
            0..=2 => 12,
            _ => 15,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_init < 2 {
            return Err(Error::arg(format!("n_init must be >= 2, got {}", self.n_init)));
        }
        if self.budget < self.n_init {
            return Err(Error::arg(format!("budget {} is below n_init {}", self.budget, self.n_init)));
        }
        if self.refit_every == 0 {
            return Err(Error::arg("refit_every must be >= 1"));
        }
        if self.hyper_restarts == 0 {
            return Err(Error::arg("hyper_restarts must be >= 1"));
        }
        self.hyper_bounds.validate()?;
        self.acquisition.validate()
    }
}

/// Evaluate with one retry; `Err` carries the message of the second failure.
fn evaluate_with_retry(objective: &mut dyn Objective, x: &[f64]) -> std::result::Result<f64, String> {
    match objective.evaluate(x) {
        Ok(y) => Ok(y),
        Err(first) => {
            log::warn!("evaluation at {x:?} failed ({first}); retrying once");
            objective.evaluate(x).map_err(|e| e.to_string())
        }
    }
}

struct Recorder {
    entries: Vec<RecordEntry>,
    best: f64,
    start: Instant,
    timing: bool,
}

impl Recorder {
    fn new(timing: bool) -> Self {
        Recorder { entries: Vec::new(), best: f64::INFINITY, start: Instant::now(), timing }
    }

    fn push(&mut self, x: Vec<f64>, y: f64, theta: Option<Theta>) {
        self.best = self.best.min(y);
        self.entries.push(RecordEntry {
            iter: self.entries.len() + 1,
            x,
            y,
            best: self.best,
            theta,
            t_wall_ms: self.timing.then(|| self.start.elapsed().as_secs_f64() * 1e3),
        });
    }
}

/// Index of the row of `nodes` nearest to `u`.
fn nearest_row(nodes: &DMatrix<f64>, u: &[f64]) -> usize {
    (0..nodes.nrows())
        .map(|i| (i, u.iter().enumerate().map(|(k, v)| (nodes[(i, k)] - v).powi(2)).sum::<f64>()))
        .fold((0, f64::INFINITY), |(bi, bd), (i, d)| if d < bd { (i, d) } else { (bi, bd) })
        .0
}

/// Run Bayesian optimization on `objective` over its own domain.
pub fn run_bo(objective: &mut dyn Objective, config: &BoConfig) -> Result<RunRecord> {
    config.validate()?;
    let domain = objective.domain().clone();
    domain.validate()?;
    let dim = domain.dim();
    let mut rng = StreamRng::seed_from_u64(config.seed);

    // tabulated objectives: candidates are exactly the nodes, in unit coordinates
    let nodes = objective.nodes().map(|m| {
        let mut u = m.clone();
        for i in 0..m.nrows() {
            let row: Vec<f64> = m.row(i).iter().copied().collect();
            for (k, v) in domain.normalize(&row).into_iter().enumerate() {
                u[(i, k)] = v;
            }
        }
        (m, u)
    });
    if config.acquisition.candidate_source == CandidateSource::Grid && nodes.is_none() {
        return Err(Error::arg("grid candidates need a tabulated objective"));
    }

    let record = RunRecord::new("bo", domain.clone(), serde_json::to_value(config)?, config.seed);
    let mut rec = Recorder::new(config.record_timing);
    let mut xs_unit: Vec<Vec<f64>> = Vec::new();
    let mut visited: Vec<bool> = nodes.as_ref().map_or(Vec::new(), |(m, _)| vec![false; m.nrows()]);

    let mut spec = DesignSpec::new(config.design, config.n_init, dim);
    spec.maximin_candidates = config.maximin_candidates;
    let design = generate_design(&spec, &mut rng)?;

    let mut evaluate = |u: Vec<f64>,
                        theta: Option<Theta>,
                        rec: &mut Recorder,
                        xs_unit: &mut Vec<Vec<f64>>,
                        visited: &mut Vec<bool>|
     -> std::result::Result<(), String> {
        let (u, x) = match &nodes {
            Some((phys, unit)) => {
                let i = nearest_row(unit, &u);
                visited[i] = true;
                (unit.row(i).iter().copied().collect(), phys.row(i).iter().copied().collect())
            }
            None => {
                let x = domain.denormalize(&u);
                (u, x)
            }
        };
        let y = evaluate_with_retry(objective, &x)?;
        rec.push(x, y, theta);
        xs_unit.push(u);
        Ok(())
    };

    for i in 0..config.n_init {
        let u: Vec<f64> = design.row(i).iter().copied().collect();
        if let Err(msg) = evaluate(u, None, &mut rec, &mut xs_unit, &mut visited) {
            return Ok(record.finish_incomplete(rec.entries, msg));
        }
    }

    let mut kernel: Option<KernelConfig> = None;
    let mut since_improvement = 0usize;
    let mut last_best = rec.best;
    while rec.entries.len() < config.budget {
        let ys: Vec<f64> = rec.entries.iter().map(|e| e.y).collect();
        let data = Dataset::from_rows(&xs_unit, &ys)?;
        let step = rec.entries.len() - config.n_init;
        if kernel.is_none() || step.is_multiple_of(config.refit_every) {
            let opts = HyperOptions {
                bounds: config.hyper_bounds,
                restarts: config.hyper_restarts,
                max_iters: config.hyper_max_iters,
                warm_start: kernel,
            };
            kernel = Some(optimize_hyperparameters_with(&data, config.kernel_family, &opts, &mut rng)?.config);
        }
        let k = kernel.expect("fitted above");
        let posterior = fit(&data, &k, PriorMean::Zero)?;

        let candidates = match &nodes {
            Some((_, unit)) => {
                if config.acquisition.exclude_visited {
                    let keep: Vec<usize> = (0..unit.nrows()).filter(|&i| !visited[i]).collect();
                    if keep.is_empty() {
                        log::info!("every grid node visited; stopping after {} evaluations", rec.entries.len());
                        break;
                    }
                    unit.select_rows(&keep)
                } else {
                    unit.clone()
                }
            }
            None => {
                let mut order: Vec<usize> = (0..ys.len()).collect();
                order.sort_by(|&a, &b| ys[a].total_cmp(&ys[b]));
                let incumbents: Vec<Vec<f64>> = order.iter().take(3).map(|&i| xs_unit[i].clone()).collect();
                sobol_candidates(
                    config.acquisition.candidate_count,
                    dim,
                    &incumbents,
                    config.acquisition.local_candidates,
                    &mut rng,
                )?
            }
        };
        let proposal = propose_next(&posterior, &config.acquisition, &candidates)?;
        if let Err(msg) = evaluate(proposal.point, Some(Theta::from(&k)), &mut rec, &mut xs_unit, &mut visited) {
            return Ok(record.finish_incomplete(rec.entries, msg));
        }

        if rec.best < last_best {
            last_best = rec.best;
            since_improvement = 0;
        } else {
            since_improvement += 1;
        }
        if config.patience.is_some_and(|p| since_improvement >= p) {
            log::info!("no improvement in {since_improvement} evaluations; stopping");
            break;
        }
    }
    Ok(record.finish(rec.entries))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct GdConfig {
    /// Multiplier of the gradient in unit-cube coordinates.
    pub step_size: f64,
    /// Forward-difference step in unit-cube coordinates.
    pub fd_step: f64,
    pub max_iterations: usize,
    /// Optional cap on objective evaluations.
    pub budget: Option<usize>,
    pub record_timing: bool,
    pub seed: u64,
}

impl Default for GdConfig {
    fn default() -> Self {
        GdConfig { step_size: 0.01, fd_step: 1e-3, max_iterations: 10, budget: None, record_timing: false, seed: 0 }
    }
}

impl GdConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_size > 0.0 && self.step_size.is_finite()) {
            return Err(Error::arg(format!("step_size must be > 0, got {}", self.step_size)));
        }
        if !(self.fd_step > 0.0 && self.fd_step < 0.5) {
            return Err(Error::arg(format!("fd_step must be in (0, 0.5), got {}", self.fd_step)));
        }
        if self.max_iterations == 0 {
            return Err(Error::arg("max_iterations must be >= 1"));
        }
        Ok(())
    }
}

/// Finite-difference gradient descent from a uniform random start.
///
/// Each iteration spends `D + 1` evaluations: the current point and one
/// forward step per axis (a backward step at the upper edge).
pub fn gradient_descent_baseline(objective: &mut dyn Objective, config: &GdConfig) -> Result<RunRecord> {
    config.validate()?;
    let domain = objective.domain().clone();
    domain.validate()?;
    let dim = domain.dim();
    let mut rng = StreamRng::seed_from_u64(config.seed);
    let record = RunRecord::new("gd", domain.clone(), serde_json::to_value(config)?, config.seed);
    let mut rec = Recorder::new(config.record_timing);
    let cap = config.budget.unwrap_or(usize::MAX).min(config.max_iterations.saturating_mul(dim + 1));

    let mut u: Vec<f64> = (0..dim).map(|_| rng.random::<f64>()).collect();
    'outer: for _ in 0..config.max_iterations {
        let mut values = Vec::with_capacity(dim + 1);
        let mut probes = vec![u.clone()];
        for k in 0..dim {
            let mut p = u.clone();
            p[k] = if u[k] + config.fd_step <= 1.0 { u[k] + config.fd_step } else { u[k] - config.fd_step };
            probes.push(p);
        }
        for p in probes.iter() {
            if rec.entries.len() >= cap {
                break 'outer;
            }
            let x = domain.denormalize(p);
            match evaluate_with_retry(objective, &x) {
                Ok(y) => {
                    rec.push(x, y, None);
                    values.push(y);
                }
                Err(msg) => return Ok(record.finish_incomplete(rec.entries, msg)),
            }
        }
        for k in 0..dim {
            let h = probes[k + 1][k] - u[k];
            let g = (values[k + 1] - values[0]) / h;
            u[k] = (u[k] - config.step_size * g).clamp(0.0, 1.0);
        }
    }
    Ok(record.finish(rec.entries))
}
