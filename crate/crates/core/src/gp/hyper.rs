use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::Rng;
use serde::{Deserialize, Serialize};

use super::kernel::{KernelConfig, KernelFamily};
use super::posterior::{log_marginal_likelihood, Dataset, Standardization};
use crate::error::{Error, Result};

/// Box constraints on the searched hyperparameters.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperBounds {
    pub length_scale: (f64, f64),
    pub output_scale: (f64, f64),
    pub noise_variance: (f64, f64),
    pub period: (f64, f64),
}

impl Default for HyperBounds {
    fn default() -> Self {
        HyperBounds {
            length_scale: (0.05, 10.0),
            output_scale: (0.05, 20.0),
            noise_variance: (1e-8, 1.0),
            period: (0.1, 4.0),
        }
    }
}

impl HyperBounds {
    pub fn validate(&self) -> Result<()> {
        for (name, (lo, hi)) in [
            ("length_scale", self.length_scale),
            ("output_scale", self.output_scale),
            ("noise_variance", self.noise_variance),
            ("period", self.period),
        ] {
            if !(lo > 0.0 && hi >= lo && hi.is_finite()) {
                return Err(Error::arg(format!("invalid {name} bounds [{lo}, {hi}]")));
            }
        }
        Ok(())
    }

    fn log_box(&self, family: KernelFamily) -> Vec<(f64, f64)> {
        self.linear_box(family).into_iter().map(|(lo, hi)| (lo.ln(), hi.ln())).collect()
    }

    fn linear_box(&self, family: KernelFamily) -> Vec<(f64, f64)> {
        let mut b = vec![self.length_scale, self.output_scale, self.noise_variance];
        if family == KernelFamily::Periodic {
            b.push(self.period);
        }
        b
    }

    pub fn contains(&self, c: &KernelConfig) -> bool {
        let inside = |v: f64, (lo, hi): (f64, f64)| v >= lo && v <= hi;
        inside(c.length_scale, self.length_scale)
            && inside(c.output_scale, self.output_scale)
            && inside(c.noise_variance, self.noise_variance)
            && (c.family != KernelFamily::Periodic || inside(c.period, self.period))
    }
}

/// Search settings beyond the bounds.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct HyperOptions {
    pub bounds: HyperBounds,
    pub restarts: usize,
    /// Nelder-Mead iteration cap per start.
    pub max_iters: u64,
    /// Extra start point, e.g. the previous iteration's optimum.
    pub warm_start: Option<KernelConfig>,
}

impl Default for HyperOptions {
    fn default() -> Self {
        HyperOptions { bounds: HyperBounds::default(), restarts: 8, max_iters: 150, warm_start: None }
    }
}

/// Result of a hyperparameter search.
#[derive(Clone, Debug, PartialEq)]
pub struct HyperFit {
    pub config: KernelConfig,
    pub log_likelihood: f64,
    /// Log likelihood at each start point (NaN where it could not be evaluated).
    pub start_log_likelihoods: Vec<f64>,
}

struct NegLml<'a> {
    data: &'a Dataset,
    family: KernelFamily,
    bounds: Vec<(f64, f64)>,
    linear: Vec<(f64, f64)>,
}

impl NegLml<'_> {
    fn config(&self, p: &[f64]) -> KernelConfig {
        // clamp again after exp so rounding cannot step outside the linear bounds
        let c: Vec<f64> = p
            .iter()
            .zip(&self.bounds)
            .zip(&self.linear)
            .map(|((v, (lo, hi)), (a, b))| v.clamp(*lo, *hi).exp().clamp(*a, *b))
            .collect();
        let mut k = KernelConfig::new(self.family).with_length_scale(c[0]).with_output_scale(c[1]).with_noise(c[2]);
        if self.family == KernelFamily::Periodic {
            k = k.with_period(c[3]);
        }
        k
    }

    fn lml(&self, p: &[f64]) -> Option<f64> {
        log_marginal_likelihood(self.data, &self.config(p)).ok()
    }
}

impl CostFunction for NegLml<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, p: &Self::Param) -> std::result::Result<f64, ArgminError> {
        Ok(self.lml(p).map_or(1e300, |v| -v))
    }
}

fn to_log_params(c: &KernelConfig, bounds: &[(f64, f64)]) -> Vec<f64> {
    let mut v = vec![c.length_scale.ln(), c.output_scale.ln(), c.noise_variance.max(1e-300).ln()];
    if c.family == KernelFamily::Periodic {
        v.push(c.period.ln());
    }
    v.iter().zip(bounds).map(|(x, (lo, hi))| x.clamp(*lo, *hi)).collect()
}

/// Maximize the log marginal likelihood over the kernel hyperparameters.
///
/// Observations are standardized the same way [`super::fit`] does, so the
/// returned noise and output scale are in standardized units.
pub fn optimize_hyperparameters<R: Rng + ?Sized>(
    data: &Dataset,
    family: KernelFamily,
    bounds: &HyperBounds,
    restarts: usize,
    rng: &mut R,
) -> Result<KernelConfig> {
    let opts = HyperOptions { bounds: *bounds, restarts, ..HyperOptions::default() };
    optimize_hyperparameters_with(data, family, &opts, rng).map(|f| f.config)
}

pub fn optimize_hyperparameters_with<R: Rng + ?Sized>(
    data: &Dataset,
    family: KernelFamily,
    opts: &HyperOptions,
    rng: &mut R,
) -> Result<HyperFit> {
    if opts.restarts == 0 {
        return Err(Error::arg("at least one restart is required"));
    }
    opts.bounds.validate()?;
    let standardized = data.with_y(Standardization::for_values(data.y()).apply(data.y()));
    let bounds = opts.bounds.log_box(family);
    let linear = opts.bounds.linear_box(family);
    let problem = NegLml { data: &standardized, family, bounds: bounds.clone(), linear: linear.clone() };

    let mut starts: Vec<Vec<f64>> = (0..opts.restarts)
        .map(|_| bounds.iter().map(|(lo, hi)| if hi > lo { rng.random_range(*lo..=*hi) } else { *lo }).collect())
        .collect();
    if let Some(w) = opts.warm_start.filter(|w| w.family == family) {
        starts.push(to_log_params(&w, &bounds));
    }

    let mut best: Option<(f64, Vec<f64>)> = None;
    let mut start_lls = Vec::with_capacity(starts.len());
    for start in starts {
        let start_ll = problem.lml(&start);
        start_lls.push(start_ll.unwrap_or(f64::NAN));
        let mut candidate = start_ll.map(|ll| (ll, start.clone()));

        let simplex = initial_simplex(&start, &bounds);
        let solver = NelderMead::new(simplex)
            .with_sd_tolerance(1e-7)
            .map_err(|e| Error::numeric(format!("Nelder-Mead setup: {e}")))?;
        let run = Executor::new(NegLml { data: &standardized, family, bounds: bounds.clone(), linear: linear.clone() }, solver)
            .configure(|s| s.max_iters(opts.max_iters))
            .run();
        if let Ok(res) = run {
            if let Some(p) = res.state().get_best_param() {
                let p: Vec<f64> = p.iter().zip(&bounds).map(|(v, (lo, hi))| v.clamp(*lo, *hi)).collect();
                if let Some(ll) = problem.lml(&p) {
                    if candidate.as_ref().is_none_or(|(c, _)| ll > *c) {
                        candidate = Some((ll, p));
                    }
                }
            }
        }
        if let Some((ll, p)) = candidate {
            if best.as_ref().is_none_or(|(b, _)| ll > *b) {
                best = Some((ll, p));
            }
        }
    }

    let (log_likelihood, p) =
        best.ok_or_else(|| Error::numeric("no restart produced a finite log marginal likelihood"))?;
    Ok(HyperFit { config: problem.config(&p), log_likelihood, start_log_likelihoods: start_lls })
}

/// Axis-aligned simplex stepping toward the interior of the log box.
fn initial_simplex(start: &[f64], bounds: &[(f64, f64)]) -> Vec<Vec<f64>> {
    let mut simplex = vec![start.to_vec()];
    for (i, (lo, hi)) in bounds.iter().enumerate() {
        let step = (0.15 * (hi - lo)).max(1e-3);
        let mut v = start.to_vec();
        v[i] = if v[i] + step <= *hi { v[i] + step } else { v[i] - step };
        simplex.push(v);
    }
    simplex
}
