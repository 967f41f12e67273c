//! Baseline grids, repeated-trial benchmarks and ablation sweeps.

mod scenario;

use std::fmt;
use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;
use std::str::FromStr;

use argmin::core::{CostFunction, Error as ArgminError, Executor, State};
use argmin::solver::neldermead::NelderMead;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

pub use scenario::{preset_counts, GridSpec, Scenario};

use crate::acquisition::AcquisitionKind;
use crate::bayes_opt::{run_bo, BoConfig, Domain, RunRecord};
use crate::design::DesignScheme;
use crate::error::{Error, Result};
use crate::gp::KernelFamily;
use crate::measurement::{make_objective, observe, GridTable, Noise, ObjectiveSpec};
use crate::optics::{blended_probabilities, KnobMap};
use crate::seed::{derive_seed, stream};

/// Tabulate the scenario objective on a rectangular grid.
///
/// Without noise the values equal the exact g²(0). With Poisson noise node `k`
/// draws from its own stream derived from `seed`, so the table does not depend
/// on evaluation order.
pub fn generate_baseline(scenario: &Scenario, grid: &GridSpec, noise: &Noise, seed: u64) -> Result<GridTable> {
    scenario.validate()?;
    let axes = grid.axes(&scenario.domain)?;
    let skeleton = GridTable::new(axes.clone(), vec![0.0; grid.counts.iter().product()])?;
    let values: Result<Vec<f64>> = (0..skeleton.len())
        .into_par_iter()
        .map(|k| {
            let p = blended_probabilities(&scenario.map.params_at(&skeleton.node(k))?)?;
            observe(&p, noise, &mut stream(seed, k as u64))
        })
        .collect();
    GridTable::new(axes, values?)
}

/// Smallest exact objective value found by a dense scan plus local polishing.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReferenceMinimum {
    pub value: f64,
    pub x: Vec<f64>,
}

struct ExactCost<'a> {
    map: &'a KnobMap,
    domain: &'a Domain,
}

impl CostFunction for ExactCost<'_> {
    type Param = Vec<f64>;
    type Output = f64;

    fn cost(&self, u: &Vec<f64>) -> std::result::Result<f64, ArgminError> {
        let u: Vec<f64> = u.iter().map(|v| v.clamp(0.0, 1.0)).collect();
        Ok(self.map.g2_at(&self.domain.denormalize(&u)).unwrap_or(f64::INFINITY))
    }
}

/// Scan `points_per_axis` evenly spaced nodes per axis, then run Nelder-Mead
/// from the best few nodes.
pub fn reference_minimum(map: &KnobMap, domain: &Domain, points_per_axis: usize) -> Result<ReferenceMinimum> {
    domain.validate()?;
    if points_per_axis < 2 {
        return Err(Error::arg("reference scan needs at least 2 points per axis"));
    }
    let spec = GridSpec { counts: vec![points_per_axis; domain.dim()] };
    let table = GridTable::new(spec.axes(domain)?, vec![0.0; points_per_axis.pow(domain.dim() as u32)])?;
    let scanned: Vec<(f64, Vec<f64>)> = (0..table.len())
        .into_par_iter()
        .map(|k| {
            let x = table.node(k);
            (map.g2_at(&x).unwrap_or(f64::INFINITY), x)
        })
        .collect();
    let mut order: Vec<usize> = (0..scanned.len()).filter(|&i| scanned[i].0.is_finite()).collect();
    if order.is_empty() {
        return Err(Error::numeric("objective is not finite anywhere on the reference scan"));
    }
    order.sort_by(|&a, &b| scanned[a].0.total_cmp(&scanned[b].0));
    let mut best = ReferenceMinimum { value: scanned[order[0]].0, x: scanned[order[0]].1.clone() };
    let h = 1.0 / (points_per_axis - 1) as f64;
    for &i in order.iter().take(4) {
        let u0 = domain.normalize(&scanned[i].1);
        let mut simplex = vec![u0.clone()];
        for k in 0..u0.len() {
            let mut v = u0.clone();
            v[k] = if v[k] + h <= 1.0 { v[k] + h } else { v[k] - h };
            simplex.push(v);
        }
        let solver = NelderMead::new(simplex).with_sd_tolerance(1e-12).map_err(|e| Error::numeric(e.to_string()))?;
        let res = Executor::new(ExactCost { map, domain }, solver).configure(|s| s.max_iters(400)).run();
        if let Ok(res) = res {
            if let Some(u) = res.state().get_best_param() {
                let x = domain.denormalize(&u.iter().map(|v| v.clamp(0.0, 1.0)).collect::<Vec<_>>());
                if let Ok(v) = map.g2_at(&x) {
                    if v < best.value {
                        best = ReferenceMinimum { value: v, x };
                    }
                }
            }
        }
    }
    Ok(best)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkSpec {
    pub objective: ObjectiveSpec,
    pub bo: BoConfig,
    pub n_trials: usize,
    pub master_seed: u64,
}

impl BenchmarkSpec {
    pub fn validate(&self) -> Result<()> {
        if self.n_trials == 0 {
            return Err(Error::arg("n_trials must be >= 1"));
        }
        self.objective.validate()?;
        self.bo.validate()
    }

    /// Seed of trial `index`.
    pub fn trial_seed(&self, index: usize) -> u64 {
        derive_seed(self.master_seed, index as u64)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub iter: usize,
    pub mean: f64,
    pub std: f64,
    pub min: f64,
    pub max: f64,
}

/// Best-so-far statistics across trials, one point per evaluation.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ConvergenceCurve {
    pub points: Vec<CurvePoint>,
    pub n_trials: usize,
    pub reference: Option<f64>,
}

impl ConvergenceCurve {
    /// Aggregate best-so-far curves of equal length `len`; shorter curves are
    /// carried forward at their last value.
    pub fn from_curves(curves: &[Vec<f64>], len: usize, reference: Option<f64>) -> Result<Self> {
        if curves.is_empty() || curves.iter().any(Vec::is_empty) {
            return Err(Error::arg("need at least one non-empty curve"));
        }
        let n = curves.len() as f64;
        let points = (0..len)
            .map(|i| {
                let vals: Vec<f64> = curves.iter().map(|c| c[i.min(c.len() - 1)]).collect();
                let mean = vals.iter().sum::<f64>() / n;
                let var = if vals.len() > 1 {
                    vals.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1.0)
                } else {
                    0.0
                };
                CurvePoint {
                    iter: i + 1,
                    mean,
                    std: var.sqrt(),
                    min: vals.iter().copied().fold(f64::INFINITY, f64::min),
                    max: vals.iter().copied().fold(f64::NEG_INFINITY, f64::max),
                }
            })
            .collect();
        Ok(ConvergenceCurve { points, n_trials: curves.len(), reference })
    }

    /// Mean best-so-far after `iter` evaluations (1-based, clamped to the curve).
    pub fn mean_at(&self, iter: usize) -> f64 {
        self.points[iter.clamp(1, self.points.len()) - 1].mean
    }

    /// `|mean(iter) - reference| / |reference|`, if a reference is known.
    pub fn relative_gap(&self, iter: usize) -> Option<f64> {
        self.reference.map(|r| (self.mean_at(iter) - r).abs() / r.abs())
    }

    pub fn write_csv(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        writeln!(w, "iteration,mean,std,min,max")?;
        for p in &self.points {
            writeln!(w, "{},{:?},{:?},{:?},{:?}", p.iter, p.mean, p.std, p.min, p.max)?;
        }
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug)]
pub struct BenchmarkResult {
    pub curve: ConvergenceCurve,
    /// Records of completed trials in trial order.
    pub records: Vec<RunRecord>,
    /// Trials that errored or stopped incomplete (excluded from the curve).
    pub failures: usize,
}

impl BenchmarkResult {
    /// Best-so-far of every completed trial after `iter` evaluations.
    pub fn best_at(&self, iter: usize) -> Vec<f64> {
        self.records
            .iter()
            .map(|r| {
                let c = r.best_curve();
                c[iter.clamp(1, c.len()) - 1]
            })
            .collect()
    }
}

/// Run `n_trials` seeded optimizations in parallel and aggregate their curves.
pub fn run_benchmark(spec: &BenchmarkSpec, reference: Option<f64>) -> Result<BenchmarkResult> {
    spec.validate()?;
    let outcomes: Vec<Result<RunRecord>> = (0..spec.n_trials)
        .into_par_iter()
        .map(|t| {
            let seed = spec.trial_seed(t);
            let mut objective = make_objective(&spec.objective, seed)?;
            run_bo(objective.as_mut(), &BoConfig { seed, ..spec.bo.clone() })
        })
        .collect();
    let mut records = Vec::with_capacity(outcomes.len());
    let mut failures = 0;
    for (t, o) in outcomes.into_iter().enumerate() {
        match o {
            Ok(r) if !r.incomplete && !r.entries.is_empty() => records.push(r),
            Ok(r) => {
                failures += 1;
                log::warn!("trial {t} incomplete: {}", r.failure.unwrap_or_default());
            }
            Err(e @ Error::Argument(_)) => return Err(e),
            Err(e) => {
                failures += 1;
                log::warn!("trial {t} failed: {e}");
            }
        }
    }
    if records.is_empty() {
        return Err(Error::objective(format!("all {} trials failed", spec.n_trials)));
    }
    if failures > 0 {
        log::warn!("{failures} of {} trials excluded from the curve", spec.n_trials);
    }
    let curves: Vec<Vec<f64>> = records.iter().map(RunRecord::best_curve).collect();
    let curve = ConvergenceCurve::from_curves(&curves, spec.bo.budget, reference)?;
    Ok(BenchmarkResult { curve, records, failures })
}

/// Configuration axis swept by [`compare_configs`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum SweepAxis {
    Kernel,
    Acquisition,
    Design,
}

impl fmt::Display for SweepAxis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            SweepAxis::Kernel => "kernel",
            SweepAxis::Acquisition => "acquisition",
            SweepAxis::Design => "design",
        })
    }
}

impl FromStr for SweepAxis {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "kernel" => Ok(SweepAxis::Kernel),
            "acquisition" | "acq" => Ok(SweepAxis::Acquisition),
            "design" => Ok(SweepAxis::Design),
            other => Err(Error::arg(format!("unknown sweep axis `{other}`"))),
        }
    }
}

impl SweepAxis {
    /// Every variant name of the axis, in the default sweep order.
    pub fn all_variants(self) -> Vec<String> {
        match self {
            SweepAxis::Kernel => KernelFamily::ALL.iter().map(|k| k.name().to_string()).collect(),
            SweepAxis::Acquisition => AcquisitionKind::ALL.iter().map(|k| k.name().to_string()).collect(),
            SweepAxis::Design => DesignScheme::ALL.iter().map(|k| k.name().to_string()).collect(),
        }
    }

    /// `base` with the axis set to `variant`.
    pub fn apply(self, base: &BoConfig, variant: &str) -> Result<BoConfig> {
        let mut c = base.clone();
        match self {
            SweepAxis::Kernel => c.kernel_family = variant.parse()?,
            SweepAxis::Acquisition => c.acquisition.kind = variant.parse()?,
            SweepAxis::Design => c.design = variant.parse()?,
        }
        Ok(c)
    }
}

/// Percentile bootstrap interval of the mean.
pub fn bootstrap_mean_interval<R: Rng + ?Sized>(values: &[f64], resamples: usize, level: f64, rng: &mut R) -> (f64, f64) {
    let n = values.len();
    if n == 0 || resamples == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mut means: Vec<f64> = (0..resamples)
        .map(|_| (0..n).map(|_| values[rng.random_range(0..n)]).sum::<f64>() / n as f64)
        .collect();
    means.sort_by(f64::total_cmp);
    let tail = (1.0 - level) / 2.0;
    let at = |q: f64| means[((q * (resamples - 1) as f64).round() as usize).min(resamples - 1)];
    (at(tail), at(1.0 - tail))
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VariantSummary {
    pub name: String,
    pub mean: f64,
    pub ci_low: f64,
    pub ci_high: f64,
    pub failures: usize,
    pub curve: ConvergenceCurve,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ComparisonReport {
    pub axis: SweepAxis,
    /// Evaluation count at which variants are ranked.
    pub at_iteration: usize,
    pub confidence: f64,
    pub resamples: usize,
    pub variants: Vec<VariantSummary>,
    /// Variant names from lowest to highest mean.
    pub ranking: Vec<String>,
}

impl ComparisonReport {
    pub fn variant(&self, name: &str) -> Option<&VariantSummary> {
        self.variants.iter().find(|v| v.name == name)
    }

    /// Variants whose interval lies entirely below the interval of `name`.
    pub fn significantly_better_than(&self, name: &str) -> Vec<&str> {
        let Some(v) = self.variant(name) else { return Vec::new() };
        self.variants.iter().filter(|o| o.ci_high < v.ci_low).map(|o| o.name.as_str()).collect()
    }

    pub fn write_json(&self, path: &Path) -> Result<()> {
        let mut w = BufWriter::new(File::create(path)?);
        serde_json::to_writer_pretty(&mut w, self)?;
        writeln!(w)?;
        w.flush()?;
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CompareOptions {
    pub at_iteration: usize,
    pub resamples: usize,
    pub confidence: f64,
}

impl Default for CompareOptions {
    fn default() -> Self {
        CompareOptions { at_iteration: 30, resamples: 10_000, confidence: 0.9 }
    }
}

/// Benchmark each variant with the same master seed and rank them by mean
/// best-so-far at `opts.at_iteration`, with bootstrap intervals.
pub fn compare_configs(
    base: &BenchmarkSpec,
    axis: SweepAxis,
    variants: &[String],
    opts: &CompareOptions,
) -> Result<(ComparisonReport, Vec<BenchmarkResult>)> {
    if variants.is_empty() {
        return Err(Error::arg("no variants to compare"));
    }
    if !(opts.confidence > 0.0 && opts.confidence < 1.0) || opts.resamples == 0 {
        return Err(Error::arg("confidence must be in (0, 1) and resamples >= 1"));
    }
    let configs: Vec<BoConfig> = variants.iter().map(|v| axis.apply(&base.bo, v)).collect::<Result<_>>()?;
    let mut summaries = Vec::new();
    let mut results = Vec::new();
    for (i, (name, bo)) in variants.iter().zip(configs).enumerate() {
        let spec = BenchmarkSpec { bo, ..base.clone() };
        let res = run_benchmark(&spec, None)?;
        let vals = res.best_at(opts.at_iteration);
        let mean = vals.iter().sum::<f64>() / vals.len() as f64;
        let (ci_low, ci_high) =
            bootstrap_mean_interval(&vals, opts.resamples, opts.confidence, &mut stream(base.master_seed, 0xB00_0000 + i as u64));
        summaries.push(VariantSummary {
            name: name.clone(),
            mean,
            ci_low,
            ci_high,
            failures: res.failures,
            curve: res.curve.clone(),
        });
        results.push(res);
    }
    let mut ranking: Vec<&VariantSummary> = summaries.iter().collect();
    ranking.sort_by(|a, b| a.mean.total_cmp(&b.mean));
    let ranking = ranking.into_iter().map(|v| v.name.clone()).collect();
    let report = ComparisonReport {
        axis,
        at_iteration: opts.at_iteration,
        confidence: opts.confidence,
        resamples: opts.resamples,
        variants: summaries,
        ranking,
    };
    Ok((report, results))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::acquisition::AcquisitionConfig;
    use crate::measurement::ObjectiveSource;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    #[test]
    fn curve_statistics() {
        let c = ConvergenceCurve::from_curves(&[vec![3.0, 1.0], vec![5.0, 3.0, 2.0]], 3, Some(1.0)).unwrap();
        assert_eq!(c.points[0].mean, 4.0);
        assert_eq!(c.points[2].mean, 1.5);
        assert_eq!(c.points[2].min, 1.0);
        assert!((c.points[0].std - 2f64.sqrt()).abs() < 1e-15);
        assert_eq!(c.relative_gap(3), Some(0.5));
    }

    #[test]
    fn bootstrap_brackets_the_mean() {
        let v: Vec<f64> = (0..50).map(|i| i as f64).collect();
        let (lo, hi) = bootstrap_mean_interval(&v, 2000, 0.9, &mut ChaCha8Rng::seed_from_u64(0));
        assert!(lo < 24.5 && 24.5 < hi && hi - lo < 12.0);
        assert_eq!(bootstrap_mean_interval(&[2.0; 5], 100, 0.9, &mut ChaCha8Rng::seed_from_u64(0)), (2.0, 2.0));
    }

    #[test]
    fn noiseless_baseline_matches_objective() {
        let s = Scenario::sv2d();
        let t = generate_baseline(&s, &GridSpec::parse("4x3").unwrap(), &Noise::None, 0).unwrap();
        for k in 0..t.len() {
            assert_eq!(t.values()[k], s.map.g2_at(&t.node(k)).unwrap());
        }
    }

    #[test]
    fn small_benchmark_and_sweep() {
        let s = Scenario::sv2d();
        let spec = BenchmarkSpec {
            objective: ObjectiveSpec {
                source: ObjectiveSource::Simulator { map: s.map.clone() },
                noise: Noise::None,
                domain: Some(s.domain.clone()),
            },
            bo: BoConfig {
                n_init: 4,
                budget: 8,
                hyper_restarts: 2,
                acquisition: AcquisitionConfig { candidate_count: 128, local_candidates: 32, ..Default::default() },
                ..Default::default()
            },
            n_trials: 3,
            master_seed: 11,
        };
        let r = run_benchmark(&spec, None).unwrap();
        assert_eq!(r.curve.points.len(), 8);
        assert_eq!(r.records.len(), 3);
        assert!(r.curve.points.windows(2).all(|w| w[1].mean <= w[0].mean));
        let opts = CompareOptions { at_iteration: 8, resamples: 200, confidence: 0.9 };
        let (rep, _) = compare_configs(&spec, SweepAxis::Acquisition, &["lcb".into(), "ei".into()], &opts).unwrap();
        assert_eq!(rep.ranking.len(), 2);
        assert!(rep.variants.iter().all(|v| v.ci_low <= v.mean && v.mean <= v.ci_high));
        assert!(compare_configs(&spec, SweepAxis::Kernel, &["bogus".into()], &opts).is_err());
    }
}
