//! The `qncal` command line.
//!
//! Every subcommand accepts `--config <file.json>`: a JSON object whose keys
//! are long flag names (`"budget": 40`, `"curve-out": "c.csv"`). Flags given on
//! the command line override values from the file.

use std::path::PathBuf;

use clap::{Args, Parser, Subcommand};

use crate::acquisition::{AcquisitionConfig, AcquisitionKind};
use crate::bayes_opt::{gradient_descent_baseline, run_bo, write_jsonl, BoConfig, Domain, GdConfig};
use crate::bench::{
    compare_configs, generate_baseline, reference_minimum, run_benchmark, BenchmarkSpec, CompareOptions, GridSpec,
    Scenario, SweepAxis,
};
use crate::design::DesignScheme;
use crate::error::{Error, Result};
use crate::gp::KernelFamily;
use crate::measurement::{make_objective, GridTable, Noise, ObjectiveSource, ObjectiveSpec};

#[derive(Parser, Debug)]
#[command(name = "qncal", version, about = "Bayesian-optimization calibration of two-photon interference")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Subcommand, Debug)]
pub enum Command {
    /// Tabulate a simulated scenario on a grid and write it as CSV.
    Simulate(SimulateArgs),
    /// Run one Bayesian optimization.
    Optimize(OptimizeArgs),
    /// Repeat the optimization over seeded trials and aggregate convergence.
    Benchmark(BenchmarkArgs),
    /// Benchmark variants along one configuration axis.
    Compare(CompareArgs),
    /// Finite-difference gradient descent for comparison.
    GdBaseline(GdArgs),
}

#[derive(Args, Debug, Clone)]
pub struct ConfigArg {
    /// JSON file supplying flag values.
    #[arg(long)]
    pub config: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
pub struct SimulateArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    /// sv2d, sv3d, thermal2d or custom:<file>
    #[arg(long)]
    pub scenario: String,
    /// Nodes per axis, e.g. 35x10 (defaults to the scenario's grid).
    #[arg(long)]
    pub grid: Option<String>,
    #[arg(long, default_value = "none")]
    pub noise: String,
    /// Integration time in seconds (Poisson noise).
    #[arg(long)]
    pub t_int: Option<f64>,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct ObjectiveArgs {
    /// sim:<scenario>, grid:<csv> or exec:<command>
    #[arg(long)]
    pub objective: String,
    /// Noise for simulator objectives: none or poisson.
    #[arg(long, default_value = "none")]
    pub noise: String,
    #[arg(long)]
    pub t_int: Option<f64>,
    /// Physical bounds for exec objectives, e.g. 0:15,0:90.
    #[arg(long, allow_hyphen_values = true)]
    pub domain: Option<String>,
}

#[derive(Args, Debug, Clone)]
pub struct BoArgs {
    #[arg(long, default_value_t = 30)]
    pub budget: usize,
    /// Initial design size (12 for up to 2 dimensions, 15 above).
    #[arg(long)]
    pub init: Option<usize>,
    #[arg(long, default_value = "lhs")]
    pub design: String,
    #[arg(long, default_value = "matern52")]
    pub kernel: String,
    #[arg(long, default_value = "lcb")]
    pub acq: String,
    #[arg(long, default_value_t = 2.0)]
    pub beta: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Allow re-measuring grid nodes that were already visited.
    #[arg(long)]
    pub allow_revisit: bool,
    /// Record wall-clock times.
    #[arg(long)]
    pub timing: bool,
}

#[derive(Args, Debug, Clone)]
pub struct OptimizeArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub bo: BoArgs,
    #[arg(long)]
    pub out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct BenchmarkArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub bo: BoArgs,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long)]
    pub curve_out: PathBuf,
    /// Per-trial records as JSON lines.
    #[arg(long)]
    pub out: Option<PathBuf>,
    /// Points per axis of the reference scan for simulator objectives (0 disables it).
    #[arg(long, default_value_t = 0)]
    pub reference_scan: usize,
}

#[derive(Args, Debug, Clone)]
pub struct CompareArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[command(flatten)]
    pub bo: BoArgs,
    #[arg(long)]
    pub axis: String,
    /// Comma-separated variant names (defaults to every variant of the axis).
    #[arg(long)]
    pub variants: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub trials: usize,
    #[arg(long, default_value_t = 30)]
    pub at_iter: usize,
    #[arg(long)]
    pub report_out: PathBuf,
}

#[derive(Args, Debug, Clone)]
pub struct GdArgs {
    #[command(flatten)]
    pub config: ConfigArg,
    #[command(flatten)]
    pub objective: ObjectiveArgs,
    #[arg(long, default_value_t = 0.01)]
    pub step: f64,
    #[arg(long, default_value_t = 1e-3)]
    pub fd_step: f64,
    /// Number of objective evaluations.
    #[arg(long, default_value_t = 30)]
    pub budget: usize,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long)]
    pub out: PathBuf,
}

fn parse_domain(s: &str) -> Result<Domain> {
    let bounds: Result<Vec<(f64, f64)>> = s
        .split(',')
        .map(|axis| {
            let (lo, hi) = axis.split_once(':').ok_or_else(|| Error::arg(format!("domain axis `{axis}` must be lo:hi")))?;
            let p = |v: &str| v.trim().parse::<f64>().map_err(|_| Error::arg(format!("bad number `{v}` in domain")));
            Ok((p(lo)?, p(hi)?))
        })
        .collect();
    Domain::new(&bounds?)
}

/// Objective spec plus the scenario behind it, if simulated.
fn objective_spec(a: &ObjectiveArgs) -> Result<(ObjectiveSpec, Option<Scenario>)> {
    if let Some(name) = a.objective.strip_prefix("sim:") {
        let sc = Scenario::from_name(name)?;
        let noise = sc.noise(&a.noise, a.t_int)?;
        return Ok((sc.objective_spec(noise), Some(sc)));
    }
    if a.noise != "none" {
        return Err(Error::arg("--noise applies to sim: objectives only"));
    }
    let domain = a.domain.as_deref().map(parse_domain).transpose()?;
    if let Some(path) = a.objective.strip_prefix("grid:") {
        return Ok((ObjectiveSpec { source: ObjectiveSource::Grid { path: path.into() }, noise: Noise::None, domain }, None));
    }
    if let Some(cmd) = a.objective.strip_prefix("exec:") {
        if domain.is_none() {
            return Err(Error::arg("exec: objectives need --domain lo:hi,..."));
        }
        return Ok((ObjectiveSpec { source: ObjectiveSource::External { command: cmd.into() }, noise: Noise::None, domain }, None));
    }
    Err(Error::arg(format!("objective `{}` must start with sim:, grid: or exec:", a.objective)))
}

fn objective_dim(spec: &ObjectiveSpec) -> Result<usize> {
    match (&spec.source, &spec.domain) {
        (_, Some(d)) => Ok(d.dim()),
        (ObjectiveSource::Grid { path }, None) => Ok(GridTable::load(path)?.dim()),
        _ => Err(Error::arg("objective has no domain")),
    }
}

fn bo_config(a: &BoArgs, dim: usize, grid: bool) -> Result<BoConfig> {
    let kind: AcquisitionKind = a.acq.parse()?;
    let cfg = BoConfig {
        n_init: a.init.unwrap_or_else(|| BoConfig::default_n_init(dim)),
        budget: a.budget,
        design: a.design.parse::<DesignScheme>()?,
        kernel_family: a.kernel.parse::<KernelFamily>()?,
        acquisition: AcquisitionConfig { kind, beta: a.beta, exclude_visited: grid && !a.allow_revisit, ..Default::default() },
        record_timing: a.timing,
        seed: a.seed,
        ..Default::default()
    };
    cfg.validate()?;
    Ok(cfg)
}

fn is_grid(spec: &ObjectiveSpec) -> bool {
    matches!(spec.source, ObjectiveSource::Grid { .. })
}

fn reference_for(spec: &ObjectiveSpec, scenario: Option<&Scenario>, scan: usize) -> Result<Option<f64>> {
    if let ObjectiveSource::Grid { path } = &spec.source {
        return Ok(Some(GridTable::load(path)?.minimum().0));
    }
    match scenario {
        Some(sc) if scan > 0 => Ok(Some(reference_minimum(&sc.map, &sc.domain, scan)?.value)),
        _ => Ok(None),
    }
}

fn incomplete(rec: &crate::bayes_opt::RunRecord) -> Error {
    if let Some(f) = &rec.failure {
        eprintln!("{f}");
    }
    Error::objective(format!("run stopped after {} evaluations; partial record written", rec.entries.len()))
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let sc = Scenario::from_name(&a.scenario)?;
    let grid = match a.grid.as_deref().or(sc.grid.as_deref()) {
        Some(g) => GridSpec::parse(g)?,
        None => return Err(Error::arg("scenario has no default grid; pass --grid")),
    };
    let mut noise = sc.noise(&a.noise, a.t_int)?;
    if let Noise::Poisson(c) = &mut noise {
        c.seed = a.seed;
    }
    let table = generate_baseline(&sc, &grid, &noise, a.seed)?;
    table.save(&a.out)?;
    let (min, at) = table.minimum();
    println!("wrote {} nodes to {}; minimum {min} at {at:?}", table.len(), a.out.display());
    Ok(())
}

fn optimize(a: OptimizeArgs) -> Result<()> {
    let (spec, _) = objective_spec(&a.objective)?;
    let cfg = bo_config(&a.bo, objective_dim(&spec)?, is_grid(&spec))?;
    let mut obj = make_objective(&spec, cfg.seed)?;
    let rec = run_bo(obj.as_mut(), &cfg)?;
    write_jsonl(&a.out, std::slice::from_ref(&rec))?;
    match rec.best_entry() {
        Some(b) => println!("best {} at {:?} after {} evaluations", b.y, b.x, rec.entries.len()),
        None => println!("no evaluations"),
    }
    if rec.incomplete {
        return Err(incomplete(&rec));
    }
    Ok(())
}

fn benchmark(a: BenchmarkArgs) -> Result<()> {
    let (objective, scenario) = objective_spec(&a.objective)?;
    let bo = bo_config(&a.bo, objective_dim(&objective)?, is_grid(&objective))?;
    let reference = reference_for(&objective, scenario.as_ref(), a.reference_scan)?;
    let spec = BenchmarkSpec { objective, bo, n_trials: a.trials, master_seed: a.bo.seed };
    let res = run_benchmark(&spec, reference)?;
    res.curve.write_csv(&a.curve_out)?;
    if let Some(out) = &a.out {
        write_jsonl(out, &res.records)?;
    }
    let last = res.curve.points.last().expect("non-empty curve");
    print!("{} trials ({} failed): mean best {} (std {}) after {} evaluations", spec.n_trials, res.failures, last.mean, last.std, last.iter);
    match res.curve.relative_gap(last.iter) {
        Some(g) => println!("; reference {} (gap {:.2}%)", reference.unwrap_or_default(), 100.0 * g),
        None => println!(),
    }
    Ok(())
}

fn compare(a: CompareArgs) -> Result<()> {
    let axis: SweepAxis = a.axis.parse()?;
    let variants: Vec<String> = match &a.variants {
        Some(v) => v.split(',').map(|s| s.trim().to_string()).filter(|s| !s.is_empty()).collect(),
        None => axis.all_variants(),
    };
    let (objective, _) = objective_spec(&a.objective)?;
    let bo = bo_config(&a.bo, objective_dim(&objective)?, is_grid(&objective))?;
    let spec = BenchmarkSpec { objective, bo, n_trials: a.trials, master_seed: a.bo.seed };
    let opts = CompareOptions { at_iteration: a.at_iter, ..Default::default() };
    let (report, _) = compare_configs(&spec, axis, &variants, &opts)?;
    report.write_json(&a.report_out)?;
    for name in &report.ranking {
        let v = report.variant(name).expect("ranked variant exists");
        println!("{name:>10}  mean {:.6}  90% CI [{:.6}, {:.6}]", v.mean, v.ci_low, v.ci_high);
    }
    Ok(())
}

fn gd_baseline(a: GdArgs) -> Result<()> {
    let (spec, _) = objective_spec(&a.objective)?;
    let dim = objective_dim(&spec)?;
    let cfg = GdConfig {
        step_size: a.step,
        fd_step: a.fd_step,
        max_iterations: a.budget.div_ceil(dim + 1).max(1),
        budget: Some(a.budget),
        record_timing: false,
        seed: a.seed,
    };
    let mut obj = make_objective(&spec, a.seed)?;
    let rec = gradient_descent_baseline(obj.as_mut(), &cfg)?;
    write_jsonl(&a.out, std::slice::from_ref(&rec))?;
    println!("best {} after {} evaluations", rec.best(), rec.entries.len());
    if rec.incomplete {
        return Err(incomplete(&rec));
    }
    Ok(())
}

/// Turn a JSON config object into `--flag value` tokens.
fn config_tokens(path: &std::path::Path) -> Result<Vec<String>> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::arg(format!("cannot read config {}: {e}", path.display())))?;
    let value: serde_json::Value =
        serde_json::from_str(&text).map_err(|e| Error::arg(format!("config {}: {e}", path.display())))?;
    let obj = value.as_object().ok_or_else(|| Error::arg("config file must hold a JSON object"))?;
    let mut out = Vec::new();
    for (key, v) in obj {
        let flag = format!("--{}", key.replace('_', "-"));
        match v {
            serde_json::Value::Bool(true) => out.push(flag),
            serde_json::Value::Bool(false) | serde_json::Value::Null => {}
            serde_json::Value::String(s) => out.extend([flag, s.clone()]),
            serde_json::Value::Number(n) => out.extend([flag, n.to_string()]),
            other => return Err(Error::arg(format!("config key `{key}` has unsupported value {other}"))),
        }
    }
    Ok(out)
}

/// Splice config-file flags in front of the command-line flags so the latter win.
fn expand_config(args: Vec<String>) -> Result<Vec<String>> {
    let pos = args.iter().position(|a| a == "--config" || a.starts_with("--config="));
    let Some(pos) = pos else { return Ok(args) };
    let (path, consumed) = match args[pos].strip_prefix("--config=") {
        Some(p) => (p.to_string(), 1),
        None => (args.get(pos + 1).cloned().ok_or_else(|| Error::arg("--config needs a file"))?, 2),
    };
    let tokens = config_tokens(std::path::Path::new(&path))?;
    let mut rest: Vec<String> = args[..pos].to_vec();
    rest.extend(args[pos + consumed..].iter().cloned());
    // program name and subcommand come first
    let split = rest.len().min(2);
    let mut out: Vec<String> = rest[..split].to_vec();
    out.extend(tokens);
    out.extend(rest[split..].iter().cloned());
    Ok(out)
}

pub fn execute(cli: Cli) -> Result<()> {
    match cli.command {
        Command::Simulate(a) => simulate(a),
        Command::Optimize(a) => optimize(a),
        Command::Benchmark(a) => benchmark(a),
        Command::Compare(a) => compare(a),
        Command::GdBaseline(a) => gd_baseline(a),
    }
}

/// Parse `args` (including the program name), run, and return the exit code.
pub fn run(args: Vec<String>) -> i32 {
    let args = match expand_config(args) {
        Ok(a) => a,
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let _ = e.print();
            return if e.use_stderr() { 2 } else { 0 };
        }
    };
    match execute(cli) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn s(v: &[&str]) -> Vec<String> {
        v.iter().map(|x| x.to_string()).collect()
    }

    #[test]
    fn config_flags_come_before_cli_flags() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("c.json");
        std::fs::write(&p, r#"{"budget": 40, "kernel": "rbf", "allow_revisit": true, "init": null}"#).unwrap();
        let args = expand_config(s(&["qncal", "optimize", "--config", p.to_str().unwrap(), "--budget", "50"])).unwrap();
        assert_eq!(&args[..2], &s(&["qncal", "optimize"])[..]);
        let cli = Cli::try_parse_from(
            args.into_iter().chain(s(&["--objective", "sim:sv2d", "--out", "x.jsonl"])).collect::<Vec<_>>(),
        )
        .unwrap();
        let Command::Optimize(o) = cli.command else { panic!("wrong subcommand") };
        assert_eq!(o.bo.budget, 50);
        assert_eq!(o.bo.kernel, "rbf");
        assert!(o.bo.allow_revisit);
    }

    #[test]
    fn domain_parsing() {
        assert_eq!(parse_domain("0:15, -1:1").unwrap(), Domain::new(&[(0.0, 15.0), (-1.0, 1.0)]).unwrap());
        assert!(parse_domain("0-1").is_err());
        assert!(parse_domain("1:0").is_err());
    }

    #[test]
    fn objective_prefixes() {
        let a = |o: &str| ObjectiveArgs { objective: o.into(), noise: "none".into(), t_int: None, domain: None };
        assert!(objective_spec(&a("sim:sv2d")).is_ok());
        assert!(objective_spec(&a("exec:cat")).is_err());
        assert!(objective_spec(&a("nope")).is_err());
        let mut b = a("grid:x.csv");
        b.noise = "poisson".into();
        assert!(objective_spec(&b).is_err());
    }

    #[test]
    fn exit_codes() {
        assert_eq!(run(s(&["qncal", "optimize"])), 2);
        assert_eq!(run(s(&["qncal", "simulate", "--scenario", "bogus", "--out", "/dev/null"])), 2);
        assert_eq!(run(s(&["qncal", "optimize", "--objective", "grid:/nonexistent.csv", "--out", "/dev/null"])), 3);
    }
}
