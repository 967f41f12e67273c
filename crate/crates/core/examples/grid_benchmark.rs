// Tabulate a noisy baseline grid, then benchmark the optimizer on it
// over seeded trials and print the mean convergence curve.

use qncal::bayes_opt::BoConfig;
use qncal::acquisition::AcquisitionConfig;
use qncal::bench::{generate_baseline, run_benchmark, BenchmarkSpec, GridSpec, Scenario};
use qncal::measurement::{Noise, ObjectiveSource, ObjectiveSpec};

fn main() -> qncal::Result<()> {
    let sc = Scenario::sv2d();
    let dir = std::env::temp_dir().join(format!("qncal-grid-{}", std::process::id()));
    std::fs::create_dir_all(&dir)?;
    let path = dir.join("sv2d.csv");

    let noisy = generate_baseline(&sc, &GridSpec::parse("35x10")?, &sc.noise("poisson", None)?, 1)?;
    noisy.save(&path)?;
    let clean = generate_baseline(&sc, &GridSpec::parse("35x10")?, &Noise::None, 1)?;
    let reference = clean.minimum().0;

    let spec = BenchmarkSpec {
        objective: ObjectiveSpec { source: ObjectiveSource::Grid { path: path.clone() }, noise: Noise::None, domain: None },
        bo: BoConfig {
            budget: 30,
            acquisition: AcquisitionConfig { exclude_visited: true, ..Default::default() },
            ..Default::default()
        },
        n_trials: 10,
        master_seed: 0,
    };
    let res = run_benchmark(&spec, Some(reference))?;
    for p in res.curve.points.iter().step_by(5) {
        println!("iter {:2}: mean best {:.3} (min {:.3}, max {:.3})", p.iter, p.mean, p.min, p.max);
    }
    println!("noiseless grid minimum {reference:.3}; gap {:.2}%", 100.0 * res.curve.relative_gap(30).unwrap_or(f64::NAN));
    std::fs::remove_dir_all(dir)?;
    Ok(())
}
