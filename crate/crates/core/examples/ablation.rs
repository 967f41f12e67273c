// Compare acquisition functions on the thermal scenario with bootstrap
// confidence intervals on the mean best value.

use qncal::bayes_opt::BoConfig;
use qncal::bench::{compare_configs, BenchmarkSpec, CompareOptions, Scenario, SweepAxis};

fn main() -> qncal::Result<()> {
    let sc = Scenario::thermal2d();
    let spec = BenchmarkSpec {
        objective: sc.objective_spec(sc.noise("poisson", None)?),
        bo: BoConfig { budget: 20, ..Default::default() },
        n_trials: 8,
        master_seed: 2,
    };
    let opts = CompareOptions { at_iteration: 20, resamples: 2000, ..Default::default() };
    let (report, _) = compare_configs(&spec, SweepAxis::Acquisition, &SweepAxis::Acquisition.all_variants(), &opts)?;
    for name in &report.ranking {
        let v = report.variant(name).expect("ranked");
        println!("{name:>4}: {:.4} [{:.4}, {:.4}]", v.mean, v.ci_low, v.ci_high);
    }
    Ok(())
}
