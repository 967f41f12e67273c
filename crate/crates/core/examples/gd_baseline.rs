// Finite-difference gradient descent and Bayesian optimization on the same
// evaluation budget.

use qncal::bayes_opt::{gradient_descent_baseline, run_bo, BoConfig, GdConfig};
use qncal::bench::Scenario;
use qncal::measurement::make_objective;

fn main() -> qncal::Result<()> {
    let sc = Scenario::thermal2d();
    let spec = sc.objective_spec(sc.noise("none", None)?);
    let budget = 30;
    for seed in 0..3 {
        let mut gd_obj = make_objective(&spec, seed)?;
        let gd = gradient_descent_baseline(
            gd_obj.as_mut(),
            &GdConfig { max_iterations: budget, budget: Some(budget), seed, ..Default::default() },
        )?;
        let mut bo_obj = make_objective(&spec, seed)?;
        let bo = run_bo(bo_obj.as_mut(), &BoConfig { budget, seed, ..Default::default() })?;
        println!("seed {seed}: gradient descent {:.4}, Bayesian optimization {:.4}", gd.best(), bo.best());
    }
    Ok(())
}
