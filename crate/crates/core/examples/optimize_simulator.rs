// Bayesian optimization of the delay stage and waveplate on the squeezed
// vacuum simulator.

use qncal::bayes_opt::{run_bo, BoConfig};
use qncal::bench::Scenario;
use qncal::measurement::make_objective;

fn main() -> qncal::Result<()> {
    let sc = Scenario::sv2d();
    let noise = sc.noise("poisson", None)?;
    let cfg = BoConfig { budget: 30, seed: 5, ..Default::default() };
    let mut obj = make_objective(&sc.objective_spec(noise), cfg.seed)?;
    let rec = run_bo(obj.as_mut(), &cfg)?;

    for e in &rec.entries {
        println!("{:3}  x = [{:6.2}, {:6.2}]  y = {:8.3}  best = {:8.3}", e.iter, e.x[0], e.x[1], e.y, e.best);
    }
    let b = rec.best_entry().expect("evaluations were made");
    println!("best measured g2 {:.3} at stage {:.2} mm, waveplate {:.1} deg", b.y, b.x[0], b.x[1]);
    println!("noiseless g2 there: {:.3}", sc.map.g2_at(&b.x)?);
    Ok(())
}
