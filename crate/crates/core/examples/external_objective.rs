// Drive an external process over the JSON line protocol: each request is
// `{"x":[...]}` and the reply is `{"y":value}`.

use qncal::bayes_opt::{run_bo, BoConfig, Domain};
use qncal::measurement::ExternalObjective;

const SCRIPT: &str = r#"while read -r line; do
  echo "$line" | awk -F'[][,]' '{ printf "{\"y\":%.12g}\n", ($2-1)^2 + ($3+0.5)^2 }'
done"#;

fn main() -> qncal::Result<()> {
    let domain = Domain::new(&[(-2.0, 2.0), (-2.0, 2.0)])?;
    let mut obj = ExternalObjective::new(SCRIPT, domain)?;
    let rec = run_bo(&mut obj, &BoConfig { budget: 25, seed: 4, ..Default::default() })?;
    let b = rec.best_entry().expect("evaluations were made");
    println!("best {:.5} at ({:.3}, {:.3}); true minimum 0 at (1, -0.5)", b.y, b.x[0], b.x[1]);
    Ok(())
}
