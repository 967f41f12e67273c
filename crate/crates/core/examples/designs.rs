// Space-filling initial designs and their smallest pairwise distance.

use qncal::design::{generate_design, min_pairwise_distance, DesignScheme, DesignSpec};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

fn main() -> qncal::Result<()> {
    let (n, d) = (12, 2);
    for scheme in DesignScheme::ALL {
        let mut rng = ChaCha8Rng::seed_from_u64(3);
        let m = generate_design(&DesignSpec::new(scheme, n, d), &mut rng)?;
        println!("{:>8}: min distance {:.4}", scheme.name(), min_pairwise_distance(&m));
        if scheme == DesignScheme::MaximinLhs {
            for r in m.row_iter() {
                println!("          ({:.3}, {:.3})", r[0], r[1]);
            }
        }
    }
    Ok(())
}
