// Fit a Matérn-5/2 Gaussian process to noisy samples of a 1-D function and
// print the posterior band on a coarse grid.

use nalgebra::DMatrix;
use qncal::gp::{fit, Dataset, KernelConfig, KernelFamily, PriorMean};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qncal::Result<()> {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let xs: Vec<Vec<f64>> = (0..12).map(|i| vec![i as f64 / 11.0]).collect();
    let ys: Vec<f64> = xs.iter().map(|x| (6.0 * x[0]).sin() + 0.05 * (rng.random::<f64>() - 0.5)).collect();
    let data = Dataset::from_rows(&xs, &ys)?;

    let kernel = KernelConfig::new(KernelFamily::Matern52).with_length_scale(0.3).with_noise(1e-3);
    let post = fit(&data, &kernel, PriorMean::Zero)?;

    let grid = DMatrix::from_fn(11, 1, |i, _| i as f64 / 10.0);
    let (mean, var) = post.predict(&grid)?;
    println!("{:>5} {:>9} {:>9} {:>9}", "x", "truth", "mean", "2 sd");
    for i in 0..grid.nrows() {
        let x = grid[(i, 0)];
        println!("{x:5.2} {:9.4} {:9.4} {:9.4}", (6.0 * x).sin(), mean[i], 2.0 * var[i].sqrt());
    }
    Ok(())
}
