// Maximum-likelihood kernel hyperparameters for each kernel family.

use qncal::gp::{log_marginal_likelihood, optimize_hyperparameters_with, Dataset, HyperOptions, KernelFamily};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn main() -> qncal::Result<()> {
    let xs: Vec<Vec<f64>> = (0..20).map(|i| vec![i as f64 / 19.0]).collect();
    let mut noise = ChaCha8Rng::seed_from_u64(9);
    let ys: Vec<f64> = xs.iter().map(|x| (2.0 * std::f64::consts::PI * x[0] / 0.5).cos() + 0.1 * (noise.random::<f64>() - 0.5)).collect();
    let data = Dataset::from_rows(&xs, &ys)?;

    for family in [KernelFamily::Rbf, KernelFamily::Matern52, KernelFamily::Periodic] {
        let mut rng = ChaCha8Rng::seed_from_u64(1);
        let fit = optimize_hyperparameters_with(&data, family, &HyperOptions::default(), &mut rng)?;
        let c = fit.config;
        print!("{:>9}: l = {:.3}, s = {:.3}, noise = {:.2e}", family.name(), c.length_scale, c.output_scale, c.noise_variance);
        if family == KernelFamily::Periodic {
            print!(", period = {:.3}", c.period);
        }
        println!(", log ML = {:.2}", fit.log_likelihood);
        // the reported likelihood is the one of the standardized data
        let std = qncal::gp::Standardization::for_values(data.y());
        let z = Dataset::new(data.x().clone(), std.apply(data.y()))?;
        assert!((log_marginal_likelihood(&z, &c)? - fit.log_likelihood).abs() < 1e-6);
    }
    Ok(())
}
