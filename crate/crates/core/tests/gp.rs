mod common;

use approx::assert_abs_diff_eq;
use common::dense_gp::{self, matern_bessel, Family, Hyper};
use nalgebra::{DMatrix, DVector};
use proptest::prelude::*;
use qncal::gp::{
    fit, gram_matrix, kernel_eval, log_marginal_likelihood, optimize_hyperparameters_with, Dataset, HyperOptions,
    KernelConfig, KernelFamily, PriorMean, Standardization,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};

#[test]
fn matern52_matches_bessel_form() {
    let k = KernelConfig::new(KernelFamily::Matern52).with_length_scale(0.7);
    for r in [0.01, 0.1, 0.35, 0.7, 1.0, 2.5] {
        let ours = kernel_eval(&k, &[0.0], &[r]).unwrap();
        assert_abs_diff_eq!(ours, matern_bessel(2.5, r, 0.7), epsilon = 1e-9);
    }
    assert_abs_diff_eq!(matern_bessel(2.5, 1.0, 1.0), 0.5240, epsilon = 1e-4);
}

#[test]
fn five_point_fit_matches_dense_solve() {
    let mut rng = ChaCha8Rng::seed_from_u64(5);
    let x: Vec<Vec<f64>> = (0..5).map(|_| vec![rng.random(), rng.random()]).collect();
    let y: Vec<f64> = x.iter().map(|r| r[0] - 2.0 * r[1]).collect();
    let cfg = KernelConfig::new(KernelFamily::Rbf).with_length_scale(0.5).with_noise(1e-6);
    let post = fit(&Dataset::from_rows(&x, &y).unwrap(), &cfg, PriorMean::Zero).unwrap();
    let h = Hyper { family: Family::Rbf, length_scale: 0.5, output_scale: 1.0, noise: 1e-6, period: 1.0 };
    let (mu_ref, _) = dense_gp::predict(&h, &x, &y, &x);
    let (mu, _) = post.predict(&DMatrix::from_fn(5, 2, |i, j| x[i][j])).unwrap();
    for i in 0..5 {
        assert_abs_diff_eq!(mu[i], mu_ref[i], epsilon = 1e-9);
        assert_abs_diff_eq!(mu[i], y[i], epsilon = 1e-3);
    }
}

#[test]
fn single_point_shrinkage() {
    let data = Dataset::from_rows(&[vec![0.4]], &[3.0]).unwrap();
    let post = fit(&data, &KernelConfig::new(KernelFamily::Rbf).with_noise(1.0), PriorMean::Zero).unwrap();
    let (mu, _) = post.predict(&DMatrix::from_element(1, 1, 0.4)).unwrap();
    assert_abs_diff_eq!(mu[0], 1.5, epsilon = 1e-12);
    let post = fit(&data, &KernelConfig::new(KernelFamily::Rbf), PriorMean::Zero).unwrap();
    let (mu, var) = post.predict(&DMatrix::from_element(1, 1, 0.4)).unwrap();
    assert_abs_diff_eq!(mu[0], 3.0 / (1.0 + 1e-6), epsilon = 1e-12);
    assert_abs_diff_eq!(var[0], 1e-6 / (1.0 + 1e-6), epsilon = 1e-12);
}

fn sample_prior(l: f64, n: usize, rng: &mut ChaCha8Rng) -> Dataset {
    let x: Vec<Vec<f64>> = (0..n).map(|i| vec![(i as f64 + rng.random::<f64>()) / n as f64]).collect();
    let cfg = KernelConfig::new(KernelFamily::Matern52).with_length_scale(l);
    let xm = DMatrix::from_fn(n, 1, |i, _| x[i][0]);
    let mut k = gram_matrix(&cfg, &xm, &xm).unwrap();
    for i in 0..n {
        k[(i, i)] += 1e-4;
    }
    let chol = k.cholesky().unwrap();
    let z = DVector::from_fn(n, |_, _| StandardNormal.sample(rng));
    let y = chol.l() * z;
    Dataset::from_rows(&x, y.as_slice()).unwrap()
}

#[test]
fn length_scale_recovered_from_prior_draws() {
    let truth = 0.2;
    let mut hits = 0;
    for seed in 0..20 {
        let mut rng = ChaCha8Rng::seed_from_u64(100 + seed);
        let data = sample_prior(truth, 40, &mut rng);
        let fit = optimize_hyperparameters_with(&data, KernelFamily::Matern52, &HyperOptions::default(), &mut rng).unwrap();
        let l = fit.config.length_scale;
        if l > truth / 2.0 && l < truth * 2.0 {
            hits += 1;
        }
        let best_start = fit.start_log_likelihoods.iter().copied().filter(|v| v.is_finite()).fold(f64::MIN, f64::max);
        assert!(fit.log_likelihood >= best_start - 1e-9);
    }
    assert!(hits >= 16, "recovered length scale in {hits}/20 seeds");
}

#[test]
fn reported_likelihood_is_of_standardized_data() {
    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let data = sample_prior(0.3, 15, &mut rng);
    let fit = optimize_hyperparameters_with(&data, KernelFamily::Rbf, &HyperOptions::default(), &mut rng).unwrap();
    let z = Standardization::for_values(data.y()).apply(data.y());
    let zd = Dataset::new(data.x().clone(), z).unwrap();
    assert_abs_diff_eq!(log_marginal_likelihood(&zd, &fit.config).unwrap(), fit.log_likelihood, epsilon = 1e-8);
}

fn family() -> impl Strategy<Value = KernelFamily> {
    prop_oneof![Just(KernelFamily::Rbf), Just(KernelFamily::Matern52), Just(KernelFamily::Periodic)]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn gram_is_symmetric_psd(fam in family(), l in 0.05f64..2.0, p in 0.2f64..3.0, d in 1usize..4,
                             pts in prop::collection::vec(0.0f64..1.0, 30)) {
        let cfg = KernelConfig::new(fam).with_length_scale(l).with_period(p);
        let x = DMatrix::from_fn(10, d, |i, j| pts[(i * 3 + j) % 30]);
        let k = gram_matrix(&cfg, &x, &x).unwrap();
        prop_assert!((&k - k.transpose()).amax() < 1e-14);
        prop_assert!(k.symmetric_eigenvalues().min() >= -1e-10);
    }

    #[test]
    fn kernels_are_translation_invariant(fam in family(), a in prop::collection::vec(0.0f64..1.0, 3),
                                         b in prop::collection::vec(0.0f64..1.0, 3), s in -2.0f64..2.0) {
        let cfg = KernelConfig::new(fam).with_length_scale(0.4).with_period(0.9);
        let k0 = kernel_eval(&cfg, &a, &b).unwrap();
        let sa: Vec<f64> = a.iter().map(|v| v + s).collect();
        let sb: Vec<f64> = b.iter().map(|v| v + s).collect();
        prop_assert!((k0 - kernel_eval(&cfg, &sa, &sb).unwrap()).abs() < 1e-12);
        prop_assert!((k0 - kernel_eval(&cfg, &b, &a).unwrap()).abs() < 1e-15);
    }

    #[test]
    fn posterior_variance_is_bounded(n in 2usize..15, seed in 0u64..1000, fam in family()) {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let x: Vec<Vec<f64>> = (0..n).map(|_| vec![rng.random(), rng.random()]).collect();
        let y: Vec<f64> = (0..n).map(|_| rng.random()).collect();
        let cfg = KernelConfig::new(fam).with_length_scale(0.3).with_noise(1e-3);
        let post = fit(&Dataset::from_rows(&x, &y).unwrap(), &cfg, PriorMean::Zero).unwrap();
        let pts = DMatrix::from_fn(20, 2, |_, _| rng.random::<f64>());
        let (_, var) = post.predict(&pts).unwrap();
        let prior = post.standardization().scale.powi(2);
        for v in var.iter() {
            prop_assert!(*v >= 0.0 && *v <= prior * (1.0 + 1e-9));
        }
    }
}
