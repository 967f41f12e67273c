//! Textbook GP regression with an explicit matrix inverse.

use nalgebra::{DMatrix, DVector};

#[derive(Clone, Copy, Debug)]
pub enum Family {
    Rbf,
    Matern52,
    Periodic,
}

#[derive(Clone, Copy, Debug)]
pub struct Hyper {
    pub family: Family,
    pub length_scale: f64,
    pub output_scale: f64,
    pub noise: f64,
    pub period: f64,
}

pub fn kernel(h: &Hyper, a: &[f64], b: &[f64]) -> f64 {
    let r = a.iter().zip(b).map(|(u, v)| (u - v).powi(2)).sum::<f64>().sqrt();
    let l = h.length_scale;
    let c = match h.family {
        Family::Rbf => (-r * r / (2.0 * l * l)).exp(),
        Family::Matern52 => {
            let s5 = 5f64.sqrt();
            (1.0 + s5 * r / l + 5.0 * r * r / (3.0 * l * l)) * (-s5 * r / l).exp()
        }
        Family::Periodic => a
            .iter()
            .zip(b)
            .map(|(u, v)| (-2.0 * (std::f64::consts::PI * (u - v) / h.period).sin().powi(2) / (l * l)).exp())
            .product(),
    };
    h.output_scale * c
}

/// Posterior mean and variance at `points`, with observations standardized to
/// zero mean and unit sample deviation and a zero prior mean.
pub fn predict(h: &Hyper, x: &[Vec<f64>], y: &[f64], points: &[Vec<f64>]) -> (Vec<f64>, Vec<f64>) {
    let n = y.len();
    let mean = y.iter().sum::<f64>() / n as f64;
    let sd = if n > 1 { (y.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (n - 1) as f64).sqrt() } else { 0.0 };
    let (shift, scale) = if n > 1 && sd > 0.0 { (mean, sd) } else { (0.0, 1.0) };
    let z = DVector::from_iterator(n, y.iter().map(|v| (v - shift) / scale));
    let k = DMatrix::from_fn(n, n, |i, j| kernel(h, &x[i], &x[j]) + if i == j { h.noise } else { 0.0 });
    let kinv = k.try_inverse().expect("invertible Gram matrix");
    let w = &kinv * &z;
    let mut mu = Vec::new();
    let mut var = Vec::new();
    for p in points {
        let ks = DVector::from_iterator(n, x.iter().map(|xi| kernel(h, p, xi)));
        mu.push(shift + scale * ks.dot(&w));
        var.push(scale * scale * (kernel(h, p, p) - ks.dot(&(&kinv * &ks))));
    }
    (mu, var)
}

/// Modified Bessel function of the second kind by quadrature of
/// `K_ν(z) = ∫₀^∞ exp(-z cosh t) cosh(ν t) dt`.
pub fn bessel_k(nu: f64, z: f64) -> f64 {
    let mut upper = 1.0;
    while z * f64::cosh(upper) - nu * upper < 60.0 {
        upper += 0.5;
    }
    let n = 20_000;
    let h = upper / n as f64;
    let f = |t: f64| (-z * t.cosh()).exp() * (nu * t).cosh();
    let mut s = f(0.0) + f(upper);
    for i in 1..n {
        s += f(i as f64 * h) * if i % 2 == 1 { 4.0 } else { 2.0 };
    }
    s * h / 3.0
}

/// General Matérn correlation from the Bessel form.
pub fn matern_bessel(nu: f64, r: f64, l: f64) -> f64 {
    if r == 0.0 {
        return 1.0;
    }
    let a = (2.0 * nu).sqrt() * r / l;
    let gamma = half_integer_gamma(nu);
    2f64.powf(1.0 - nu) / gamma * a.powf(nu) * bessel_k(nu, a)
}

fn half_integer_gamma(nu: f64) -> f64 {
    // Γ(1/2) = √π, then Γ(x + 1) = x Γ(x)
    let mut g = std::f64::consts::PI.sqrt();
    let mut x = 0.5;
    while x < nu - 1e-12 {
        g *= x;
        x += 1.0;
    }
    g
}
