use std::f64::consts::PI;

use nalgebra::{Cholesky, DMatrix, DVector, Dyn};
use serde::{Deserialize, Serialize};

use super::kernel::{gram_matrix, gram_symmetric, KernelConfig};
use crate::error::{Error, Result};

/// Diagonal jitter ladder tried when `K + σ²I` is not numerically positive definite.
pub const JITTER_LADDER: [f64; 3] = [1e-10, 1e-8, 1e-6];

/// Variance values below this are reported as a clamping event.
const NEGATIVE_VARIANCE_TOL: f64 = -1e-9;

/// Training inputs (rows in the unit cube) and their observed values.
#[derive(Clone, Debug, PartialEq)]
pub struct Dataset {
    x: DMatrix<f64>,
    y: DVector<f64>,
}

impl Dataset {
    pub fn new(x: DMatrix<f64>, y: DVector<f64>) -> Result<Self> {
        if x.nrows() == 0 {
            return Err(Error::arg("dataset must contain at least one observation"));
        }
        if x.ncols() == 0 {
            return Err(Error::arg("inputs must have at least one dimension"));
        }
        if x.nrows() != y.len() {
            return Err(Error::arg(format!("{} input rows but {} outputs", x.nrows(), y.len())));
        }
        if let Some(v) = x.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::arg(format!("input coordinate {v} outside [0, 1]")));
        }
        if let Some(v) = y.iter().find(|v| !v.is_finite()) {
            return Err(Error::arg(format!("non-finite observation {v}")));
        }
        Ok(Dataset { x, y })
    }

    /// Build from row slices.
    pub fn from_rows(rows: &[Vec<f64>], y: &[f64]) -> Result<Self> {
        let dim = rows.first().map_or(0, Vec::len);
        if rows.iter().any(|r| r.len() != dim) {
            return Err(Error::arg("ragged input rows"));
        }
        let flat: Vec<f64> = rows.iter().flatten().copied().collect();
        Dataset::new(DMatrix::from_row_slice(rows.len(), dim, &flat), DVector::from_column_slice(y))
    }

    pub fn x(&self) -> &DMatrix<f64> {
        &self.x
    }

    pub fn y(&self) -> &DVector<f64> {
        &self.y
    }

    pub fn len(&self) -> usize {
        self.y.len()
    }

    pub fn is_empty(&self) -> bool {
        self.y.is_empty()
    }

    pub fn dim(&self) -> usize {
        self.x.ncols()
    }

    pub(crate) fn with_y(&self, y: DVector<f64>) -> Dataset {
        Dataset { x: self.x.clone(), y }
    }
}

/// Constant prior mean convention.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PriorMean {
    /// Zero in the internal (standardized) units.
    #[default]
    Zero,
    /// Mean of the observations.
    DataMean,
}

/// Affine map `y_internal = (y - shift) / scale` applied before fitting.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Standardization {
    pub shift: f64,
    pub scale: f64,
}

impl Standardization {
    pub const IDENTITY: Standardization = Standardization { shift: 0.0, scale: 1.0 };

    /// Zero mean / unit sample deviation when there are at least two distinct values.
    pub fn for_values(y: &DVector<f64>) -> Self {
        let n = y.len();
        if n < 2 {
            return Standardization::IDENTITY;
        }
        let mean = y.mean();
        let var = y.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (n - 1) as f64;
        let sd = var.sqrt();
        if sd > 0.0 && sd.is_finite() {
            Standardization { shift: mean, scale: sd }
        } else {
            Standardization::IDENTITY
        }
    }

    pub fn apply(&self, y: &DVector<f64>) -> DVector<f64> {
        y.map(|v| (v - self.shift) / self.scale)
    }
}

/// Exact GP posterior with a cached Cholesky factor of `K + σ²I (+ jitter)`.
///
/// Immutable after [`fit`]; safe to share across threads.
#[derive(Clone, Debug)]
pub struct GpPosterior {
    data: Dataset,
    kernel: KernelConfig,
    standardization: Standardization,
    /// Prior mean in internal units.
    prior_mean: f64,
    chol: Cholesky<f64, Dyn>,
    /// `(K + σ²I)^{-1} (y - μ)` in internal units.
    alpha: DVector<f64>,
    jitter: f64,
    train_rows: Vec<Vec<f64>>,
}

/// Factor `k + σ²I`, escalating diagonal jitter when needed.
pub(crate) fn factorize(mut k: DMatrix<f64>, noise: f64) -> Result<(Cholesky<f64, Dyn>, f64)> {
    let n = k.nrows();
    for i in 0..n {
        k[(i, i)] += noise;
    }
    if let Some(c) = Cholesky::new(k.clone()) {
        return Ok((c, 0.0));
    }
    let mut applied = 0.0;
    for &jitter in &JITTER_LADDER {
        for i in 0..n {
            k[(i, i)] += jitter - applied;
        }
        applied = jitter;
        if let Some(c) = Cholesky::new(k.clone()) {
            log::debug!("Cholesky succeeded after adding jitter {jitter:e}");
            return Ok((c, jitter));
        }
    }
    Err(Error::numeric(format!(
        "covariance not positive definite after jitter {:e} (condition estimate {:.3e})",
        applied,
        condition_estimate(&k)
    )))
}

fn condition_estimate(k: &DMatrix<f64>) -> f64 {
    let eig = k.clone().symmetric_eigenvalues();
    let max = eig.iter().fold(f64::MIN, |a, &b| a.max(b.abs()));
    let min = eig.iter().fold(f64::MAX, |a, &b| a.min(b.abs()));
    if min == 0.0 {
        f64::INFINITY
    } else {
        max / min
    }
}

/// Condition the GP prior on `data`.
pub fn fit(data: &Dataset, config: &KernelConfig, prior_mean_mode: PriorMean) -> Result<GpPosterior> {
    config.validate()?;
    let standardization = Standardization::for_values(data.y());
    let y = standardization.apply(data.y());
    let prior_mean = match prior_mean_mode {
        PriorMean::Zero => 0.0,
        PriorMean::DataMean => y.mean(),
    };
    let k = gram_symmetric(config, data.x());
    let (chol, jitter) = factorize(k, config.noise_variance)?;
    let alpha = chol.solve(&y.add_scalar(-prior_mean));
    Ok(GpPosterior {
        train_rows: super::kernel::row_vectors(data.x()),
        data: data.clone(),
        kernel: *config,
        standardization,
        prior_mean,
        chol,
        alpha,
        jitter,
    })
}

impl GpPosterior {
    pub fn dataset(&self) -> &Dataset {
        &self.data
    }

    pub fn kernel(&self) -> &KernelConfig {
        &self.kernel
    }

    pub fn standardization(&self) -> Standardization {
        self.standardization
    }

    /// Constant prior mean in the units of the observations.
    pub fn prior_mean(&self) -> f64 {
        self.standardization.shift + self.standardization.scale * self.prior_mean
    }

    /// Jitter added to the diagonal during factorization (0 when none was needed).
    pub fn jitter(&self) -> f64 {
        self.jitter
    }

    /// Posterior mean and latent-function variance at each row of `points`,
    /// in the units of the observations.
    pub fn predict(&self, points: &DMatrix<f64>) -> Result<(DVector<f64>, DVector<f64>)> {
        if points.ncols() != self.data.dim() {
            return Err(Error::arg(format!(
                "prediction points have {} columns, training data has {}",
                points.ncols(),
                self.data.dim()
            )));
        }
        if let Some(v) = points.iter().find(|v| !(0.0..=1.0).contains(*v)) {
            return Err(Error::arg(format!("prediction coordinate {v} outside [0, 1]")));
        }
        let m = points.nrows();
        let n = self.data.len();
        let mut means = DVector::zeros(m);
        let mut vars = DVector::zeros(m);
        let mut kstar = DVector::zeros(n);
        let mut clamped = 0usize;
        let (shift, scale) = (self.standardization.shift, self.standardization.scale);
        let l = self.chol.l_dirty();
        for i in 0..m {
            let p: Vec<f64> = points.row(i).iter().copied().collect();
            for (j, row) in self.train_rows.iter().enumerate() {
                kstar[j] = self.kernel.eval_unchecked(&p, row);
            }
            let mu = self.prior_mean + kstar.dot(&self.alpha);
            // v = L^{-1} k*, variance = k** - v·v
            let mut v = kstar.clone();
            forward_substitute(l, &mut v);
            let mut var = self.kernel.output_scale - v.norm_squared();
            if var < 0.0 {
                if var < NEGATIVE_VARIANCE_TOL {
                    clamped += 1;
                }
                var = 0.0;
            }
            means[i] = shift + scale * mu;
            vars[i] = scale * scale * var;
        }
        if clamped > 0 {
            log::warn!("clamped {clamped} negative posterior variances to zero");
        }
        Ok((means, vars))
    }
}

/// Solve `L v = b` in place for lower-triangular `L` (only the lower triangle is read).
#[inline]
fn forward_substitute(l: &DMatrix<f64>, b: &mut DVector<f64>) {
    let n = b.len();
    for i in 0..n {
        let mut s = b[i];
        for k in 0..i {
            s -= l[(i, k)] * b[k];
        }
        b[i] = s / l[(i, i)];
    }
}

/// Log marginal likelihood with a zero prior mean on `data.y()` as given.
///
/// Includes the `-(n/2) ln 2π` constant.
pub fn log_marginal_likelihood(data: &Dataset, config: &KernelConfig) -> Result<f64> {
    log_marginal_likelihood_with_mean(data, config, 0.0)
}

pub fn log_marginal_likelihood_with_mean(data: &Dataset, config: &KernelConfig, mean: f64) -> Result<f64> {
    config.validate()?;
    let k = gram_symmetric(config, data.x());
    let (chol, _) = factorize(k, config.noise_variance)?;
    let r = data.y().add_scalar(-mean);
    let alpha = chol.solve(&r);
    let log_det: f64 = chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>() * 2.0;
    let n = data.len() as f64;
    let lml = -0.5 * log_det - 0.5 * r.dot(&alpha) - 0.5 * n * (2.0 * PI).ln();
    if lml.is_finite() {
        Ok(lml)
    } else {
        Err(Error::numeric("log marginal likelihood is not finite"))
    }
}

/// Cross-covariance helper re-exported for oracle comparisons.
pub fn cross_covariance(config: &KernelConfig, a: &DMatrix<f64>, b: &DMatrix<f64>) -> Result<DMatrix<f64>> {
    gram_matrix(config, a, b)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::gp::KernelFamily;
    use approx::assert_abs_diff_eq;

    fn single(y: f64) -> Dataset {
        Dataset::from_rows(&[vec![0.5, 0.5]], &[y]).unwrap()
    }

    #[test]
    fn noiseless_single_point_interpolates() {
        let cfg = KernelConfig::new(KernelFamily::Rbf).with_noise(0.0);
        let post = fit(&single(3.0), &cfg, PriorMean::Zero).unwrap();
        let (m, v) = post.predict(&DMatrix::from_row_slice(1, 2, &[0.5, 0.5])).unwrap();
        assert_abs_diff_eq!(m[0], 3.0, epsilon = 1e-12);
        assert_abs_diff_eq!(v[0], 0.0, epsilon = 1e-12);
    }

    #[test]
    fn unit_noise_shrinks_halfway() {
        let cfg = KernelConfig::new(KernelFamily::Matern52).with_noise(1.0);
        let at = DMatrix::from_row_slice(1, 2, &[0.5, 0.5]);
        let post = fit(&single(4.0), &cfg, PriorMean::Zero).unwrap();
        assert_eq!(post.prior_mean(), 0.0);
        assert_abs_diff_eq!(post.predict(&at).unwrap().0[0], 2.0, epsilon = 1e-12);
        let post = fit(&single(4.0), &cfg, PriorMean::DataMean).unwrap();
        assert_abs_diff_eq!(post.predict(&at).unwrap().0[0], 4.0, epsilon = 1e-12);
    }

    #[test]
    fn far_point_reverts_to_prior() {
        let cfg = KernelConfig::new(KernelFamily::Rbf).with_length_scale(0.05).with_noise(1e-6);
        let data = Dataset::from_rows(&[vec![0.0], vec![0.05], vec![0.1]], &[1.0, 2.0, 4.0]).unwrap();
        let post = fit(&data, &cfg, PriorMean::Zero).unwrap();
        let (m, v) = post.predict(&DMatrix::from_row_slice(1, 1, &[1.0])).unwrap();
        let s = post.standardization();
        assert_abs_diff_eq!(m[0], post.prior_mean(), epsilon = 1e-6);
        assert_abs_diff_eq!(v[0], cfg.output_scale * s.scale * s.scale, epsilon = 1e-6);
    }

    #[test]
    fn lml_closed_forms() {
        let cfg = KernelConfig::new(KernelFamily::Rbf).with_output_scale(0.5).with_noise(0.5);
        let d = single(0.0);
        assert_abs_diff_eq!(log_marginal_likelihood(&d, &cfg).unwrap(), -0.5 * (2.0 * PI).ln(), epsilon = 1e-12);
        let e2 = std::f64::consts::E.powi(2);
        let cfg = cfg.with_output_scale(e2 - 0.5);
        assert_abs_diff_eq!(
            log_marginal_likelihood(&d, &cfg).unwrap(),
            -1.0 - 0.5 * (2.0 * PI).ln(),
            epsilon = 1e-12
        );
        let d = single(2.5);
        assert_abs_diff_eq!(
            log_marginal_likelihood_with_mean(&d, &cfg, 2.5).unwrap(),
            -1.0 - 0.5 * (2.0 * PI).ln(),
            epsilon = 1e-12
        );
    }

    #[test]
    fn duplicate_inputs_need_jitter() {
        let cfg = KernelConfig::new(KernelFamily::Rbf).with_noise(0.0);
        let data = Dataset::from_rows(&[vec![0.3], vec![0.3], vec![0.7]], &[1.0, 1.0, 2.0]).unwrap();
        let post = fit(&data, &cfg, PriorMean::Zero).unwrap();
        assert!(post.jitter() > 0.0);
    }

    #[test]
    fn dataset_validation() {
        assert!(Dataset::from_rows(&[vec![1.2]], &[0.0]).is_err());
        assert!(Dataset::from_rows(&[], &[]).is_err());
        assert!(Dataset::new(DMatrix::zeros(2, 1), DVector::zeros(3)).is_err());
        assert!(Dataset::from_rows(&[vec![0.2]], &[f64::NAN]).is_err());
    }

    #[test]
    fn standardization_only_with_spread() {
        assert_eq!(Standardization::for_values(&DVector::from_vec(vec![3.0])), Standardization::IDENTITY);
        assert_eq!(Standardization::for_values(&DVector::from_vec(vec![3.0, 3.0])), Standardization::IDENTITY);
        let s = Standardization::for_values(&DVector::from_vec(vec![1.0, 3.0]));
        assert_eq!(s.shift, 2.0);
        assert_abs_diff_eq!(s.scale, 2f64.sqrt(), epsilon = 1e-15);
    }
}
