use nalgebra::{Cholesky, DMatrix, DVector};

use crate::error::{Error, Result};

/// Gaussian state of `n` bosonic modes in quadrature order `(x1, p1, ..., xn, pn)`.
///
/// Vacuum convention: the vacuum covariance is the identity.
#[derive(Clone, Debug, PartialEq)]
pub struct GaussianState {
    displacement: DVector<f64>,
    covariance: DMatrix<f64>,
}

/// Elementary states used as pipeline inputs.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum StateKind {
    Vacuum(usize),
    /// Single-mode squeezed vacuum with squeezing parameter `r`.
    Squeezed(f64),
    /// Two-mode squeezed vacuum with squeezing parameter `r`.
    Tmsv(f64),
    /// Single-mode thermal state with mean photon number `mu`.
    Thermal(f64),
}

pub fn make_state(kind: StateKind) -> Result<GaussianState> {
    let nonneg = |v: f64, what: &str| {
        if v >= 0.0 && v.is_finite() {
            Ok(v)
        } else {
            Err(Error::arg(format!("{what} must be a finite non-negative number, got {v}")))
        }
    };
    Ok(match kind {
        StateKind::Vacuum(n) => {
            if n == 0 {
                return Err(Error::arg("a state needs at least one mode"));
            }
            GaussianState::vacuum(n)
        }
        StateKind::Squeezed(r) => {
            let r = nonneg(r, "squeezing")?;
            let cov = DMatrix::from_diagonal(&DVector::from_vec(vec![(-2.0 * r).exp(), (2.0 * r).exp()]));
            GaussianState { displacement: DVector::zeros(2), covariance: cov }
        }
        StateKind::Tmsv(r) => {
            let r = nonneg(r, "squeezing")?;
            let (c, s) = ((2.0 * r).cosh(), (2.0 * r).sinh());
            #[rustfmt::skip]
            let cov = DMatrix::from_row_slice(4, 4, &[
                c,   0.0, s,   0.0,
                0.0, c,   0.0, -s,
                s,   0.0, c,   0.0,
                0.0, -s,  0.0, c,
            ]);
            GaussianState { displacement: DVector::zeros(4), covariance: cov }
        }
        StateKind::Thermal(mu) => {
            let mu = nonneg(mu, "mean photon number")?;
            GaussianState {
                displacement: DVector::zeros(2),
                covariance: DMatrix::identity(2, 2) * (1.0 + 2.0 * mu),
            }
        }
    })
}

impl GaussianState {
    pub fn vacuum(n_modes: usize) -> Self {
        GaussianState { displacement: DVector::zeros(2 * n_modes), covariance: DMatrix::identity(2 * n_modes, 2 * n_modes) }
    }

    pub fn from_parts(displacement: DVector<f64>, covariance: DMatrix<f64>) -> Result<Self> {
        let dim = displacement.len();
        if dim == 0 || !dim.is_multiple_of(2) || covariance.shape() != (dim, dim) {
            return Err(Error::arg("displacement/covariance dimensions must be 2n and 2n x 2n"));
        }
        Ok(GaussianState { displacement, covariance })
    }

    pub fn n_modes(&self) -> usize {
        self.displacement.len() / 2
    }

    pub fn displacement(&self) -> &DVector<f64> {
        &self.displacement
    }

    pub fn covariance(&self) -> &DMatrix<f64> {
        &self.covariance
    }

    /// Block-diagonal composition: modes of `self` first, then modes of `other`.
    pub fn direct_sum(&self, other: &GaussianState) -> GaussianState {
        let (a, b) = (self.covariance.nrows(), other.covariance.nrows());
        let mut cov = DMatrix::zeros(a + b, a + b);
        cov.view_mut((0, 0), (a, a)).copy_from(&self.covariance);
        cov.view_mut((a, a), (b, b)).copy_from(&other.covariance);
        let mut d = DVector::zeros(a + b);
        d.rows_mut(0, a).copy_from(&self.displacement);
        d.rows_mut(a, b).copy_from(&other.displacement);
        GaussianState { displacement: d, covariance: cov }
    }

    /// Overwrite modes `targets` (assumed uncorrelated with the rest) by `sub`.
    pub fn embed(&mut self, targets: &[usize], sub: &GaussianState) -> Result<()> {
        if targets.len() != sub.n_modes() {
            return Err(Error::arg("embed: mode count mismatch"));
        }
        self.check_modes(targets)?;
        let idx: Vec<usize> = targets.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        for &i in &idx {
            for j in 0..self.covariance.ncols() {
                self.covariance[(i, j)] = 0.0;
                self.covariance[(j, i)] = 0.0;
            }
        }
        for (a, &i) in idx.iter().enumerate() {
            self.displacement[i] = sub.displacement[a];
            for (b, &j) in idx.iter().enumerate() {
                self.covariance[(i, j)] = sub.covariance[(a, b)];
            }
        }
        Ok(())
    }

    fn check_modes(&self, modes: &[usize]) -> Result<()> {
        let n = self.n_modes();
        for (k, &m) in modes.iter().enumerate() {
            if m >= n {
                return Err(Error::arg(format!("mode index {m} out of range for {n} modes")));
            }
            if modes[..k].contains(&m) {
                return Err(Error::arg(format!("mode {m} listed twice")));
            }
        }
        Ok(())
    }

    /// Apply the 2x2 real map `m` to quadrature indices `(a, b)`: `γ ← S γ Sᵀ`, `d ← S d`.
    fn mix(&mut self, a: usize, b: usize, m: [[f64; 2]; 2]) {
        let n = self.covariance.nrows();
        for j in 0..n {
            let (ra, rb) = (self.covariance[(a, j)], self.covariance[(b, j)]);
            self.covariance[(a, j)] = m[0][0] * ra + m[0][1] * rb;
            self.covariance[(b, j)] = m[1][0] * ra + m[1][1] * rb;
        }
        for i in 0..n {
            let (ca, cb) = (self.covariance[(i, a)], self.covariance[(i, b)]);
            self.covariance[(i, a)] = m[0][0] * ca + m[0][1] * cb;
            self.covariance[(i, b)] = m[1][0] * ca + m[1][1] * cb;
        }
        let (da, db) = (self.displacement[a], self.displacement[b]);
        self.displacement[a] = m[0][0] * da + m[0][1] * db;
        self.displacement[b] = m[1][0] * da + m[1][1] * db;
    }

    /// Beam splitter of transmittance `eta` between modes `i` and `j`, in place.
    pub fn apply_beam_splitter(&mut self, i: usize, j: usize, eta: f64) -> Result<()> {
        if !(0.0..=1.0).contains(&eta) {
            return Err(Error::arg(format!("transmittance must be in [0, 1], got {eta}")));
        }
        if i == j {
            return Err(Error::arg("beam splitter needs two distinct modes"));
        }
        self.check_modes(&[i, j])?;
        if eta == 1.0 {
            return Ok(());
        }
        let (t, r) = (eta.sqrt(), (1.0 - eta).sqrt());
        let m = [[t, r], [-r, t]];
        self.mix(2 * i, 2 * j, m);
        self.mix(2 * i + 1, 2 * j + 1, m);
        Ok(())
    }

    /// Rotate the quadratures of mode `i` by `phase`, in place.
    pub fn apply_phase_shift(&mut self, i: usize, phase: f64) -> Result<()> {
        self.check_modes(&[i])?;
        if !phase.is_finite() {
            return Err(Error::arg("phase must be finite"));
        }
        let (s, c) = phase.sin_cos();
        self.mix(2 * i, 2 * i + 1, [[c, -s], [s, c]]);
        Ok(())
    }

    /// Covariance restricted to `modes` (row/column selection).
    pub fn reduced_covariance(&self, modes: &[usize]) -> Result<DMatrix<f64>> {
        self.check_modes(modes)?;
        let idx: Vec<usize> = modes.iter().flat_map(|&m| [2 * m, 2 * m + 1]).collect();
        Ok(DMatrix::from_fn(idx.len(), idx.len(), |a, b| self.covariance[(idx[a], idx[b])]))
    }

    /// `ln Tr{ρ |0⟩⟨0|}` over `modes`, i.e. `k ln 2 - ½ ln det(γ_sub + I)`.
    pub fn log_no_click(&self, modes: &[usize]) -> Result<f64> {
        if modes.is_empty() {
            return Err(Error::arg("no-click probability needs a non-empty mode subset"));
        }
        if self.displacement.iter().any(|&v| v != 0.0) {
            return Err(Error::Unsupported("vacuum projection implemented for zero displacement only".into()));
        }
        let mut sub = self.reduced_covariance(modes)?;
        for k in 0..sub.nrows() {
            sub[(k, k)] += 1.0;
        }
        let chol = Cholesky::new(sub).ok_or_else(|| Error::numeric("γ_sub + I is not positive definite"))?;
        let log_det: f64 = 2.0 * chol.l_dirty().diagonal().iter().map(|d| d.ln()).sum::<f64>();
        Ok(modes.len() as f64 * std::f64::consts::LN_2 - 0.5 * log_det)
    }

    /// Probability that none of `modes` contains a photon.
    pub fn no_click_probability(&self, modes: &[usize]) -> Result<f64> {
        self.log_no_click(modes).map(f64::exp)
    }

    /// Smallest eigenvalue of `γ + iΩ` (non-negative for physical states).
    pub fn uncertainty_margin(&self) -> f64 {
        let n = self.covariance.nrows();
        let mut omega = DMatrix::zeros(n, n);
        for k in 0..n / 2 {
            omega[(2 * k, 2 * k + 1)] = 1.0;
            omega[(2 * k + 1, 2 * k)] = -1.0;
        }
        // realification of the Hermitian matrix γ + iΩ
        let mut h = DMatrix::zeros(2 * n, 2 * n);
        h.view_mut((0, 0), (n, n)).copy_from(&self.covariance);
        h.view_mut((n, n), (n, n)).copy_from(&self.covariance);
        h.view_mut((0, n), (n, n)).copy_from(&(-&omega));
        h.view_mut((n, 0), (n, n)).copy_from(&omega);
        h.symmetric_eigenvalues().min()
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        let sym = (&self.covariance - self.covariance.transpose()).amax() <= tol;
        sym && self.uncertainty_margin() >= -tol
    }
}

/// Beam splitter on a copy of `state`.
pub fn beam_splitter(state: &GaussianState, i: usize, j: usize, eta: f64) -> Result<GaussianState> {
    let mut s = state.clone();
    s.apply_beam_splitter(i, j, eta)?;
    Ok(s)
}

/// Phase shift on a copy of `state`.
pub fn phase_shift(state: &GaussianState, i: usize, phase: f64) -> Result<GaussianState> {
    let mut s = state.clone();
    s.apply_phase_shift(i, phase)?;
    Ok(s)
}

/// Vacuum-projection probability of `modes`.
pub fn no_click_probability(state: &GaussianState, modes: &[usize]) -> Result<f64> {
    state.no_click_probability(modes)
}
