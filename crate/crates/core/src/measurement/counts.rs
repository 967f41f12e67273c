use rand::Rng;
use rand_distr::{Distribution, Poisson};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::optics::ClickProbabilities;

/// Detection-time settings of one simulated measurement.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct CountConfig {
    /// Integration time T in seconds.
    pub integration_time: f64,
    /// Coincidence window Δτ in seconds.
    pub coincidence_window: f64,
    /// Detection windows per second; `None` means back-to-back windows (1/Δτ).
    pub window_rate: Option<f64>,
    pub seed: u64,
}

impl Default for CountConfig {
    fn default() -> Self {
        CountConfig { integration_time: 60.0, coincidence_window: 2e-9, window_rate: None, seed: 0 }
    }
}

impl CountConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.integration_time > 0.0 && self.integration_time.is_finite()) {
            return Err(Error::arg(format!("integration time must be > 0, got {}", self.integration_time)));
        }
        if !(self.coincidence_window > 0.0 && self.coincidence_window.is_finite()) {
            return Err(Error::arg(format!("coincidence window must be > 0, got {}", self.coincidence_window)));
        }
        if let Some(r) = self.window_rate {
            if !(r > 0.0 && r.is_finite()) {
                return Err(Error::arg(format!("window rate must be > 0, got {r}")));
            }
        }
        Ok(())
    }

    pub fn window_rate(&self) -> f64 {
        self.window_rate.unwrap_or(1.0 / self.coincidence_window)
    }

    /// Number of detection windows N_w in one integration.
    pub fn windows(&self) -> f64 {
        self.window_rate() * self.integration_time
    }

    pub fn with_integration_time(self, integration_time: f64) -> Self {
        CountConfig { integration_time, ..self }
    }
}

/// Singles of both detectors and their coincidences.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Counts {
    pub s1: u64,
    pub s2: u64,
    pub c12: u64,
}

fn poisson<R: Rng + ?Sized>(lambda: f64, rng: &mut R) -> Result<u64> {
    if lambda == 0.0 {
        return Ok(0);
    }
    let d = Poisson::new(lambda).map_err(|e| Error::arg(format!("Poisson mean {lambda}: {e}")))?;
    Ok(d.sample(rng) as u64)
}

/// Independent Poisson draws of S1, S2 and C12 with means `p · N_w`.
pub fn sample_counts<R: Rng + ?Sized>(p: &ClickProbabilities, config: &CountConfig, rng: &mut R) -> Result<Counts> {
    p.validate()?;
    config.validate()?;
    let n = config.windows();
    Ok(Counts { s1: poisson(p.p_d1 * n, rng)?, s2: poisson(p.p_d2 * n, rng)?, c12: poisson(p.p_coinc * n, rng)? })
}

/// g²(0) from counts, `C12 N_w / (S1 S2)`.
///
/// With the default window rate `N_w = T / Δτ`, so this is `C12 T / (S1 S2 Δτ)`.
pub fn g2_estimate(s1: u64, s2: u64, c12: u64, config: &CountConfig) -> Result<f64> {
    config.validate()?;
    if s1 == 0 || s2 == 0 {
        return Err(Error::InsufficientCounts { s1, s2 });
    }
    Ok(c12 as f64 * config.windows() / (s1 as f64 * s2 as f64))
}
