use serde::{Deserialize, Serialize};

use crate::{Error, Result};

/// Anneal-with-pause protocol: a linear ramp s = t/tau interrupted at
/// s_p by a hold of length l_p, resuming with the same slope. Total
/// wall time is tau + l_p.
#[derive(Debug, Clone, Copy, Serialize, Deserialize)]
pub struct PauseProtocol {
    /// Ramp anneal time (ns).
    pub tau: f64,
    /// Pause point in [0, 1], if any.
    pub pause_s: Option<f64>,
    /// Pause duration (ns, >= 0).
    pub pause_len: f64,
}

impl PauseProtocol {
    pub fn ramp(tau: f64) -> Self {
        Self {
            tau,
            pause_s: None,
            pause_len: 0.0,
        }
    }

    pub fn with_pause(tau: f64, pause_s: f64, pause_len: f64) -> Self {
        Self {
            tau,
            pause_s: Some(pause_s),
            pause_len,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tau > 0.0) {
            return Err(Error::Config(format!("tau must be positive, got {}", self.tau)));
        }
        if let Some(sp) = self.pause_s {
            if !(0.0..=1.0).contains(&sp) {
                return Err(Error::Config(format!("pause_s = {sp} outside [0, 1]")));
            }
            if self.pause_len < 0.0 {
                return Err(Error::Config(format!(
                    "pause_len = {} must be >= 0",
                    self.pause_len
                )));
            }
        }
        Ok(())
    }

    /// Total wall time tau + l_p (ns).
    pub fn total_time(&self) -> f64 {
        self.tau + self.effective_pause_len()
    }

    fn effective_pause_len(&self) -> f64 {
        if self.pause_s.is_some() {
            self.pause_len
        } else {
            0.0
        }
    }

    /// s(t): continuous, piecewise-linear, non-decreasing, with
    /// s(0) = 0 and s(tau + l_p) = 1.
    pub fn pause_map(&self, t: f64) -> Result<f64> {
        let total = self.total_time();
        if !(0.0..=total + 1e-9).contains(&t) {
            return Err(Error::TimeOutOfRange { t, total });
        }
        let t = t.min(total);
        let s = match self.pause_s {
            None => t / self.tau,
            Some(sp) => {
                let tp = sp * self.tau;
                if t < tp {
                    t / self.tau
                } else if t < tp + self.pause_len {
                    sp
                } else {
                    (t - self.pause_len) / self.tau
                }
            }
        };
        Ok(s.clamp(0.0, 1.0))
    }
}
