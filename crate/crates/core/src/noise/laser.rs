use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Excitation laser after spectral shaping.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct LaserModel {
    /// Carrier frequency, GHz (436 nm).
    pub nu_center_ghz: f64,
    /// Spectral FWHM after the pulse shaper, GHz.
    pub bandwidth_ghz: f64,
    /// 1/e half-width of the field autocorrelation, ps.
    pub coherence_time_ps: f64,
}

impl Default for LaserModel {
    fn default() -> Self {
        Self {
            nu_center_ghz: 687_600.0,
            bandwidth_ghz: 300.0,
            coherence_time_ps: 6.3,
        }
    }
}

impl LaserModel {
    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("nu_center_ghz", self.nu_center_ghz),
            ("bandwidth_ghz", self.bandwidth_ghz),
            ("coherence_time_ps", self.coherence_time_ps),
        ] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::param(name, "must be finite and > 0"));
            }
        }
        Ok(())
    }
}

/// First-order fringe visibility of the laser alone at `delay_ps`,
/// exp(−(delay/τc)²).
pub fn laser_autocorrelation(delay_ps: f64, laser: &LaserModel) -> f64 {
    let x = delay_ps / laser.coherence_time_ps;
    (-x * x).exp()
}
