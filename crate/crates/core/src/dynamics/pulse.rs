use serde::{Deserialize, Serialize};

use crate::error::{ensure_finite, Error, Result};

/// P(|Z| < 3) for a standard normal Z; area fraction kept by truncating a
/// Gaussian at ±3σ.
const ERF_3_OVER_SQRT2: f64 = 0.997_300_203_936_739_8;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum PulseShape {
    Square,
    /// Gaussian truncated at ±3σ of a window equal to the pulse duration.
    GaussianEnvelope,
}

/// A resonant drive segment in the rotating frame.
///
/// `omega_peak_rad_per_ns` is the square-pulse-equivalent Rabi frequency:
/// whatever the shape, the envelope is scaled so that the pulse area is
/// `omega_peak_rad_per_ns * duration_ns`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Pulse {
    pub shape: PulseShape,
    pub duration_ns: f64,
    pub omega_peak_rad_per_ns: f64,
    pub detuning_rad_per_ns: f64,
    pub phase_rad: f64,
}

impl Pulse {
    /// Square pulse of the given area, duration, detuning and phase.
    pub fn square(area_rad: f64, duration_ns: f64) -> Self {
        Self {
            shape: PulseShape::Square,
            duration_ns,
            omega_peak_rad_per_ns: area_rad / duration_ns,
            detuning_rad_per_ns: 0.0,
            phase_rad: 0.0,
        }
    }

    pub fn gaussian(area_rad: f64, duration_ns: f64) -> Self {
        Self {
            shape: PulseShape::GaussianEnvelope,
            ..Self::square(area_rad, duration_ns)
        }
    }

    pub fn with_detuning(mut self, detuning_rad_per_ns: f64) -> Self {
        self.detuning_rad_per_ns = detuning_rad_per_ns;
        self
    }

    pub fn with_phase(mut self, phase_rad: f64) -> Self {
        self.phase_rad = phase_rad;
        self
    }

    pub fn validate(&self) -> Result<()> {
        ensure_finite("duration_ns", self.duration_ns)?;
        ensure_finite("omega_peak_rad_per_ns", self.omega_peak_rad_per_ns)?;
        ensure_finite("detuning_rad_per_ns", self.detuning_rad_per_ns)?;
        ensure_finite("phase_rad", self.phase_rad)?;
        if self.duration_ns < 0.0 {
            return Err(Error::param("duration_ns", "must be >= 0"));
        }
        Ok(())
    }

    /// Instantaneous Rabi frequency Ω(t) for `0 <= t <= duration_ns`.
    pub fn rabi_frequency_at(&self, t_ns: f64) -> f64 {
        match self.shape {
            PulseShape::Square => self.omega_peak_rad_per_ns,
            PulseShape::GaussianEnvelope => {
                let d = self.duration_ns;
                if d <= 0.0 {
                    return 0.0;
                }
                let sd = d / 6.0;
                let x = (t_ns - 0.5 * d) / sd;
                let norm = sd * (2.0 * std::f64::consts::PI).sqrt() * ERF_3_OVER_SQRT2;
                self.omega_peak_rad_per_ns * d * (-0.5 * x * x).exp() / norm
            }
        }
    }
}

/// One step of a pulse sequence.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case", tag = "kind")]
pub enum SequenceSegment {
    Drive(Pulse),
    FreeEvolution {
        duration_ns: f64,
        #[serde(default)]
        detuning_rad_per_ns: f64,
    },
}

impl SequenceSegment {
    pub fn free(duration_ns: f64) -> Self {
        SequenceSegment::FreeEvolution {
            duration_ns,
            detuning_rad_per_ns: 0.0,
        }
    }

    pub fn duration_ns(&self) -> f64 {
        match self {
            SequenceSegment::Drive(p) => p.duration_ns,
            SequenceSegment::FreeEvolution { duration_ns, .. } => *duration_ns,
        }
    }
}

/// Integrated Rabi frequency ∫Ω(t)dt, rad.
pub fn pulse_area(pulse: &Pulse) -> f64 {
    pulse.omega_peak_rad_per_ns * pulse.duration_ns
}

/// Pulse area θ = 2α√P delivered at optical power `power_uw`, so that
/// P_e = sin²(θ/2) = sin²(α√P).
pub fn area_from_power(alpha_rad_per_sqrt_uw: f64, power_uw: f64) -> Result<f64> {
    ensure_finite("power_uw", power_uw)?;
    if power_uw < 0.0 {
        return Err(Error::param("power_uw", "optical power cannot be negative"));
    }
    Ok(2.0 * alpha_rad_per_sqrt_uw * power_uw.sqrt())
}

/// Power giving a π rotation, (π/2α)².
pub fn pi_pulse_power(alpha_rad_per_sqrt_uw: f64) -> f64 {
    let x = std::f64::consts::PI / (2.0 * alpha_rad_per_sqrt_uw);
    x * x
}
