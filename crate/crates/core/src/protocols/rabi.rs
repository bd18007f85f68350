use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{CurveData, CurveMeta};
use crate::dynamics::{area_from_power, detuned_rabi_population, EmitterParams};
use crate::error::{Error, Result};
use crate::noise::{DetuningSampler, SpectralDiffusionModel};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct RabiSweep {
    /// Incoherent floor as a fraction of the signal, in [0, 1).
    pub background_fraction: f64,
    pub shots: u64,
    /// Square-pulse duration, ns. Fixed across the sweep; the power sets Ω.
    pub pulse_duration_ns: f64,
}

impl Default for RabiSweep {
    fn default() -> Self {
        Self {
            background_fraction: 0.05,
            shots: 2000,
            pulse_duration_ns: 0.0015,
        }
    }
}

impl RabiSweep {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..1.0).contains(&self.background_fraction) {
            return Err(Error::param("background_fraction", "must lie in [0, 1)"));
        }
        if self.shots == 0 {
            return Err(Error::param("shots", "must be >= 1"));
        }
        if !(self.pulse_duration_ns > 0.0 && self.pulse_duration_ns.is_finite()) {
            return Err(Error::param("pulse_duration_ns", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// sin²(α√P).
pub fn rabi_population_ideal(alpha_rad_per_sqrt_uw: f64, power_uw: f64) -> f64 {
    (alpha_rad_per_sqrt_uw * power_uw.max(0.0).sqrt()).sin().powi(2)
}

/// Excitation-power sweep. Each point is `(1 − b)·⟨P_e⟩ + b/2`, the mean
/// taken over `shots` square pulses of area 2α√P, each with its own
/// spectral-wandering detuning. The curve carries no per-point uncertainty.
pub fn simulate_rabi_sweep<R: Rng + ?Sized>(
    powers_uw: &[f64],
    params: &EmitterParams,
    diffusion: &SpectralDiffusionModel,
    sweep: &RabiSweep,
    rng: &mut R,
) -> Result<CurveData> {
    params.validate()?;
    diffusion.validate()?;
    sweep.validate()?;
    let areas: Vec<f64> = powers_uw
        .iter()
        .map(|&p| area_from_power(params.alpha_rad_per_sqrt_uw, p))
        .collect::<Result<_>>()?;
    let master: u64 = rng.random();
    let d = sweep.pulse_duration_ns;
    let b = sweep.background_fraction;
    let y: Vec<f64> = areas
        .par_iter()
        .enumerate()
        .map(|(i, &area)| {
            let mut rng = substream(master, &[i as u64]);
            let mut sampler = DetuningSampler::new(*diffusion, crate::REP_PERIOD_NS);
            let omega = area / d;
            let sum: f64 = (0..sweep.shots)
                .map(|_| detuned_rabi_population(omega, sampler.next(&mut rng), d))
                .sum();
            (1.0 - b) * sum / sweep.shots as f64 + 0.5 * b
        })
        .collect();
    Ok(CurveData::new("power_uw", "signal", powers_uw.to_vec(), y).with_meta(CurveMeta {
        experiment: "rabi".into(),
        seed: None,
        shots: Some(sweep.shots),
    }))
}
