use rand::Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "kebab-case")]
pub enum DiffusionKind {
    /// One detuning per shot, drawn from N(0, σ) and held for the whole
    /// sequence.
    #[default]
    StaticGaussian,
    /// Mean-reverting walk with correlation time `tau_corr_ns`, advanced by
    /// one shot interval between draws.
    OrnsteinUhlenbeck,
}

/// Slow wandering of the transition frequency.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct SpectralDiffusionModel {
    pub kind: DiffusionKind,
    /// Standard deviation of the detuning, rad/ns.
    pub sigma_rad_per_ns: f64,
    /// Correlation time, ns (OU only).
    pub tau_corr_ns: f64,
}

impl Default for SpectralDiffusionModel {
    fn default() -> Self {
        Self {
            kind: DiffusionKind::StaticGaussian,
            sigma_rad_per_ns: sigma_from_t2_star(0.60),
            tau_corr_ns: 1.0e6,
        }
    }
}

impl SpectralDiffusionModel {
    pub fn static_gaussian(sigma_rad_per_ns: f64) -> Self {
        Self {
            kind: DiffusionKind::StaticGaussian,
            sigma_rad_per_ns,
            ..Default::default()
        }
    }

    pub fn none() -> Self {
        Self::static_gaussian(0.0)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.sigma_rad_per_ns >= 0.0 && self.sigma_rad_per_ns.is_finite()) {
            return Err(Error::param("sigma_rad_per_ns", "must be finite and >= 0"));
        }
        if self.kind == DiffusionKind::OrnsteinUhlenbeck && !(self.tau_corr_ns > 0.0) {
            return Err(Error::param("tau_corr_ns", "must be > 0 for the OU model"));
        }
        Ok(())
    }
}

/// One stationary draw of the detuning, rad/ns.
pub fn sample_detuning<R: Rng + ?Sized>(model: &SpectralDiffusionModel, rng: &mut R) -> f64 {
    if model.sigma_rad_per_ns == 0.0 {
        return 0.0;
    }
    let z: f64 = rng.sample(StandardNormal);
    model.sigma_rad_per_ns * z
}

/// Per-shot detuning source. Static models draw independently; the OU model
/// keeps its state and relaxes over `shot_interval_ns` between shots.
#[derive(Debug, Clone)]
pub struct DetuningSampler {
    model: SpectralDiffusionModel,
    shot_interval_ns: f64,
    current: Option<f64>,
}

impl DetuningSampler {
    pub fn new(model: SpectralDiffusionModel, shot_interval_ns: f64) -> Self {
        Self {
            model,
            shot_interval_ns,
            current: None,
        }
    }

    pub fn next<R: Rng + ?Sized>(&mut self, rng: &mut R) -> f64 {
        match self.model.kind {
            DiffusionKind::StaticGaussian => sample_detuning(&self.model, rng),
            DiffusionKind::OrnsteinUhlenbeck => {
                let next = match self.current {
                    None => sample_detuning(&self.model, rng),
                    Some(x) => {
                        let decay = (-self.shot_interval_ns / self.model.tau_corr_ns).exp();
                        let kick = (1.0 - decay * decay).max(0.0).sqrt();
                        x * decay + kick * sample_detuning(&self.model, rng)
                    }
                };
                self.current = Some(next);
                next
            }
        }
    }
}

/// Gaussian dephasing envelope exp(−τ²/T2*²).
pub fn ramsey_envelope(tau_ns: f64, t2_star_ns: f64) -> f64 {
    let x = tau_ns / t2_star_ns;
    (-x * x).exp()
}

/// Detuning spread whose ensemble average ⟨e^{iδτ}⟩ = e^{−σ²τ²/2} equals
/// exp(−τ²/T2*²): σ = √2 / T2*.
pub fn sigma_from_t2_star(t2_star_ns: f64) -> f64 {
    std::f64::consts::SQRT_2 / t2_star_ns
}

/// Reporting convention 1/T2* = 1/T2 + 1/T_inh.
pub fn t2_star_from_rates(t2_ns: f64, t_inh_ns: f64) -> f64 {
    1.0 / (1.0 / t2_ns + 1.0 / t_inh_ns)
}

/// Envelope the simulator actually produces: homogeneous exponential decay
/// times the Gaussian from static wandering.
pub fn combined_envelope(tau_ns: f64, t2_hom_ns: f64, t_inh_ns: f64) -> f64 {
    (-tau_ns / t2_hom_ns).exp() * ramsey_envelope(tau_ns, t_inh_ns)
}
