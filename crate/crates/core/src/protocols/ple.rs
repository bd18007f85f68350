use rand::Rng;
use serde::{Deserialize, Serialize};

use super::poisson_count;
use crate::data::{CurveData, CurveMeta};
use crate::dynamics::EmitterParams;
use crate::error::{Error, Result};
use crate::fitting::fit_voigt;
use crate::noise::{ple_lineshape, SpectralDiffusionModel};
use crate::rng::substream;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct PleScan {
    pub power_uw: f64,
    pub psat_uw: f64,
    /// Expected counts at line centre.
    pub peak_counts: f64,
}

impl Default for PleScan {
    fn default() -> Self {
        Self {
            power_uw: 4.41,
            psat_uw: 4.41,
            peak_counts: 10_000.0,
        }
    }
}

impl PleScan {
    pub fn validate(&self) -> Result<()> {
        if !(self.psat_uw > 0.0 && self.psat_uw.is_finite()) {
            return Err(Error::param("psat_uw", "must be finite and > 0"));
        }
        if !(self.power_uw >= 0.0 && self.power_uw.is_finite()) {
            return Err(Error::param("power_uw", "must be finite and >= 0"));
        }
        if !(self.peak_counts > 0.0 && self.peak_counts.is_finite()) {
            return Err(Error::param("peak_counts", "must be finite and > 0"));
        }
        Ok(())
    }
}

/// Laser scan across the zero-phonon line. Counts are Poisson draws around
/// `peak_counts` times the peak-normalised Voigt absorption profile.
pub fn simulate_ple_scan<R: Rng + ?Sized>(
    detunings_ghz: &[f64],
    scan: &PleScan,
    params: &EmitterParams,
    diffusion: &SpectralDiffusionModel,
    rng: &mut R,
) -> Result<CurveData> {
    params.validate()?;
    diffusion.validate()?;
    scan.validate()?;
    let y: Vec<f64> = detunings_ghz
        .iter()
        .map(|&d| {
            let shape = ple_lineshape(
                d,
                scan.power_uw,
                scan.psat_uw,
                params.t1_ns,
                params.gamma_phi_per_ns,
                diffusion.sigma_rad_per_ns,
            );
            poisson_count(rng, scan.peak_counts * shape)
        })
        .collect();
    let err = y.iter().map(|n| n.max(1.0).sqrt()).collect();
    Ok(CurveData::new("detuning_ghz", "counts", detunings_ghz.to_vec(), y)
        .with_errors(err)
        .with_meta(CurveMeta {
            experiment: "ple".into(),
            seed: None,
            shots: None,
        }))
}

/// Fitted Voigt FWHM (GHz) at each excitation power. Failed fits are NaN.
pub fn ple_linewidth_vs_power<R: Rng + ?Sized>(
    detunings_ghz: &[f64],
    powers_uw: &[f64],
    scan: &PleScan,
    params: &EmitterParams,
    diffusion: &SpectralDiffusionModel,
    rng: &mut R,
) -> Result<CurveData> {
    let master: u64 = rng.random();
    let mut fwhm = Vec::with_capacity(powers_uw.len());
    let mut err = Vec::with_capacity(powers_uw.len());
    for (i, &p) in powers_uw.iter().enumerate() {
        let s = PleScan { power_uw: p, ..*scan };
        let data = simulate_ple_scan(detunings_ghz, &s, params, diffusion, &mut substream(master, &[i as u64]))?;
        match fit_voigt(&data) {
            Ok(f) if f.line.fit.converged => {
                fwhm.push(f.line.fwhm);
                err.push(f.line.fwhm_err);
            }
            _ => {
                fwhm.push(f64::NAN);
                err.push(f64::NAN);
            }
        }
    }
    Ok(CurveData::new("power_uw", "fwhm_ghz", powers_uw.to_vec(), fwhm)
        .with_errors(err)
        .with_meta(CurveMeta {
            experiment: "ple-power".into(),
            seed: None,
            shots: None,
        }))
}
