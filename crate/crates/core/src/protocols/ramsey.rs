use std::f64::consts::PI;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::data::{CurveData, CurveMeta};
use crate::dynamics::{apply_rotation, area_from_power, free_unchecked, pi_pulse_power, EmitterParams, QuantumState};
use crate::error::{Error, Result};
use crate::fitting::{fit_gaussian_envelope, fit_sinusoid_visibility};
use crate::noise::{DetuningSampler, SpectralDiffusionModel};
use crate::rng::substream;
use crate::{REP_PERIOD_NS, SPEED_OF_LIGHT_UM_PER_NS};

/// Relative tolerance on the π/2 pulse power.
const PI_HALF_POWER_TOL: f64 = 0.05;

/// ½(1 + cos(2πν0τ)).
pub fn ramsey_population_ideal(tau_ns: f64, nu0_ghz: f64) -> f64 {
    0.5 * (1.0 + (2.0 * PI * nu0_ghz * tau_ns).cos())
}

/// ½(1 + e^{−τ²/T2*²} cos(2πν0τ)).
pub fn ramsey_population_dephased(tau_ns: f64, nu0_ghz: f64, t2_star_ns: f64) -> f64 {
    let x = tau_ns / t2_star_ns;
    0.5 * (1.0 + (-x * x).exp() * (2.0 * PI * nu0_ghz * tau_ns).cos())
}

/// Michelson delay line. The long arm moves in steps of `step_cm`; the
/// short arm is scanned over `scan_span_um` in `scan_points` positions.
/// Optical path difference is twice the mirror displacement.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct MichelsonGeometry {
    pub step_cm: f64,
    pub scan_span_um: f64,
    pub scan_points: usize,
}

impl Default for MichelsonGeometry {
    fn default() -> Self {
        Self {
            step_cm: 1.25,
            scan_span_um: 1.2,
            scan_points: 64,
        }
    }
}

impl MichelsonGeometry {
    pub fn validate(&self) -> Result<()> {
        if !(self.step_cm > 0.0 && self.step_cm.is_finite()) {
            return Err(Error::param("step_cm", "must be finite and > 0"));
        }
        if !(self.scan_span_um > 0.0 && self.scan_span_um.is_finite()) {
            return Err(Error::param("scan_span_um", "must be finite and > 0"));
        }
        if self.scan_points < 2 {
            return Err(Error::param("scan_points", "need at least 2 positions"));
        }
        Ok(())
    }

    /// Delay added by one long-arm step, ns.
    pub fn step_delay_ns(&self) -> f64 {
        2.0 * self.step_cm * 1e4 / SPEED_OF_LIGHT_UM_PER_NS
    }

    pub fn positions_um(&self) -> Vec<f64> {
        let n = self.scan_points;
        (0..n).map(|i| self.scan_span_um * i as f64 / (n - 1) as f64).collect()
    }

    /// Number of optical fringes across the short-arm scan at `nu0_ghz`.
    pub fn fringes(&self, nu0_ghz: f64) -> f64 {
        let wavelength_um = SPEED_OF_LIGHT_UM_PER_NS / nu0_ghz;
        2.0 * self.scan_span_um / wavelength_um
    }
}

/// `n` long-arm delays at whole steps: 0, step, 2·step, …
pub fn default_long_delays(geometry: &MichelsonGeometry, n: usize) -> Vec<f64> {
    (0..n).map(|k| k as f64 * geometry.step_delay_ns()).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Interferogram {
    pub long_delay_ns: f64,
    pub short_scan_positions_um: Vec<f64>,
    /// Total pulse separation at each position, ns.
    pub delays_ns: Vec<f64>,
    /// Shot-averaged detected signal (∝ P_e).
    pub signal: Vec<f64>,
    /// Standard error of each shot average.
    pub signal_err: Vec<f64>,
    pub shots: u64,
}

impl Interferogram {
    pub fn to_curve(&self) -> CurveData {
        let mut c = CurveData::new(
            "position_um",
            "signal",
            self.short_scan_positions_um.clone(),
            self.signal.clone(),
        );
        // zero spread (e.g. no wandering) leaves the fit unweighted
        if self.signal_err.iter().all(|&e| e > 0.0) {
            c = c.with_errors(self.signal_err.clone());
        }
        c.with_meta(CurveMeta {
            experiment: "ramsey-interferogram".into(),
            seed: None,
            shots: Some(self.shots),
        })
    }
}

/// Excited population after π/2(θ, 0) → free(τ, δ) → π/2(θ, ω_L τ) from
/// |g⟩, with the laser on resonance (ω_L = ω0). The second pulse carries the
/// laser phase accumulated over the delay, so the fringes oscillate at ω0
/// while δ only shifts them.
pub fn ramsey_shot_population(area: f64, tau_ns: f64, detuning: f64, params: &EmitterParams) -> f64 {
    let omega_l = params.omega0();
    let s = apply_rotation(QuantumState::ground(), area, 0.0);
    let s = free_unchecked(s, tau_ns, params, detuning);
    apply_rotation(s, area, -omega_l * tau_ns).excited_population()
}

fn check_pi_half_power(params: &EmitterParams, pulse_power_uw: f64) -> Result<f64> {
    let target = pi_pulse_power(params.alpha_rad_per_sqrt_uw) / 4.0;
    if !((pulse_power_uw - target).abs() <= PI_HALF_POWER_TOL * target) {
        return Err(Error::param(
            "pulse_power_uw",
            format!("{pulse_power_uw} uW is not within 5% of the pi/2 power {target:.4} uW"),
        ));
    }
    area_from_power(params.alpha_rad_per_sqrt_uw, pulse_power_uw)
}

/// One interferogram: the short arm is scanned at fixed long-arm delay and
/// each position averages `shots` sequences with fresh spectral-wandering
/// detunings. T1 and pure dephasing act during the delay.
#[allow(clippy::too_many_arguments)]
pub fn simulate_ramsey_interferogram<R: Rng + ?Sized>(
    long_delay_ns: f64,
    geometry: &MichelsonGeometry,
    params: &EmitterParams,
    diffusion: &SpectralDiffusionModel,
    pulse_power_uw: f64,
    shots: u64,
    rng: &mut R,
) -> Result<Interferogram> {
    params.validate()?;
    diffusion.validate()?;
    geometry.validate()?;
    let area = check_pi_half_power(params, pulse_power_uw)?;
    if shots == 0 {
        return Err(Error::param("shots", "must be >= 1"));
    }
    if !(long_delay_ns >= 0.0) {
        return Err(Error::param("long_delay_ns", "must be >= 0"));
    }
    let positions = geometry.positions_um();
    let delays: Vec<f64> = positions
        .iter()
        .map(|x| long_delay_ns + 2.0 * x / SPEED_OF_LIGHT_UM_PER_NS)
        .collect();
    if delays.iter().any(|&t| t >= REP_PERIOD_NS) {
        return Err(Error::param(
            "long_delay_ns",
            "pulse separation must stay below the 12.5 ns repetition period",
        ));
    }
    if geometry.fringes(params.nu0_ghz) < 3.0 {
        return Err(Error::param("scan_span_um", "short-arm scan must cover at least 3 fringes"));
    }
    let master: u64 = rng.random();
    let stats: Vec<(f64, f64)> = delays
        .par_iter()
        .enumerate()
        .map(|(i, &tau)| {
            let mut rng = substream(master, &[i as u64]);
            let mut sampler = DetuningSampler::new(*diffusion, REP_PERIOD_NS);
            let (mut sum, mut sum2) = (0.0, 0.0);
            for _ in 0..shots {
                let p = ramsey_shot_population(area, tau, sampler.next(&mut rng), params);
                sum += p;
                sum2 += p * p;
            }
            let n = shots as f64;
            let mean = sum / n;
            let var = if shots > 1 {
                ((sum2 - n * mean * mean) / (n - 1.0)).max(0.0)
            } else {
                0.0
            };
            (mean, (var / n).sqrt())
        })
        .collect();
    let (signal, signal_err) = stats.into_iter().unzip();
    Ok(Interferogram {
        long_delay_ns,
        short_scan_positions_um: positions,
        delays_ns: delays,
        signal,
        signal_err,
        shots,
    })
}

/// Fringe visibility against long-arm delay. A point whose sinusoid fit
/// fails or does not converge is recorded as NaN.
#[allow(clippy::too_many_arguments)]
pub fn visibility_series<R: Rng + ?Sized>(
    long_delays_ns: &[f64],
    geometry: &MichelsonGeometry,
    params: &EmitterParams,
    diffusion: &SpectralDiffusionModel,
    pulse_power_uw: f64,
    shots: u64,
    rng: &mut R,
) -> Result<CurveData> {
    if let Some(&bad) = long_delays_ns.iter().find(|&&d| !(d < REP_PERIOD_NS)) {
        return Err(Error::param(
            "long_delay_ns",
            format!("{bad} ns is not below the 12.5 ns repetition period"),
        ));
    }
    let master: u64 = rng.random();
    let mut vis = Vec::with_capacity(long_delays_ns.len());
    let mut err = Vec::with_capacity(long_delays_ns.len());
    for (i, &d) in long_delays_ns.iter().enumerate() {
        let ig = simulate_ramsey_interferogram(
            d,
            geometry,
            params,
            diffusion,
            pulse_power_uw,
            shots,
            &mut substream(master, &[i as u64]),
        )?;
        match fit_sinusoid_visibility(&ig.to_curve()) {
            Ok(f) if f.fit.converged => {
                vis.push(f.visibility);
                err.push(f.visibility_err);
            }
            _ => {
                vis.push(f64::NAN);
                err.push(f64::NAN);
            }
        }
    }
    let mut curve = CurveData::new("tau_ns", "visibility", long_delays_ns.to_vec(), vis).with_meta(CurveMeta {
        experiment: "ramsey-visibility".into(),
        seed: None,
        shots: Some(shots),
    });
    if err.iter().all(|e| *e > 0.0 || e.is_nan()) {
        curve = curve.with_errors(err);
    }
    Ok(curve)
}

/// Visibility the simulator converges to without shot noise for a static
/// Gaussian wander of spread `sigma`: e^{−Γ2 τ} e^{−σ²τ²/2}.
pub fn noiseless_visibility(tau_ns: f64, params: &EmitterParams, sigma_rad_per_ns: f64) -> f64 {
    (-params.gamma2() * tau_ns).exp() * (-0.5 * (sigma_rad_per_ns * tau_ns).powi(2)).exp()
}

/// Wandering spread σ for which a Gaussian fit of the noiseless visibility
/// series over `delays_ns`, homogeneous decay included, returns
/// `target_t2_star_ns`.
pub fn calibrate_sigma_for_t2_star(target_t2_star_ns: f64, params: &EmitterParams, delays_ns: &[f64]) -> Result<f64> {
    let fitted = |sigma: f64| -> Result<f64> {
        let v: Vec<f64> = delays_ns.iter().map(|&t| noiseless_visibility(t, params, sigma)).collect();
        let fit = fit_gaussian_envelope(&CurveData::new("tau_ns", "visibility", delays_ns.to_vec(), v), false)?;
        if !fit.converged {
            return Err(Error::Fit {
                model: "gaussian-envelope".into(),
                reason: "calibration fit did not converge".into(),
            });
        }
        Ok(fit.estimates[1])
    };
    let mut lo = 0.0;
    let mut hi = 2.0 * std::f64::consts::SQRT_2 / target_t2_star_ns;
    if fitted(lo)? < target_t2_star_ns {
        return Err(Error::param(
            "t2_star_ns",
            "homogeneous decay alone is already faster than the target",
        ));
    }
    while fitted(hi)? > target_t2_star_ns {
        hi *= 2.0;
    }
    for _ in 0..60 {
        let mid = 0.5 * (lo + hi);
        if fitted(mid)? > target_t2_star_ns {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(0.5 * (lo + hi))
}
