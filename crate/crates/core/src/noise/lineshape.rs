use std::f64::consts::{LN_2, PI, SQRT_2};

use num_complex::Complex64;

use super::faddeeva::faddeeva;

/// Fourier-limited homogeneous linewidth 1/(2πT1), GHz.
pub fn homogeneous_linewidth_ghz(t1_ns: f64) -> f64 {
    1.0 / (2.0 * PI * t1_ns)
}

/// Power-broadened Lorentzian FWHM (Γ2/π)·√(1 + P/Psat), GHz.
pub fn ple_lorentzian_fwhm_ghz(power_uw: f64, psat_uw: f64, t1_ns: f64, gamma_phi: f64) -> f64 {
    let gamma2 = 0.5 / t1_ns + gamma_phi;
    gamma2 / PI * (1.0 + power_uw / psat_uw).sqrt()
}

/// FWHM of a Gaussian with angular standard deviation `sigma_rad_per_ns`,
/// in GHz.
pub fn gaussian_fwhm_ghz(sigma_rad_per_ns: f64) -> f64 {
    2.0 * (2.0 * LN_2).sqrt() * sigma_rad_per_ns / (2.0 * PI)
}

/// Area-normalised Lorentzian with half width `gamma`.
pub fn lorentzian_profile(x: f64, gamma: f64) -> f64 {
    gamma / (PI * (x * x + gamma * gamma))
}

/// Area-normalised Voigt profile: Gaussian of standard deviation `sigma`
/// convolved with a Lorentzian of half width `gamma`.
pub fn voigt_profile(x: f64, sigma: f64, gamma: f64) -> f64 {
    if sigma <= 1e-12 * gamma {
        return lorentzian_profile(x, gamma);
    }
    let z = Complex64::new(x, gamma) / (sigma * SQRT_2);
    faddeeva(z).re / (sigma * (2.0 * PI).sqrt())
}

/// Olivero–Longbothum estimate of the Voigt FWHM.
pub fn olivero_voigt_fwhm(fwhm_lorentz: f64, fwhm_gauss: f64) -> f64 {
    0.5346 * fwhm_lorentz + (0.2166 * fwhm_lorentz * fwhm_lorentz + fwhm_gauss * fwhm_gauss).sqrt()
}

/// Relative PLE absorption at `detuning_ghz`, peak-normalised to 1.
///
/// A Gaussian of angular spread `sigma_rad_per_ns` (spectral wandering)
/// convolved with the steady-state power-broadened Lorentzian.
pub fn ple_lineshape(
    detuning_ghz: f64,
    power_uw: f64,
    psat_uw: f64,
    t1_ns: f64,
    gamma_phi: f64,
    sigma_rad_per_ns: f64,
) -> f64 {
    let gamma = 0.5 * ple_lorentzian_fwhm_ghz(power_uw, psat_uw, t1_ns, gamma_phi);
    let sigma = sigma_rad_per_ns / (2.0 * PI);
    voigt_profile(detuning_ghz, sigma, gamma) / voigt_profile(0.0, sigma, gamma)
}

/// Full width at half maximum of a symmetric single-peaked profile centred
/// at zero, by bisection on the half-maximum crossing. `scale` bounds the
/// search from above.
pub fn numeric_fwhm(f: impl Fn(f64) -> f64, scale: f64) -> f64 {
    let half = 0.5 * f(0.0);
    let mut hi = scale;
    while f(hi) > half {
        hi *= 2.0;
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) > half {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-15 * hi {
            break;
        }
    }
    lo + hi
}
