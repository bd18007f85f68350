//! Spectral diffusion, dephasing envelopes, line shapes and the excitation
//! laser's own coherence.

mod diffusion;
mod faddeeva;
mod laser;
mod lineshape;

pub use diffusion::{
    combined_envelope, ramsey_envelope, sample_detuning, sigma_from_t2_star,
    t2_star_from_rates, DetuningSampler, DiffusionKind, SpectralDiffusionModel,
};
pub use faddeeva::faddeeva;
pub use laser::{laser_autocorrelation, LaserModel};
pub use lineshape::{
    gaussian_fwhm_ghz, homogeneous_linewidth_ghz, lorentzian_profile, numeric_fwhm,
    olivero_voigt_fwhm, ple_lineshape, ple_lorentzian_fwhm_ghz, voigt_profile,
};
