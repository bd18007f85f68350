//! `fit <model> --input file.csv`.

use std::fs::File;
use std::path::Path;

use coherence_core::fitting::{
    fit_exponential_decay, fit_gaussian_envelope, fit_lorentzian, fit_rabi, fit_sinusoid_visibility, fit_voigt,
    FitResult,
};
use coherence_core::CurveData;
use serde_json::{json, Value};

use crate::error::CliError;
use crate::FitKind;

pub fn name(kind: FitKind) -> &'static str {
    match kind {
        FitKind::Exp => "exp",
        FitKind::Rabi => "rabi",
        FitKind::Sinusoid => "sinusoid",
        FitKind::RamseyEnvelope => "ramsey-envelope",
        FitKind::Lorentzian => "lorentzian",
        FitKind::Voigt => "voigt",
    }
}

fn check(fit: &FitResult) -> Option<CliError> {
    (!fit.converged).then(|| CliError::Fit(format!("{} fit did not converge (status {:?})", fit.model, fit.status)))
}

/// Returns the results object and, when the fit did not converge, the error
/// to report after the results have been printed.
pub fn run(kind: FitKind, input: &Path, floor: bool) -> Result<(Value, Option<CliError>), CliError> {
    let file = File::open(input).map_err(|e| CliError::Io(format!("{}: {e}", input.display())))?;
    let data = CurveData::read_csv(file)?;
    let out = match kind {
        FitKind::Exp => {
            let f = fit_exponential_decay(&data)?;
            (
                json!({
                    "amplitude": f.estimates[0],
                    "t1_ns": f.estimates[1],
                    "t1_err_ns": f.std_errors[1],
                    "offset": f.estimates[2],
                    "fit": f,
                }),
                check(&f),
            )
        }
        FitKind::Rabi => {
            let f = fit_rabi(&data)?;
            let failure = check(&f.fit);
            (
                json!({
                    "alpha_rad_per_sqrt_uw": f.alpha,
                    "alpha_err": f.alpha_err,
                    "pi_power_uw": f.pi_power_uw,
                    "pi_power_err_uw": f.pi_power_err_uw,
                    "ambiguous_period": f.ambiguous,
                    "fit": f.fit,
                }),
                failure,
            )
        }
        FitKind::Sinusoid => {
            let f = fit_sinusoid_visibility(&data)?;
            let failure = check(&f.fit);
            (
                json!({
                    "visibility": f.visibility,
                    "visibility_err": f.visibility_err,
                    "offset": f.offset,
                    "amplitude": f.amplitude,
                    "frequency": f.frequency,
                    "phase": f.phase,
                    "fit": f.fit,
                }),
                failure,
            )
        }
        FitKind::RamseyEnvelope => {
            let f = fit_gaussian_envelope(&data, floor)?;
            (
                json!({
                    "v0": f.estimates[0],
                    "t2_star_ns": f.estimates[1],
                    "t2_star_err_ns": f.std_errors[1],
                    "floor": if floor { f.estimates[2] } else { 0.0 },
                    "fit": f,
                }),
                check(&f),
            )
        }
        FitKind::Lorentzian => {
            let f = fit_lorentzian(&data)?;
            let failure = check(&f.fit);
            (
                json!({
                    "center": f.center,
                    "fwhm": f.fwhm,
                    "fwhm_err": f.fwhm_err,
                    "amplitude": f.amplitude,
                    "offset": f.offset,
                    "inverted": f.inverted,
                    "fit": f.fit,
                }),
                failure,
            )
        }
        FitKind::Voigt => {
            let f = fit_voigt(&data)?;
            let failure = check(&f.line.fit);
            (
                json!({
                    "center": f.line.center,
                    "fwhm": f.line.fwhm,
                    "fwhm_err": f.line.fwhm_err,
                    "fwhm_lorentz": f.fwhm_lorentz,
                    "fwhm_gauss": f.fwhm_gauss,
                    "amplitude": f.line.amplitude,
                    "offset": f.line.offset,
                    "fit": f.line.fit,
                }),
                failure,
            )
        }
    };
    Ok(out)
}
