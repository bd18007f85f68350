//! Curve models for each measured quantity and the fits built on them.

use std::f64::consts::PI;

use serde::Serialize;

use super::lm::fit_least_squares;
use super::spectrum::dominant_frequency;
use super::{FitModel, FitResult, FitStatus, ParamSpec};
use crate::data::CurveData;
use crate::error::{Error, Result};
use crate::noise::{olivero_voigt_fwhm, voigt_profile};

fn fit_err(model: &str, reason: impl Into<String>) -> Error {
    Error::Fit {
        model: model.to_string(),
        reason: reason.into(),
    }
}

fn mean(v: &[f64]) -> f64 {
    v.iter().sum::<f64>() / v.len() as f64
}

/// Ordinary least-squares line through (x, y): (slope, intercept).
fn linear_regression(x: &[f64], y: &[f64]) -> Option<(f64, f64)> {
    let mx = mean(x);
    let my = mean(y);
    let sxx: f64 = x.iter().map(|v| (v - mx).powi(2)).sum();
    if !(sxx > 0.0) {
        return None;
    }
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    Some((slope, my - slope * mx))
}

fn is_flat(y: &[f64]) -> bool {
    let (lo, hi) = y
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    hi - lo <= 1e-12 * hi.abs().max(lo.abs()).max(f64::MIN_POSITIVE)
}

// ---------------------------------------------------------------- lifetime

/// y = A e^{−t/T1} + B.
pub struct ExponentialDecay;

const EXP_PARAMS: [ParamSpec; 3] = [
    ParamSpec::free("amplitude", "counts"),
    ParamSpec::free("t1_ns", "ns"),
    ParamSpec::free("offset", "counts"),
];

impl FitModel for ExponentialDecay {
    fn name(&self) -> &str {
        "exponential-decay"
    }

    fn params(&self) -> &[ParamSpec] {
        &EXP_PARAMS
    }

    fn predict(&self, t: f64, p: &[f64]) -> f64 {
        p[0] * (-t / p[1]).exp() + p[2]
    }

    /// Log-linear regression on background-subtracted data, the background
    /// taken from the last tenth of the record.
    fn initial_guess(&self, data: &CurveData) -> Result<Vec<f64>> {
        let n = data.len();
        if n < 3 || is_flat(&data.y) {
            return Err(fit_err(self.name(), "no decay present"));
        }
        let tail = (n / 10).max(1);
        let bg = mean(&data.y[n - tail..]);
        let peak = data.y.iter().map(|v| v - bg).fold(f64::NEG_INFINITY, f64::max);
        let (ts, logs): (Vec<f64>, Vec<f64>) = data
            .x
            .iter()
            .zip(&data.y)
            .filter(|(_, &y)| y - bg > 0.05 * peak)
            .map(|(&t, &y)| (t, (y - bg).ln()))
            .unzip();
        if ts.len() < 2 || !(peak > 0.0) {
            return Err(fit_err(self.name(), "no decay present"));
        }
        let (slope, icpt) =
            linear_regression(&ts, &logs).ok_or_else(|| fit_err(self.name(), "degenerate abscissa"))?;
        if !(slope < 0.0) {
            return Err(fit_err(self.name(), "signal does not decay"));
        }
        Ok(vec![icpt.exp(), -1.0 / slope, bg])
    }
}

/// Fits y = A e^{−t/T1} + B. Degenerate input and nonpositive lifetimes
/// come back flagged as non-converged.
pub fn fit_exponential_decay(data: &CurveData) -> Result<FitResult> {
    let model = ExponentialDecay;
    let init = match model.initial_guess(data) {
        Ok(p) => p,
        Err(_) => {
            return Ok(FitResult::fail(&model, vec![f64::NAN; 3], FitStatus::Degenerate, 0));
        }
    };
    let mut res = fit_least_squares(&model, data, &init)?;
    if !(res.estimates[1] > 0.0) {
        res.mark(FitStatus::OutOfDomain);
    }
    Ok(res)
}

// ---------------------------------------------------------------- Rabi

/// y = C − A cos(2α√P) e^{−β√P}, with P the optical power in μW.
pub struct RabiOscillation;

const RABI_PARAMS: [ParamSpec; 4] = [
    ParamSpec::free("offset", "signal"),
    ParamSpec::bounded("amplitude", "signal", 0.0, f64::INFINITY),
    ParamSpec::bounded("alpha", "rad/sqrt(uW)", 1e-9, f64::INFINITY),
    ParamSpec::bounded("beta", "1/sqrt(uW)", -10.0, 10.0),
];

impl FitModel for RabiOscillation {
    fn name(&self) -> &str {
        "rabi"
    }

    fn params(&self) -> &[ParamSpec] {
        &RABI_PARAMS
    }

    fn predict(&self, power: f64, p: &[f64]) -> f64 {
        let s = power.max(0.0).sqrt();
        p[0] - p[1] * (2.0 * p[2] * s).cos() * (-p[3] * s).exp()
    }

    /// α from the dominant oscillation frequency in √P.
    fn initial_guess(&self, data: &CurveData) -> Result<Vec<f64>> {
        let s: Vec<f64> = data.x.iter().map(|p| p.max(0.0).sqrt()).collect();
        let (f, _, _) = dominant_frequency(&s, &data.y)
            .ok_or_else(|| fit_err(self.name(), "no oscillation found"))?;
        let (lo, hi) = minmax(&data.y);
        Ok(vec![mean(&data.y), 0.5 * (hi - lo), PI * f, 0.0])
    }
}

fn minmax(v: &[f64]) -> (f64, f64) {
    v.iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &x| (a.min(x), b.max(x)))
}

/// Rabi-fit summary with the derived π-pulse power.
#[derive(Debug, Clone, Serialize)]
pub struct RabiFit {
    pub fit: FitResult,
    pub alpha: f64,
    pub alpha_err: f64,
    /// (π/2α)², μW.
    pub pi_power_uw: f64,
    pub pi_power_err_uw: f64,
    /// Set when fits from two different starting periods disagree by > 5%.
    pub ambiguous: bool,
}

/// Fits the Rabi curve from two starting points (spectral peak and first
/// maximum) and keeps the better one.
pub fn fit_rabi(data: &CurveData) -> Result<RabiFit> {
    let model = RabiOscillation;
    let spectral = model.initial_guess(data)?;
    let s_max = data.x.iter().fold(0.0f64, |a, &p| a.max(p.max(0.0).sqrt()));
    let periods = spectral[2] * s_max / PI;
    if periods < 1.5 {
        return Err(fit_err(
            model.name(),
            format!("only {periods:.2} oscillation periods in the sweep; need at least 1.5"),
        ));
    }
    let mut inits = vec![spectral.clone()];
    if let Some(s_peak) = first_maximum(data) {
        let mut alt = spectral.clone();
        alt[2] = PI / (2.0 * s_peak);
        inits.push(alt);
    }
    let fits: Vec<FitResult> = inits
        .iter()
        .map(|p| fit_least_squares(&model, data, p))
        .collect::<Result<_>>()?;
    let alphas: Vec<f64> = fits.iter().map(|f| f.estimates[2]).collect();
    let ambiguous = alphas.len() == 2 && ((alphas[0] - alphas[1]).abs() / alphas[0].max(alphas[1])) > 0.05;
    let mut best = fits
        .into_iter()
        .min_by(|a, b| {
            (!a.converged, a.rss)
                .partial_cmp(&(!b.converged, b.rss))
                .unwrap_or(std::cmp::Ordering::Equal)
        })
        .expect("at least one fit");
    if ambiguous {
        best.flags.push("ambiguous-period".into());
    }
    let alpha = best.estimates[2];
    let alpha_err = best.std_errors[2];
    let pi_power_uw = (PI / (2.0 * alpha)).powi(2);
    Ok(RabiFit {
        pi_power_err_uw: 2.0 * pi_power_uw * alpha_err / alpha,
        fit: best,
        alpha,
        alpha_err,
        pi_power_uw,
        ambiguous,
    })
}

/// √P at the first local maximum of a lightly smoothed signal.
fn first_maximum(data: &CurveData) -> Option<f64> {
    let mut idx: Vec<usize> = (0..data.len()).collect();
    idx.sort_by(|&a, &b| data.x[a].total_cmp(&data.x[b]));
    let y: Vec<f64> = idx.iter().map(|&i| data.y[i]).collect();
    let s: Vec<f64> = idx.iter().map(|&i| data.x[i].max(0.0).sqrt()).collect();
    let smooth: Vec<f64> = (0..y.len())
        .map(|i| {
            let lo = i.saturating_sub(1);
            let hi = (i + 2).min(y.len());
            mean(&y[lo..hi])
        })
        .collect();
    let (lo, hi) = minmax(&smooth);
    let mid = 0.5 * (lo + hi);
    (1..smooth.len().saturating_sub(1))
        .find(|&i| smooth[i] > mid && smooth[i] >= smooth[i - 1] && smooth[i] >= smooth[i + 1])
        .map(|i| s[i])
        .filter(|v| *v > 0.0)
}

// ---------------------------------------------------------------- fringes

/// y = C (1 + V cos(2π f x + φ)) with 0 ≤ V ≤ 1.
pub struct Sinusoid;

const SIN_PARAMS: [ParamSpec; 4] = [
    ParamSpec::free("offset", "signal"),
    ParamSpec::bounded("visibility", "1", 0.0, 1.0),
    ParamSpec::bounded("frequency", "1/x", 0.0, f64::INFINITY),
    ParamSpec::free("phase", "rad"),
];

impl FitModel for Sinusoid {
    fn name(&self) -> &str {
        "sinusoid"
    }

    fn params(&self) -> &[ParamSpec] {
        &SIN_PARAMS
    }

    fn predict(&self, x: f64, p: &[f64]) -> f64 {
        p[0] * (1.0 + p[1] * (2.0 * PI * p[2] * x + p[3]).cos())
    }

    fn initial_guess(&self, data: &CurveData) -> Result<Vec<f64>> {
        let (f, phase, amp) = dominant_frequency(&data.x, &data.y)
            .ok_or_else(|| fit_err(self.name(), "no oscillation found"))?;
        let c = mean(&data.y);
        Ok(vec![c, (amp / c.abs()).clamp(0.0, 1.0), f, phase])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct SinusoidFit {
    pub fit: FitResult,
    pub offset: f64,
    pub amplitude: f64,
    pub frequency: f64,
    pub phase: f64,
    pub visibility: f64,
    pub visibility_err: f64,
}

/// Sinusoidal fit of an interferogram-like curve, visibility V = A/C.
///
/// Needs at least 3 fringes sampled at 8 or more points per fringe. A flat
/// signal returns V = 0 as an exact, converged result.
pub fn fit_sinusoid_visibility(data: &CurveData) -> Result<SinusoidFit> {
    let model = Sinusoid;
    data.validate()?;
    if data.len() < 24 {
        return Err(fit_err(model.name(), "need at least 24 samples (3 fringes × 8)"));
    }
    if is_flat(&data.y) {
        let c = mean(&data.y);
        let mut fit = FitResult::fail(&model, vec![c, 0.0, 0.0, 0.0], FitStatus::Exact, 0);
        fit.mark(FitStatus::Exact);
        fit.std_errors = vec![0.0; 4];
        fit.rss = 0.0;
        fit.gradient_norm = 0.0;
        return Ok(SinusoidFit {
            fit,
            offset: c,
            amplitude: 0.0,
            frequency: 0.0,
            phase: 0.0,
            visibility: 0.0,
            visibility_err: 0.0,
        });
    }
    let init = model.initial_guess(data)?;
    let (lo, hi) = minmax(&data.x);
    let fringes = init[2] * (hi - lo);
    if fringes < 3.0 || (data.len() as f64) < 8.0 * fringes {
        return Err(fit_err(
            model.name(),
            format!("{fringes:.2} fringes over {} samples; need >= 3 fringes at >= 8 samples each", data.len()),
        ));
    }
    let fit = fit_least_squares(&model, data, &init)?;
    let p = &fit.estimates;
    Ok(SinusoidFit {
        offset: p[0],
        amplitude: p[0] * p[1],
        frequency: p[2],
        phase: p[3].rem_euclid(2.0 * PI),
        visibility: p[1],
        visibility_err: fit.std_errors[1],
        fit,
    })
}

// ---------------------------------------------------------------- T2*

/// V(τ) = V0 e^{−τ²/T2*²} (+ floor).
pub struct GaussianEnvelope {
    pub with_floor: bool,
}

const ENV_PARAMS: [ParamSpec; 3] = [
    ParamSpec::bounded("v0", "1", 0.0, 1.0),
    ParamSpec::bounded("t2_star_ns", "ns", 1e-12, f64::INFINITY),
    ParamSpec::bounded("floor", "1", 0.0, 1.0),
];

impl FitModel for GaussianEnvelope {
    fn name(&self) -> &str {
        "gaussian-envelope"
    }

    fn params(&self) -> &[ParamSpec] {
        if self.with_floor {
            &ENV_PARAMS
        } else {
            &ENV_PARAMS[..2]
        }
    }

    fn predict(&self, tau: f64, p: &[f64]) -> f64 {
        let x = tau / p[1];
        let floor = if self.with_floor { p[2] } else { 0.0 };
        floor + p[0] * (-x * x).exp()
    }

    fn initial_guess(&self, data: &CurveData) -> Result<Vec<f64>> {
        let (lo, hi) = minmax(&data.y);
        if is_flat(&data.y) {
            return Err(fit_err(self.name(), "all visibilities are equal"));
        }
        let floor = if self.with_floor { lo.max(0.0) } else { 0.0 };
        let v0 = (hi - floor).clamp(1e-6, 1.0);
        let (t2, l): (Vec<f64>, Vec<f64>) = data
            .x
            .iter()
            .zip(&data.y)
            .filter(|(&t, &y)| t > 0.0 && y - floor > 0.05 * v0 && y - floor < v0)
            .map(|(&t, &y)| (t * t, ((y - floor) / v0).ln()))
            .unzip();
        let t_star = if t2.is_empty() {
            let (tlo, thi) = minmax(&data.x);
            0.5 * (thi - tlo)
        } else {
            // ln(V/V0) = −τ²/T² through the origin
            let num: f64 = t2.iter().zip(&l).map(|(a, b)| a * b).sum();
            let den: f64 = t2.iter().map(|a| a * a).sum();
            (-den / num).sqrt()
        };
        let mut p = vec![v0, t_star];
        if self.with_floor {
            p.push(floor);
        }
        Ok(p)
    }
}

/// Gaussian fit of a visibility series. Missing (NaN) points are dropped;
/// at least 5 remain required.
pub fn fit_gaussian_envelope(data: &CurveData, with_floor: bool) -> Result<FitResult> {
    let model = GaussianEnvelope { with_floor };
    let data = data.finite_points();
    if data.len() < 5 {
        return Err(fit_err(model.name(), "need at least 5 delay points"));
    }
    let init = match model.initial_guess(&data) {
        Ok(p) => p,
        Err(_) => {
            let n = model.n_params();
            return Ok(FitResult::fail(&model, vec![f64::NAN; n], FitStatus::Degenerate, 0));
        }
    };
    fit_least_squares(&model, &data, &init)
}

// ---------------------------------------------------------------- PLE

/// y = B + A / (1 + ((x − x0)/(w/2))²), w the FWHM.
pub struct Lorentzian;

const LOR_PARAMS: [ParamSpec; 4] = [
    ParamSpec::free("center", "x"),
    ParamSpec::bounded("fwhm", "x", 1e-12, f64::INFINITY),
    ParamSpec::free("amplitude", "y"),
    ParamSpec::free("offset", "y"),
];

impl FitModel for Lorentzian {
    fn name(&self) -> &str {
        "lorentzian"
    }

    fn params(&self) -> &[ParamSpec] {
        &LOR_PARAMS
    }

    fn predict(&self, x: f64, p: &[f64]) -> f64 {
        let u = 2.0 * (x - p[0]) / p[1];
        p[3] + p[2] / (1.0 + u * u)
    }

    fn initial_guess(&self, data: &CurveData) -> Result<Vec<f64>> {
        let g = peak_guess(data).ok_or_else(|| fit_err(self.name(), "no peak above the offset"))?;
        Ok(vec![g.center, g.width, g.height, g.offset])
    }
}

struct PeakGuess {
    center: f64,
    width: f64,
    height: f64,
    offset: f64,
}

/// Peak (or dip) position, half-maximum width, height and baseline.
fn peak_guess(data: &CurveData) -> Option<PeakGuess> {
    let n = data.len();
    if n < 5 || is_flat(&data.y) {
        return None;
    }
    let mut idx: Vec<usize> = (0..n).collect();
    idx.sort_by(|&a, &b| data.x[a].total_cmp(&data.x[b]));
    let xs: Vec<f64> = idx.iter().map(|&i| data.x[i]).collect();
    let ys: Vec<f64> = idx.iter().map(|&i| data.y[i]).collect();
    let edge = (n / 10).max(1);
    let offset = 0.5 * (mean(&ys[..edge]) + mean(&ys[n - edge..]));
    let k = (0..n)
        .max_by(|&a, &b| (ys[a] - offset).abs().total_cmp(&(ys[b] - offset).abs()))
        .unwrap_or(0);
    let height = ys[k] - offset;
    let above = |i: usize| (ys[i] - offset) / height > 0.5;
    let mut left = k;
    while left > 0 && above(left - 1) {
        left -= 1;
    }
    let mut right = k;
    while right + 1 < n && above(right + 1) {
        right += 1;
    }
    let dx = (xs[n - 1] - xs[0]) / (n - 1) as f64;
    let width = (xs[right] - xs[left]).max(dx);
    Some(PeakGuess {
        center: xs[k],
        width,
        height,
        offset,
    })
}

/// Line-shape fit summary.
#[derive(Debug, Clone, Serialize)]
pub struct LineFit {
    pub fit: FitResult,
    pub center: f64,
    pub fwhm: f64,
    pub fwhm_err: f64,
    pub amplitude: f64,
    pub offset: f64,
    /// Negative amplitude: the data show a dip.
    pub inverted: bool,
}

pub fn fit_lorentzian(data: &CurveData) -> Result<LineFit> {
    let model = Lorentzian;
    let init = model.initial_guess(data)?;
    let mut fit = fit_least_squares(&model, data, &init)?;
    let inverted = fit.estimates[2] < 0.0;
    if inverted {
        fit.flags.push("inverted".into());
    }
    let p = &fit.estimates;
    Ok(LineFit {
        center: p[0],
        fwhm: p[1],
        fwhm_err: fit.std_errors[1],
        amplitude: p[2],
        offset: p[3],
        inverted,
        fit,
    })
}

/// y = B + A · V(x − x0) / V(0), V a Voigt profile with Lorentzian FWHM
/// `fwhm_l` and Gaussian FWHM `fwhm_g`.
pub struct Voigt;

const FWHM_TO_SIGMA: f64 = 0.424_660_900_144_009_5; // 1/(2√(2 ln 2))

const VOIGT_PARAMS: [ParamSpec; 5] = [
    ParamSpec::free("center", "x"),
    ParamSpec::bounded("fwhm_l", "x", 1e-9, f64::INFINITY),
    ParamSpec::bounded("fwhm_g", "x", 1e-9, f64::INFINITY),
    ParamSpec::free("amplitude", "y"),
    ParamSpec::free("offset", "y"),
];

impl FitModel for Voigt {
    fn name(&self) -> &str {
        "voigt"
    }

    fn params(&self) -> &[ParamSpec] {
        &VOIGT_PARAMS
    }

    fn predict(&self, x: f64, p: &[f64]) -> f64 {
        let gamma = 0.5 * p[1];
        let sigma = FWHM_TO_SIGMA * p[2];
        p[4] + p[3] * voigt_profile(x - p[0], sigma, gamma) / voigt_profile(0.0, sigma, gamma)
    }

    fn initial_guess(&self, data: &CurveData) -> Result<Vec<f64>> {
        let g = peak_guess(data).ok_or_else(|| fit_err(self.name(), "no peak above the offset"))?;
        Ok(vec![g.center, 0.3 * g.width, 0.8 * g.width, g.height, g.offset])
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct VoigtFit {
    pub line: LineFit,
    pub fwhm_lorentz: f64,
    pub fwhm_gauss: f64,
}

/// Voigt fit; `line.fwhm` is the Olivero–Longbothum combination of the two
/// fitted widths.
pub fn fit_voigt(data: &CurveData) -> Result<VoigtFit> {
    let model = Voigt;
    let init = model.initial_guess(data)?;
    let mut fit = fit_least_squares(&model, data, &init)?;
    let p = fit.estimates.clone();
    let inverted = p[3] < 0.0;
    if inverted {
        fit.flags.push("inverted".into());
    }
    let fwhm = olivero_voigt_fwhm(p[1], p[2]);
    // first-order error propagation through the combination
    let h = 1e-7;
    let dl = (olivero_voigt_fwhm(p[1] * (1.0 + h), p[2]) - fwhm) / (p[1] * h);
    let dg = (olivero_voigt_fwhm(p[1], p[2] * (1.0 + h)) - fwhm) / (p[2] * h);
    let fwhm_err = ((dl * fit.std_errors[1]).powi(2) + (dg * fit.std_errors[2]).powi(2)).sqrt();
    Ok(VoigtFit {
        fwhm_lorentz: p[1],
        fwhm_gauss: p[2],
        line: LineFit {
            center: p[0],
            fwhm,
            fwhm_err,
            amplitude: p[3],
            offset: p[4],
            inverted,
            fit,
        },
    })
}
