//! One function per experiment: simulate, fit, and collect the artifacts.

use std::f64::consts::PI;

use coherence_core::dynamics::{area_from_power, pi_pulse_power, EmitterParams};
use coherence_core::fitting::{
    fit_exponential_decay, fit_gaussian_envelope, fit_lorentzian, fit_rabi, fit_voigt, FitResult,
};
use coherence_core::noise::{
    gaussian_fwhm_ghz, homogeneous_linewidth_ghz, laser_autocorrelation, numeric_fwhm, olivero_voigt_fwhm,
    ple_lineshape, ple_lorentzian_fwhm_ghz, SpectralDiffusionModel,
};
use coherence_core::photonstats::{
    analytic_g2_zero, coincidence_histogram, g2_zero, g2_zero_std_error, simulate_photon_stream, ClickRecord,
};
use coherence_core::protocols::{
    calibrate_sigma_for_t2_star, default_long_delays, ple_linewidth_vs_power, simulate_lifetime, simulate_ple_scan,
    simulate_rabi_sweep, simulate_ramsey_interferogram, visibility_series,
};
use coherence_core::rng::substream;
use coherence_core::{CurveData, CurveMeta};
use serde_json::{json, Value};

use crate::config::RunConfig;
use crate::error::CliError;
use crate::plot::{render, Series};

// stream tags, one per experiment
const LIFETIME: u64 = 1;
const RABI: u64 = 2;
const PLE: u64 = 3;
const HBT: u64 = 4;
const RAMSEY: u64 = 5;
const LASER: u64 = 6;

/// Everything an experiment produces before it is written to disk.
pub struct Outcome {
    pub experiment: &'static str,
    pub curves: Vec<(String, CurveData)>,
    pub results: Value,
    pub plots: Vec<(String, String)>,
    pub clicks: Option<Vec<ClickRecord>>,
    /// Set when a mandatory fit did not converge; artifacts are still
    /// written before the error is reported.
    pub failure: Option<CliError>,
}

impl Outcome {
    fn new(experiment: &'static str, results: Value) -> Self {
        Self {
            experiment,
            curves: Vec::new(),
            results,
            plots: Vec::new(),
            clicks: None,
            failure: None,
        }
    }

    fn require(&mut self, fit: &FitResult) {
        if !fit.converged && self.failure.is_none() {
            self.failure = Some(CliError::Fit(format!(
                "{} fit did not converge (status {:?})",
                fit.model, fit.status
            )));
        }
    }
}

fn tagged(mut c: CurveData, seed: u64) -> CurveData {
    c.meta.seed = Some(seed);
    c
}

fn model_line(x: &[f64], f: impl Fn(f64) -> f64) -> (Vec<f64>, Vec<f64>) {
    let (lo, hi) = x.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let xs: Vec<f64> = (0..400).map(|i| lo + (hi - lo) * i as f64 / 399.0).collect();
    let ys = xs.iter().map(|&v| f(v)).collect();
    (xs, ys)
}

pub fn lifetime(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let data = simulate_lifetime(&cfg.emitter, &cfg.lifetime.grid(), cfg.lifetime.peak_counts, &mut substream(cfg.seed, &[LIFETIME]))?;
    let data = tagged(data, cfg.seed);
    let fit = fit_exponential_decay(&data)?;
    let t1 = fit.estimates[1];
    let mut out = Outcome::new(
        "lifetime",
        json!({
            "t1_ns": t1,
            "t1_err_ns": fit.std_errors[1],
            "homogeneous_linewidth_mhz": 1e3 * homogeneous_linewidth_ghz(t1),
            "t2_limit_ns": 2.0 * t1,
            "fit": fit,
        }),
    );
    out.require(&fit);
    let p = fit.estimates.clone();
    let (mx, my) = model_line(&data.x, |t| p[0] * (-t / p[1]).exp() + p[2]);
    out.plots.push((
        "lifetime".into(),
        render(
            &format!("Lifetime: T1 = {t1:.3} ns"),
            &data.x_label,
            &data.y_label,
            &[Series::points("counts", data.x.clone(), data.y.clone()), Series::line("exponential fit", mx, my)],
        ),
    ));
    out.curves.push(("lifetime".into(), data));
    Ok(out)
}

pub fn rabi(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let data = simulate_rabi_sweep(
        &cfg.rabi.powers(),
        &cfg.emitter,
        &cfg.diffusion,
        &cfg.rabi.sweep(),
        &mut substream(cfg.seed, &[RABI]),
    )?;
    let data = tagged(data, cfg.seed);
    let fit = fit_rabi(&data)?;
    let alpha = cfg.emitter.alpha_rad_per_sqrt_uw;
    let mut out = Outcome::new(
        "rabi",
        json!({
            "alpha_rad_per_sqrt_uw": fit.alpha,
            "alpha_err": fit.alpha_err,
            "pi_power_uw": fit.pi_power_uw,
            "pi_power_err_uw": fit.pi_power_err_uw,
            "pi_half_power_uw": fit.pi_power_uw / 4.0,
            "configured_pi_power_uw": pi_pulse_power(alpha),
            "area_at_max_power_over_pi": area_from_power(alpha, cfg.rabi.p_max_uw)? / PI,
            "ambiguous_period": fit.ambiguous,
            "fit": fit.fit,
        }),
    );
    out.require(&fit.fit);
    let p = fit.fit.estimates.clone();
    let (mx, my) = model_line(&data.x, |pw| {
        let s = pw.max(0.0).sqrt();
        p[0] - p[1] * (2.0 * p[2] * s).cos() * (-p[3] * s).exp()
    });
    let sqrt_x: Vec<f64> = data.x.iter().map(|v| v.sqrt()).collect();
    let sqrt_mx: Vec<f64> = mx.iter().map(|v| v.sqrt()).collect();
    out.plots.push((
        "rabi".into(),
        render(
            &format!("Rabi: P_pi = {:.2} uW", fit.pi_power_uw),
            "sqrt(power_uw)",
            &data.y_label,
            &[Series::points("signal", sqrt_x, data.y.clone()), Series::line("fit", sqrt_mx, my)],
        ),
    ));
    out.curves.push(("rabi".into(), data));
    Ok(out)
}

pub fn ple(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let scan = cfg.ple.scan();
    let sigma = cfg.diffusion.sigma_rad_per_ns;
    let e = &cfg.emitter;
    let mut rng = substream(cfg.seed, &[PLE]);
    let data = tagged(simulate_ple_scan(&cfg.ple.detunings(), &scan, e, &cfg.diffusion, &mut rng)?, cfg.seed);
    let voigt = fit_voigt(&data)?;
    let lorentz = fit_lorentzian(&data)?;
    let fl = ple_lorentzian_fwhm_ghz(scan.power_uw, scan.psat_uw, e.t1_ns, e.gamma_phi_per_ns);
    let fg = gaussian_fwhm_ghz(sigma);
    let exact = numeric_fwhm(
        |d| ple_lineshape(d, scan.power_uw, scan.psat_uw, e.t1_ns, e.gamma_phi_per_ns, sigma),
        fl.max(fg),
    );
    let series = if cfg.ple.series_powers_uw.is_empty() {
        None
    } else {
        Some(tagged(
            ple_linewidth_vs_power(&cfg.ple.detunings(), &cfg.ple.series_powers_uw, &scan, e, &cfg.diffusion, &mut rng)?,
            cfg.seed,
        ))
    };
    let mut out = Outcome::new(
        "ple",
        json!({
            "fwhm_ghz": voigt.line.fwhm,
            "fwhm_err_ghz": voigt.line.fwhm_err,
            "fwhm_lorentz_ghz": voigt.fwhm_lorentz,
            "fwhm_gauss_ghz": voigt.fwhm_gauss,
            "model_fwhm_ghz": exact,
            "model_olivero_fwhm_ghz": olivero_voigt_fwhm(fl, fg),
            "homogeneous_linewidth_ghz": homogeneous_linewidth_ghz(e.t1_ns),
            "lorentzian_only_fwhm_ghz": lorentz.fwhm,
            "voigt_fit": voigt.line.fit,
            "lorentzian_fit": lorentz.fit,
            "fwhm_vs_power": series.as_ref().map(|s| json!({"power_uw": s.x, "fwhm_ghz": s.y})),
        }),
    );
    out.require(&voigt.line.fit);
    let (mx, my) = model_line(&data.x, |d| {
        let m = coherence_core::fitting::Voigt;
        coherence_core::FitModel::predict(&m, d, &voigt.line.fit.estimates)
    });
    out.plots.push((
        "ple".into(),
        render(
            &format!("PLE: Voigt FWHM = {:.3} GHz", voigt.line.fwhm),
            &data.x_label,
            &data.y_label,
            &[Series::points("counts", data.x.clone(), data.y.clone()), Series::line("Voigt fit", mx, my)],
        ),
    ));
    if let Some(s) = &series {
        let (bx, by) = model_line(&s.x, |p| {
            numeric_fwhm(|d| ple_lineshape(d, p, scan.psat_uw, e.t1_ns, e.gamma_phi_per_ns, sigma), fg)
        });
        out.plots.push((
            "ple_power".into(),
            render(
                "PLE linewidth vs power",
                &s.x_label,
                &s.y_label,
                &[Series::points("fitted FWHM", s.x.clone(), s.y.clone()), Series::line("steady-state model", bx, by)],
            ),
        ));
    }
    out.curves.push(("ple".into(), data));
    if let Some(s) = series {
        out.curves.push(("ple_power".into(), s));
    }
    Ok(out)
}

/// Wandering model used by the Ramsey pipeline, calibrated when requested.
pub fn ramsey_diffusion(cfg: &RunConfig) -> Result<SpectralDiffusionModel, CliError> {
    let mut d = cfg.diffusion;
    if cfg.ramsey.calibrate_t2_star_ns > 0.0 {
        let delays = default_long_delays(&cfg.ramsey.geometry, cfg.ramsey.delay_steps);
        d.sigma_rad_per_ns = calibrate_sigma_for_t2_star(cfg.ramsey.calibrate_t2_star_ns, &cfg.emitter, &delays)?;
    }
    Ok(d)
}

pub fn pi_half_power(e: &EmitterParams) -> f64 {
    pi_pulse_power(e.alpha_rad_per_sqrt_uw) / 4.0
}

pub fn ramsey(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let r = &cfg.ramsey;
    let diffusion = ramsey_diffusion(cfg)?;
    let delays = default_long_delays(&r.geometry, r.delay_steps);
    let power = pi_half_power(&cfg.emitter);
    let vis = visibility_series(
        &delays,
        &r.geometry,
        &cfg.emitter,
        &diffusion,
        power,
        r.shots,
        &mut substream(cfg.seed, &[RAMSEY, 0]),
    )?;
    let vis = tagged(vis, cfg.seed);
    // Unweighted, like the calibration: near τ = 0 the Monte Carlo errors
    // vanish and would pin the fit to the non-Gaussian T1 part of the decay.
    let mut unweighted = vis.clone();
    unweighted.y_err = None;
    let fit = fit_gaussian_envelope(&unweighted, r.envelope_floor)?;
    let t2_star = fit.estimates[1];
    let interferogram = simulate_ramsey_interferogram(
        0.0,
        &r.geometry,
        &cfg.emitter,
        &diffusion,
        power,
        r.shots,
        &mut substream(cfg.seed, &[RAMSEY, 1]),
    )?;
    let mut out = Outcome::new(
        "ramsey",
        json!({
            "t2_star_ns": t2_star,
            "t2_star_err_ns": fit.std_errors[1],
            "v0": fit.estimates[0],
            "t2_homogeneous_bound_ns": cfg.emitter.t2_hom_ns(),
            "t2_star_below_bound": t2_star < cfg.emitter.t2_hom_ns(),
            "sigma_rad_per_ns": diffusion.sigma_rad_per_ns,
            "pi_half_power_uw": power,
            "step_delay_ns": r.geometry.step_delay_ns(),
            "missing_points": vis.y.iter().filter(|v| v.is_nan()).count(),
            "fit": fit,
        }),
    );
    out.require(&fit);
    let p = fit.estimates.clone();
    let floor = r.envelope_floor;
    let (mx, my) = model_line(&vis.x, |t| {
        let x = t / p[1];
        let base = if floor { p[2] } else { 0.0 };
        base + p[0] * (-x * x).exp()
    });
    out.plots.push((
        "ramsey".into(),
        render(
            &format!("Ramsey visibility: T2* = {t2_star:.3} ns"),
            &vis.x_label,
            &vis.y_label,
            &[Series::points("visibility", vis.x.clone(), vis.y.clone()), Series::line("Gaussian fit", mx, my)],
        ),
    ));
    let ig_curve = tagged(interferogram.to_curve(), cfg.seed);
    out.plots.push((
        "ramsey_interferogram".into(),
        render(
            "Interferogram at zero long-arm delay",
            &ig_curve.x_label,
            &ig_curve.y_label,
            &[Series::line("signal", ig_curve.x.clone(), ig_curve.y.clone())],
        ),
    ));
    out.curves.push(("ramsey_visibility".into(), vis));
    out.curves.push(("ramsey_interferogram".into(), ig_curve));
    Ok(out)
}

pub fn g2(cfg: &RunConfig, keep_clicks: bool) -> Result<Outcome, CliError> {
    let h = &cfg.hbt;
    let clicks = simulate_photon_stream(h, &mut substream(cfg.seed, &[HBT]))?;
    let hist = coincidence_histogram(&clicks, h)?;
    let (g, se) = match (g2_zero(&hist), g2_zero_std_error(&hist)) {
        (Ok(g), Ok(se)) => (g, se),
        (Err(e), _) | (_, Err(e)) => return Err(CliError::Fit(format!("g2(0) undefined: {e}"))),
    };
    let analytic = analytic_g2_zero(h.p1, h.p2)?;
    let mut out = Outcome::new(
        "g2",
        json!({
            "g2_zero": g,
            "g2_zero_err": se,
            "analytic_g2_zero": analytic,
            "purity": 1.0 - g,
            "central_area": hist.central_area(),
            "peak_offsets": hist.peak_offsets,
            "peak_areas": hist.peak_areas,
            "clicks_a": hist.clicks_a,
            "clicks_b": hist.clicks_b,
            "empty": hist.empty,
        }),
    );
    let x = hist.centers_ns.clone();
    let y: Vec<f64> = hist.counts.iter().map(|&c| c as f64).collect();
    let curve = CurveData::new("delay_ns", "coincidences", x, y).with_meta(CurveMeta {
        experiment: "g2".into(),
        seed: Some(cfg.seed),
        shots: Some(h.n_pulses),
    });
    out.plots.push((
        "g2".into(),
        render(
            &format!("HBT: g2(0) = {g:.3}"),
            &curve.x_label,
            &curve.y_label,
            &[Series::line("coincidences", curve.x.clone(), curve.y.clone())],
        ),
    ));
    out.curves.push(("g2".into(), curve));
    if keep_clicks {
        out.clicks = Some(clicks);
    }
    Ok(out)
}

/// Laser-only fringe visibility against the emitter's at one long-arm step.
pub fn laser(cfg: &RunConfig) -> Result<Outcome, CliError> {
    let geometry = &cfg.ramsey.geometry;
    let step_ps = geometry.step_delay_ns() * 1e3;
    let laser_vis = laser_autocorrelation(step_ps, &cfg.laser);
    let diffusion = ramsey_diffusion(cfg)?;
    let vis = visibility_series(
        &[0.0, geometry.step_delay_ns()],
        geometry,
        &cfg.emitter,
        &diffusion,
        pi_half_power(&cfg.emitter),
        cfg.ramsey.shots,
        &mut substream(cfg.seed, &[LASER]),
    )?;
    let ratio = vis.y[1] / vis.y[0];
    let mut out = Outcome::new(
        "laser",
        json!({
            "step_delay_ps": step_ps,
            "laser_visibility": laser_vis,
            "emitter_v0": vis.y[0],
            "emitter_visibility": vis.y[1],
            "emitter_ratio": ratio,
            "laser_interference_excluded": laser_vis < 1e-10 && ratio > 0.9,
        }),
    );
    let x: Vec<f64> = (0..=200).map(|i| 0.25 * i as f64).collect();
    let y = x.iter().map(|&d| laser_autocorrelation(d, &cfg.laser)).collect();
    let curve = CurveData::new("delay_ps", "laser_visibility", x, y).with_meta(CurveMeta {
        experiment: "laser".into(),
        seed: Some(cfg.seed),
        shots: None,
    });
    out.plots.push((
        "laser".into(),
        render(
            "Laser field autocorrelation",
            &curve.x_label,
            &curve.y_label,
            &[Series::line("laser", curve.x.clone(), curve.y.clone())],
        ),
    ));
    out.curves.push(("laser".into(), curve));
    Ok(out)
}
