use std::f64::consts::PI;

use coherence_core::fitting::{
    finite_diff_jacobian, fit_exponential_decay, fit_gaussian_envelope, fit_least_squares, fit_lorentzian,
    fit_rabi, fit_sinusoid_visibility, fit_voigt, ExponentialDecay, ParamSpec, Sinusoid,
};
use coherence_core::noise::{gaussian_fwhm_ghz, homogeneous_linewidth_ghz};
use coherence_core::rng::substream;
use coherence_core::{CurveData, FitModel, FitStatus};
use nalgebra::DMatrix;
use rand::Rng;
use rand_distr::StandardNormal;

struct Line;

const LINE: [ParamSpec; 2] = [ParamSpec::free("slope", "y/x"), ParamSpec::free("intercept", "y")];

impl FitModel for Line {
    fn name(&self) -> &str {
        "line"
    }
    fn params(&self) -> &[ParamSpec] {
        &LINE
    }
    fn predict(&self, x: f64, p: &[f64]) -> f64 {
        p[0] * x + p[1]
    }
}

/// Depends on p[0] only; p[1] has no effect on the prediction.
struct Deaf;

const DEAF: [ParamSpec; 2] = [ParamSpec::free("a", "1"), ParamSpec::free("ghost", "1")];

impl FitModel for Deaf {
    fn name(&self) -> &str {
        "deaf"
    }
    fn params(&self) -> &[ParamSpec] {
        &DEAF
    }
    fn predict(&self, x: f64, p: &[f64]) -> f64 {
        p[0] * x
    }
}

fn grid(lo: f64, hi: f64, n: usize) -> Vec<f64> {
    (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
}

fn curve(x: Vec<f64>, f: impl Fn(f64) -> f64) -> CurveData {
    let y = x.iter().map(|&v| f(v)).collect();
    CurveData::new("x", "y", x, y)
}

#[test]
fn linear_fit_matches_normal_equations() {
    let mut rng = substream(11, &[]);
    let x = grid(-3.0, 5.0, 40);
    let y: Vec<f64> = x
        .iter()
        .map(|&v| 1.7 * v - 0.3 + 0.2 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let n = x.len() as f64;
    let (sx, sy) = (x.iter().sum::<f64>(), y.iter().sum::<f64>());
    let sxx: f64 = x.iter().map(|v| v * v).sum();
    let sxy: f64 = x.iter().zip(&y).map(|(a, b)| a * b).sum();
    let slope = (n * sxy - sx * sy) / (n * sxx - sx * sx);
    let icpt = (sy - slope * sx) / n;
    let fit = fit_least_squares(&Line, &CurveData::new("x", "y", x, y), &[0.0, 0.0]).unwrap();
    assert!(fit.converged);
    assert!((fit.estimates[0] - slope).abs() < 1e-10);
    assert!((fit.estimates[1] - icpt).abs() < 1e-10);
}

#[test]
fn linear_jacobian_is_exact_design_matrix() {
    let x = grid(0.0, 2.0, 5);
    let data = curve(x.clone(), |v| v);
    let j = finite_diff_jacobian(&Line, &[3.0, 1.0], &data).unwrap();
    for (i, &xi) in x.iter().enumerate() {
        assert!((j[(i, 0)] - xi).abs() < 1e-9);
        assert!((j[(i, 1)] - 1.0).abs() < 1e-9);
    }
}

#[test]
fn zero_sensitivity_parameter_is_flagged_singular() {
    let data = curve(grid(0.0, 1.0, 10), |v| 2.0 * v);
    let j = finite_diff_jacobian(&Deaf, &[1.0, 1.0], &data).unwrap();
    assert!(j.column(1).iter().all(|v| *v == 0.0));
    let fit = fit_least_squares(&Deaf, &data, &[1.0, 1.0]).unwrap();
    assert!(!fit.converged);
    assert_eq!(fit.status, FitStatus::Singular);
}

#[test]
fn noiseless_exponential_recovers_reference_lifetime() {
    let data = curve(grid(0.0, 15.0, 150), |t| 1000.0 * (-t / 1.95).exp() + 3.0);
    let fit = fit_exponential_decay(&data).unwrap();
    assert!(fit.converged);
    assert!((fit.value("t1_ns").unwrap() - 1.95).abs() < 1e-4);
    for (got, want) in fit.estimates.iter().zip([1000.0, 1.95, 3.0]) {
        assert!(((got - want) / want).abs() < 1e-6);
    }
}

#[test]
fn constant_decay_data_is_not_converged() {
    let data = curve(grid(0.0, 10.0, 50), |_| 42.0);
    let fit = fit_exponential_decay(&data).unwrap();
    assert!(!fit.converged);
}

#[test]
fn rising_data_is_not_a_decay() {
    let data = curve(grid(0.0, 10.0, 50), |t| 5.0 - 4.0 * (-t).exp());
    let fit = fit_exponential_decay(&data).unwrap();
    assert!(!fit.converged);
}

#[test]
fn exponential_jacobian_matches_analytic() {
    let mut rng = substream(3, &[]);
    let x = grid(0.0, 10.0, 25);
    let data = curve(x.clone(), |_| 0.0);
    for _ in 0..100 {
        // offsets stay within four decades of the amplitude; beyond that the
        // offset column is dominated by rounding in y itself
        let amp = 10f64.powf(rng.random_range(-1.0..4.0));
        let sign = if rng.random_bool(0.5) { 1.0 } else { -1.0 };
        let p = [amp, rng.random_range(0.2..10.0), sign * amp * rng.random_range(1e-3..0.5)];
        let j = finite_diff_jacobian(&ExponentialDecay, &p, &data).unwrap();
        let analytic = DMatrix::from_fn(x.len(), 3, |i, k| {
            let t = x[i];
            let e = (-t / p[1]).exp();
            [e, p[0] * t * e / (p[1] * p[1]), 1.0][k]
        });
        assert_columns_close(&j, &analytic, 1e-6);
    }
}

/// Relative agreement per column, measured against the column's largest
/// analytic entry.
fn assert_columns_close(fd: &DMatrix<f64>, analytic: &DMatrix<f64>, tol: f64) {
    for k in 0..analytic.ncols() {
        let scale = analytic.column(k).amax();
        let err = (fd.column(k) - analytic.column(k)).amax();
        assert!(err <= tol * scale, "column {k}: error {err:e} vs scale {scale:e}");
    }
}

#[test]
fn sinusoid_jacobian_matches_analytic() {
    let mut rng = substream(4, &[]);
    let x = grid(0.0, 3.0, 30);
    let data = curve(x.clone(), |_| 0.0);
    for _ in 0..100 {
        let p = [
            rng.random_range(0.1..5.0),
            rng.random_range(0.05..0.95),
            rng.random_range(0.5..5.0),
            rng.random_range(-PI..PI),
        ];
        let j = finite_diff_jacobian(&Sinusoid, &p, &data).unwrap();
        let analytic = DMatrix::from_fn(x.len(), 4, |i, k| {
            let v = x[i];
            let (s, c) = (2.0 * PI * p[2] * v + p[3]).sin_cos();
            [1.0 + p[1] * c, p[0] * c, -p[0] * p[1] * s * 2.0 * PI * v, -p[0] * p[1] * s][k]
        });
        assert_columns_close(&j, &analytic, 1e-6);
    }
}

/// Gaussian noise of 1% of the peak, 200 points: each parameter should land
/// within three reported standard errors of the truth in at least 95% of
/// trials.
#[test]
fn standard_errors_have_nominal_coverage() {
    let x = grid(0.0, 10.0, 200);
    let truth = [100.0, 1.95, 5.0];
    let trials = 1000;
    let mut hits = [0usize; 3];
    for trial in 0..trials {
        let mut rng = substream(2024, &[trial]);
        let y: Vec<f64> = x
            .iter()
            .map(|&t| {
                let m = truth[0] * (-t / truth[1]).exp() + truth[2];
                m + 0.01 * truth[0] * rng.sample::<f64, _>(StandardNormal)
            })
            .collect();
        let fit = fit_exponential_decay(&CurveData::new("t_ns", "counts", x.clone(), y)).unwrap();
        assert!(fit.converged);
        for k in 0..3 {
            if (fit.estimates[k] - truth[k]).abs() <= 3.0 * fit.std_errors[k] {
                hits[k] += 1;
            }
        }
    }
    for (k, h) in hits.iter().enumerate() {
        assert!(*h as f64 >= 0.95 * trials as f64, "parameter {k}: {h}/{trials}");
    }
}

#[test]
fn refit_from_converged_solution_is_idempotent() {
    let mut rng = substream(8, &[]);
    let x = grid(0.0, 12.0, 120);
    let y: Vec<f64> = x
        .iter()
        .map(|&t| 500.0 * (-t / 1.95).exp() + 2.0 + rng.sample::<f64, _>(StandardNormal))
        .collect();
    let data = CurveData::new("t_ns", "counts", x, y);
    let first = fit_exponential_decay(&data).unwrap();
    let again = fit_least_squares(&ExponentialDecay, &data, &first.estimates).unwrap();
    assert!(again.converged);
    assert!(again.iterations <= 2, "{} iterations", again.iterations);
    for (a, b) in first.estimates.iter().zip(&again.estimates) {
        assert!((a - b).abs() <= 1e-9 * a.abs().max(1.0));
    }
}

#[test]
fn scaling_y_and_errors_leaves_shapes_unchanged() {
    let mut rng = substream(9, &[]);
    let x = grid(0.0, 12.0, 120);
    let y: Vec<f64> = x
        .iter()
        .map(|&t| 500.0 * (-t / 1.95).exp() + 2.0 + rng.sample::<f64, _>(StandardNormal))
        .collect();
    let err = vec![1.0; x.len()];
    let a = CurveData::new("t", "y", x.clone(), y.clone()).with_errors(err.clone());
    let k = 37.5;
    let b = CurveData::new("t", "y", x, y.iter().map(|v| v * k).collect())
        .with_errors(err.iter().map(|v| v * k).collect());
    let fa = fit_exponential_decay(&a).unwrap();
    let fb = fit_exponential_decay(&b).unwrap();
    assert!((fa.estimates[1] - fb.estimates[1]).abs() < 1e-9 * fa.estimates[1]);
    assert!((fb.estimates[0] / fa.estimates[0] - k).abs() < 1e-9 * k);
    assert!((fb.estimates[2] / fa.estimates[2] - k).abs() < 1e-9 * k);

    // the same for a fringe visibility
    let xs = grid(0.0, 1.0, 64);
    let ys: Vec<f64> = xs
        .iter()
        .map(|&v| 0.5 * (1.0 + 0.6 * (2.0 * PI * 6.3 * v + 1.0).cos()) + 0.01 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let sa = fit_sinusoid_visibility(&CurveData::new("x", "y", xs.clone(), ys.clone())).unwrap();
    let sb = fit_sinusoid_visibility(&CurveData::new("x", "y", xs, ys.iter().map(|v| v * k).collect())).unwrap();
    assert!((sa.visibility - sb.visibility).abs() < 1e-9);
    assert!((sa.frequency - sb.frequency).abs() < 1e-9 * sa.frequency);
    assert!((sb.offset / sa.offset - k).abs() < 1e-9 * k);
}

#[test]
fn sinusoid_visibility_examples() {
    let x = grid(0.0, 1.0, 80);
    let full = fit_sinusoid_visibility(&curve(x.clone(), |v| 0.5 + 0.5 * (2.0 * PI * 5.0 * v).cos())).unwrap();
    assert!(full.fit.converged);
    assert!((full.visibility - 1.0).abs() < 1e-6);

    let e = (-1.0f64).exp();
    let part = fit_sinusoid_visibility(&curve(x.clone(), |v| 0.5 + 0.5 * e * (2.0 * PI * 5.0 * v + 2.0).cos())).unwrap();
    assert!((part.visibility - e).abs() < 1e-6);
    assert!((part.amplitude - 0.5 * e).abs() < 1e-6);

    let flat = fit_sinusoid_visibility(&curve(x, |_| 0.25)).unwrap();
    assert!(flat.fit.converged);
    assert_eq!(flat.visibility, 0.0);
}

#[test]
fn sinusoid_needs_enough_fringes() {
    let x = grid(0.0, 1.0, 80);
    assert!(fit_sinusoid_visibility(&curve(x, |v| 1.0 + 0.5 * (2.0 * PI * 2.0 * v).cos())).is_err());
    let sparse = grid(0.0, 1.0, 30);
    assert!(fit_sinusoid_visibility(&curve(sparse, |v| 1.0 + 0.5 * (2.0 * PI * 6.0 * v).cos())).is_err());
}

#[test]
fn gaussian_envelope_recovery() {
    let tau: Vec<f64> = (0..12).map(|k| k as f64 * 0.08339).collect();
    let data = curve(tau.clone(), |t| 0.97 * (-(t / 0.6) * (t / 0.6)).exp());
    let fit = fit_gaussian_envelope(&data, false).unwrap();
    assert!(fit.converged);
    assert!((fit.value("t2_star_ns").unwrap() - 0.6).abs() < 1e-3);
    assert!(fit.value("v0").unwrap() <= 1.0);

    let floored = curve(tau.clone(), |t| 0.05 + 0.9 * (-(t / 0.6) * (t / 0.6)).exp());
    let fit = fit_gaussian_envelope(&floored, true).unwrap();
    assert!((fit.value("floor").unwrap() - 0.05).abs() < 1e-6);

    let flat = fit_gaussian_envelope(&curve(tau.clone(), |_| 0.4), false).unwrap();
    assert!(!flat.converged);

    let mut gap = curve(tau, |t| 0.9 * (-(t / 0.6) * (t / 0.6)).exp());
    gap.y[4] = f64::NAN;
    let fit = fit_gaussian_envelope(&gap, false).unwrap();
    assert!((fit.value("t2_star_ns").unwrap() - 0.6).abs() < 1e-6);
}

#[test]
fn homogeneous_line_gives_fourier_limited_width() {
    let w = homogeneous_linewidth_ghz(1.95);
    let x = grid(-0.5, 0.5, 201);
    let data = curve(x, |d| 10.0 + 1000.0 / (1.0 + (2.0 * d / w).powi(2)));
    let fit = fit_lorentzian(&data).unwrap();
    assert!(fit.fit.converged);
    assert!((fit.fwhm - 0.0816).abs() < 1e-4);
    assert!(!fit.inverted);
}

#[test]
fn dip_is_flagged_inverted() {
    let x = grid(-1.0, 1.0, 101);
    let data = curve(x, |d| 100.0 - 40.0 / (1.0 + (2.0 * d / 0.2).powi(2)));
    let fit = fit_lorentzian(&data).unwrap();
    assert!(fit.inverted);
    assert!(fit.amplitude < 0.0);
    assert!((fit.fwhm - 0.2).abs() < 1e-6);
    assert!(fit.fit.flags.iter().any(|f| f == "inverted"));
}

/// The Lorentzian fit of a pure Gaussian line. Its reported FWHM comes
/// out narrower than the true Gaussian FWHM.
#[test]
fn lorentzian_misfit_of_gaussian_line_is_narrower() {
    let sigma = 2.357 / (2.0 * PI);
    let true_fwhm = gaussian_fwhm_ghz(2.357);
    let x = grid(-3.0, 3.0, 241);
    let data = curve(x, |d| 1000.0 * (-0.5 * (d / sigma).powi(2)).exp());
    let fit = fit_lorentzian(&data).unwrap();
    assert!(fit.fwhm < true_fwhm, "{} vs {}", fit.fwhm, true_fwhm);
}

#[test]
fn voigt_recovers_both_widths() {
    let (fl, fg) = (0.15, 0.8);
    let sigma = fg / (2.0 * (2.0 * 2f64.ln()).sqrt());
    let x = grid(-3.0, 3.0, 241);
    let data = curve(x, |d| 5.0 + 900.0 * coherence_core::noise::voigt_profile(d, sigma, fl / 2.0)
        / coherence_core::noise::voigt_profile(0.0, sigma, fl / 2.0));
    let fit = fit_voigt(&data).unwrap();
    assert!(fit.line.fit.converged);
    assert!((fit.fwhm_lorentz - fl).abs() < 1e-5);
    assert!((fit.fwhm_gauss - fg).abs() < 1e-5);
}

#[test]
fn rabi_noiseless_calibration() {
    let alpha = 0.4606;
    let p: Vec<f64> = grid(0.0, 250.0, 120);
    let data = curve(p, |pw| (alpha * pw.sqrt()).sin().powi(2));
    let fit = fit_rabi(&data).unwrap();
    assert!(fit.fit.converged);
    assert!((fit.alpha - alpha).abs() < 1e-6);
    assert!((fit.pi_power_uw - 11.63).abs() < 0.01);
    assert!(fit.fit.value("beta").unwrap().abs() < 1e-6);
    assert!(!fit.ambiguous);
}

#[test]
fn rabi_damping_zero_within_error_on_noisy_undamped_data() {
    let mut rng = substream(21, &[]);
    let p: Vec<f64> = grid(0.0, 250.0, 120);
    let y: Vec<f64> = p
        .iter()
        .map(|&pw| (0.4606 * pw.sqrt()).sin().powi(2) + 0.01 * rng.sample::<f64, _>(StandardNormal))
        .collect();
    let fit = fit_rabi(&CurveData::new("power_uw", "signal", p, y)).unwrap();
    let beta = fit.fit.value("beta").unwrap();
    let se = fit.fit.std_error("beta").unwrap();
    assert!(beta.abs() <= 3.0 * se, "beta {beta} ± {se}");
}

#[test]
fn rabi_rejects_too_few_periods() {
    let p: Vec<f64> = grid(0.0, 20.0, 60);
    let data = curve(p, |pw| (0.4606 * pw.sqrt()).sin().powi(2));
    assert!(fit_rabi(&data).is_err());
}

#[test]
fn fits_are_deterministic() {
    let data = curve(grid(0.0, 15.0, 150), |t| 1000.0 * (-t / 1.95).exp() + 3.0 + (t * 7.0).sin());
    let a = fit_exponential_decay(&data).unwrap();
    let b = fit_exponential_decay(&data).unwrap();
    assert_eq!(a, b);
}
