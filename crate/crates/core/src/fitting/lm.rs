use nalgebra::{DMatrix, DVector, SymmetricEigen};

use super::jacobian::jacobian_at;
use super::nelder_mead;
use super::{FitModel, FitResult, FitStatus};
use crate::data::CurveData;
use crate::error::{Error, Result};

/// Floor on per-point uncertainties when weighting residuals.
const ERR_FLOOR: f64 = 1e-12;

#[derive(Debug, Clone, Copy)]
pub struct LmOptions {
    pub max_iterations: usize,
    pub initial_lambda: f64,
    /// Relative reduction of the residual sum of squares that counts as
    /// converged.
    pub ftol: f64,
    /// Gradient ∞-norm that counts as converged.
    pub gtol: f64,
    /// Run Nelder–Mead from the stalled point and polish again with LM.
    pub nelder_mead_fallback: bool,
}

impl Default for LmOptions {
    fn default() -> Self {
        Self {
            max_iterations: 200,
            initial_lambda: 1e-3,
            ftol: 1e-10,
            gtol: 1e-8,
            nelder_mead_fallback: true,
        }
    }
}

struct Problem<'a> {
    model: &'a dyn FitModel,
    x: &'a [f64],
    y: &'a [f64],
    weights: Vec<f64>,
}

impl Problem<'_> {
    fn residuals(&self, p: &[f64]) -> Option<DVector<f64>> {
        let r = DVector::from_iterator(
            self.x.len(),
            self.x
                .iter()
                .zip(self.y)
                .zip(&self.weights)
                .map(|((&x, &y), &w)| w * (y - self.model.predict(x, p))),
        );
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn cost(&self, p: &[f64]) -> f64 {
        self.residuals(p).map_or(f64::INFINITY, |r| r.norm_squared())
    }

    /// Weighted sensitivity matrix A_ij = w_i ∂f_i/∂p_j.
    fn design(&self, p: &[f64]) -> Result<DMatrix<f64>> {
        let mut a = jacobian_at(self.model, p, self.x)?;
        for (i, w) in self.weights.iter().enumerate() {
            a.row_mut(i).scale_mut(*w);
        }
        Ok(a)
    }

    fn project(&self, p: &mut [f64]) {
        for (v, spec) in p.iter_mut().zip(self.model.params()) {
            *v = spec.clamp(*v);
        }
    }
}

/// Bounded Levenberg–Marquardt fit of `model` to `data` from `init`.
///
/// Residuals are weighted by 1/max(y_err, 1e−12) when the data carry
/// uncertainties. Convergence is declared when the residual sum of squares
/// stops decreasing by more than 1e−10 (relative) or the gradient ∞-norm
/// drops below 1e−8. Failures (singular normal equations, non-finite model
/// values, iteration cap) come back as a non-converged [`FitResult`]; only
/// malformed input is an `Err`.
pub fn fit_least_squares(model: &dyn FitModel, data: &CurveData, init: &[f64]) -> Result<FitResult> {
    fit_with_options(model, data, init, &LmOptions::default())
}

pub fn fit_with_options(
    model: &dyn FitModel,
    data: &CurveData,
    init: &[f64],
    opts: &LmOptions,
) -> Result<FitResult> {
    data.validate()?;
    let n = model.n_params();
    if init.len() != n {
        return Err(Error::Fit {
            model: model.name().to_string(),
            reason: format!("expected {n} initial values, got {}", init.len()),
        });
    }
    if data.len() < n {
        return Err(Error::Fit {
            model: model.name().to_string(),
            reason: format!("{} points cannot determine {n} parameters", data.len()),
        });
    }
    if data.x.iter().chain(&data.y).any(|v| !v.is_finite()) {
        return Err(Error::Data("fit input contains non-finite values".into()));
    }
    let weights = match &data.y_err {
        Some(e) => e.iter().map(|&s| 1.0 / s.max(ERR_FLOOR)).collect(),
        None => vec![1.0; data.len()],
    };
    let problem = Problem {
        model,
        x: &data.x,
        y: &data.y,
        weights,
    };
    let mut start = init.to_vec();
    problem.project(&mut start);

    let first = levenberg_marquardt(&problem, start, opts, 0);
    if first.converged
        || !opts.nelder_mead_fallback
        || !matches!(first.status, FitStatus::MaxIterations)
    {
        return Ok(first);
    }
    // LM stalled: let the simplex move us somewhere better, then polish.
    let cost = |p: &[f64]| problem.cost(p);
    let nm = nelder_mead::minimize(cost, |p| problem.project(p), &first.estimates, 4000);
    let second = levenberg_marquardt(&problem, nm, opts, first.iterations);
    Ok(if second.converged || second.rss < first.rss { second } else { first })
}

fn levenberg_marquardt(problem: &Problem, mut p: Vec<f64>, opts: &LmOptions, iters_before: usize) -> FitResult {
    let model = problem.model;
    let n = p.len();
    let m = problem.x.len();
    let Some(mut r) = problem.residuals(&p) else {
        return FitResult::fail(model, p, FitStatus::NonFinite, iters_before);
    };
    let mut cost = r.norm_squared();
    let mut lambda = opts.initial_lambda;
    let mut status = FitStatus::MaxIterations;
    let mut iterations = iters_before;
    let mut grad_norm = f64::NAN;

    for _ in 0..opts.max_iterations {
        iterations += 1;
        let a = match problem.design(&p) {
            Ok(a) => a,
            Err(_) => return FitResult::fail(model, p, FitStatus::NonFinite, iterations),
        };
        let ata = a.transpose() * &a;
        let g = a.transpose() * &r;
        grad_norm = g.amax();
        if grad_norm < opts.gtol {
            status = FitStatus::SmallGradient;
            break;
        }
        if (0..n).any(|j| ata[(j, j)] == 0.0) {
            status = FitStatus::Singular;
            break;
        }
        let mut done = false;
        let mut accepted = false;
        while lambda < 1e16 {
            let mut lhs = ata.clone();
            for j in 0..n {
                lhs[(j, j)] += lambda * ata[(j, j)];
            }
            let Some(chol) = lhs.cholesky() else {
                lambda *= 10.0;
                continue;
            };
            let delta = chol.solve(&g);
            let mut trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            problem.project(&mut trial);
            let trial_r = problem.residuals(&trial);
            let trial_cost = trial_r.as_ref().map_or(f64::INFINITY, |r| r.norm_squared());
            if trial_cost < cost {
                let rel = (cost - trial_cost) / cost;
                p = trial;
                r = trial_r.expect("finite residuals");
                cost = trial_cost;
                lambda = (lambda / 10.0).max(1e-12);
                accepted = true;
                if rel < opts.ftol {
                    status = FitStatus::SmallReduction;
                    done = true;
                }
                break;
            }
            if trial_cost.is_finite() && (trial_cost - cost).abs() <= opts.ftol * cost {
                status = FitStatus::SmallReduction;
                done = true;
                break;
            }
            lambda *= 10.0;
        }
        if done {
            break;
        }
        if !accepted {
            // no downhill step at any damping
            break;
        }
        if cost == 0.0 {
            status = FitStatus::SmallGradient;
            grad_norm = 0.0;
            break;
        }
    }

    if status == FitStatus::SmallReduction {
        // The stopping step was still damped. Near the minimum the cost is
        // flat to rounding, so finish with undamped Gauss-Newton steps
        // accepted on a shrinking gradient instead.
        let grad = |p: &[f64], r: &DVector<f64>| problem.design(p).ok().map(|a| (a.transpose() * r).amax());
        let mut g_now = grad(&p, &r).unwrap_or(f64::INFINITY);
        for _ in 0..3 {
            let Ok(a) = problem.design(&p) else { break };
            let Some(chol) = (a.transpose() * &a).cholesky() else { break };
            let delta = chol.solve(&(a.transpose() * &r));
            let mut trial: Vec<f64> = p.iter().zip(delta.iter()).map(|(a, b)| a + b).collect();
            problem.project(&mut trial);
            let Some(trial_r) = problem.residuals(&trial) else { break };
            let trial_cost = trial_r.norm_squared();
            let Some(g_trial) = grad(&trial, &trial_r) else { break };
            if trial_cost > cost * (1.0 + 1e-12) || g_trial >= g_now {
                break;
            }
            p = trial;
            r = trial_r;
            cost = trial_cost;
            g_now = g_trial;
        }
        grad_norm = g_now;
    }

    let mut result = FitResult {
        model: model.name().to_string(),
        names: model.params().iter().map(|s| s.name.to_string()).collect(),
        units: model.params().iter().map(|s| s.unit.to_string()).collect(),
        estimates: p.clone(),
        std_errors: vec![f64::NAN; n],
        rss: cost,
        gradient_norm: grad_norm,
        iterations,
        converged: false,
        status,
        flags: Vec::new(),
    };
    result.mark(status);
    if status == FitStatus::Singular {
        return result;
    }
    match problem.design(&p).ok().and_then(|a| covariance(&a)) {
        Some(cov) => {
            let dof = (m.saturating_sub(n)).max(1) as f64;
            let s2 = cost / dof;
            result.std_errors = (0..n).map(|j| (cov[(j, j)] * s2).max(0.0).sqrt()).collect();
        }
        None => result.mark(FitStatus::Singular),
    }
    result
}

/// (AᵀA)⁻¹, or `None` when the scaled normal matrix is numerically rank
/// deficient.
fn covariance(a: &DMatrix<f64>) -> Option<DMatrix<f64>> {
    let ata = a.transpose() * a;
    let n = ata.nrows();
    let d: Vec<f64> = (0..n).map(|j| ata[(j, j)].sqrt()).collect();
    if d.iter().any(|v| !(*v > 0.0) || !v.is_finite()) {
        return None;
    }
    let scaled = DMatrix::from_fn(n, n, |i, j| ata[(i, j)] / (d[i] * d[j]));
    let eig = SymmetricEigen::new(scaled.clone());
    let (lo, hi) = eig
        .eigenvalues
        .iter()
        .fold((f64::INFINITY, 0.0f64), |(a, b), &v| (a.min(v), b.max(v.abs())));
    if !(lo > 1e-13 * hi) {
        return None;
    }
    let inv = scaled.cholesky()?.inverse();
    Some(DMatrix::from_fn(n, n, |i, j| inv[(i, j)] / (d[i] * d[j])))
}
