//! Nonlinear least-squares estimation.
//!
//! [`fit_least_squares`] is a bounded Levenberg–Marquardt solver with a
//! central-difference Jacobian and a Nelder–Mead fallback when LM stalls.
//! The `fit_*` functions in [`models`] wrap it with model-specific initial
//! guesses and derived quantities.

mod jacobian;
mod lm;
pub mod models;
mod nelder_mead;
mod spectrum;

pub use jacobian::finite_diff_jacobian;
pub use lm::{fit_least_squares, LmOptions};
pub use models::{
    fit_exponential_decay, fit_gaussian_envelope, fit_lorentzian, fit_rabi,
    fit_sinusoid_visibility, fit_voigt, ExponentialDecay, GaussianEnvelope, Lorentzian,
    RabiOscillation, RabiFit, SinusoidFit, Sinusoid, VoigtFit, Voigt, LineFit,
};
pub use spectrum::dominant_frequency;

use serde::Serialize;

use crate::data::CurveData;
use crate::error::{Error, Result};

/// One fitted parameter's name, unit and box constraint.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ParamSpec {
    pub name: &'static str,
    pub unit: &'static str,
    pub lower: f64,
    pub upper: f64,
}

impl ParamSpec {
    pub const fn free(name: &'static str, unit: &'static str) -> Self {
        Self {
            name,
            unit,
            lower: f64::NEG_INFINITY,
            upper: f64::INFINITY,
        }
    }

    pub const fn bounded(name: &'static str, unit: &'static str, lower: f64, upper: f64) -> Self {
        Self { name, unit, lower, upper }
    }

    fn clamp(&self, v: f64) -> f64 {
        v.clamp(self.lower, self.upper)
    }
}

/// A parametric curve y = f(x; p).
pub trait FitModel: Sync {
    fn name(&self) -> &str;

    fn params(&self) -> &[ParamSpec];

    fn predict(&self, x: f64, p: &[f64]) -> f64;

    /// Data-driven starting point.
    fn initial_guess(&self, data: &CurveData) -> Result<Vec<f64>> {
        let _ = data;
        Err(Error::Fit {
            model: self.name().to_string(),
            reason: "model has no initial-guess heuristic".into(),
        })
    }

    fn n_params(&self) -> usize {
        self.params().len()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum FitStatus {
    /// Relative reduction of the residual sum of squares fell below 1e−10.
    SmallReduction,
    /// Gradient ∞-norm fell below 1e−8.
    SmallGradient,
    /// Closed-form result (e.g. a flat interferogram).
    Exact,
    MaxIterations,
    /// Normal equations are singular or numerically rank deficient.
    Singular,
    /// The model produced a non-finite value.
    NonFinite,
    /// Input carries no information about the parameters.
    Degenerate,
    /// An estimate left its physical domain (e.g. a nonpositive lifetime).
    OutOfDomain,
}

impl FitStatus {
    pub fn is_converged(self) -> bool {
        matches!(self, FitStatus::SmallReduction | FitStatus::SmallGradient | FitStatus::Exact)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FitResult {
    pub model: String,
    pub names: Vec<String>,
    pub units: Vec<String>,
    pub estimates: Vec<f64>,
    pub std_errors: Vec<f64>,
    /// Weighted residual sum of squares.
    pub rss: f64,
    pub gradient_norm: f64,
    pub iterations: usize,
    pub converged: bool,
    pub status: FitStatus,
    /// Model-specific warnings such as `ambiguous-period` or `inverted`.
    pub flags: Vec<String>,
}

impl FitResult {
    fn index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn value(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.estimates[i])
    }

    pub fn std_error(&self, name: &str) -> Option<f64> {
        self.index(name).map(|i| self.std_errors[i])
    }

    pub(crate) fn fail(model: &dyn FitModel, p: Vec<f64>, status: FitStatus, iterations: usize) -> Self {
        let n = model.n_params();
        FitResult {
            model: model.name().to_string(),
            names: model.params().iter().map(|s| s.name.to_string()).collect(),
            units: model.params().iter().map(|s| s.unit.to_string()).collect(),
            estimates: p,
            std_errors: vec![f64::NAN; n],
            rss: f64::NAN,
            gradient_norm: f64::NAN,
            iterations,
            converged: false,
            status,
            flags: Vec::new(),
        }
    }

    pub(crate) fn mark(&mut self, status: FitStatus) {
        self.status = status;
        self.converged = status.is_converged();
    }
}
