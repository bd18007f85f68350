use nalgebra::DMatrix;

use super::FitModel;
use crate::data::CurveData;
use crate::error::{Error, Result};

/// ∂f(x_i)/∂p_j by central differences with step max(1e−6·|p_j|, 1e−8).
///
/// Fails if the model is non-finite at any perturbed point.
pub fn finite_diff_jacobian(model: &dyn FitModel, params: &[f64], data: &CurveData) -> Result<DMatrix<f64>> {
    jacobian_at(model, params, &data.x)
}

pub(crate) fn jacobian_at(model: &dyn FitModel, params: &[f64], xs: &[f64]) -> Result<DMatrix<f64>> {
    let n = params.len();
    let mut jac = DMatrix::zeros(xs.len(), n);
    let mut p = params.to_vec();
    for j in 0..n {
        let h = (1e-6 * params[j].abs()).max(1e-8);
        p[j] = params[j] + h;
        let up: Vec<f64> = xs.iter().map(|&x| model.predict(x, &p)).collect();
        p[j] = params[j] - h;
        let down: Vec<f64> = xs.iter().map(|&x| model.predict(x, &p)).collect();
        p[j] = params[j];
        let inv = 1.0 / (2.0 * h);
        for i in 0..xs.len() {
            let d = (up[i] - down[i]) * inv;
            if !d.is_finite() {
                return Err(Error::Fit {
                    model: model.name().to_string(),
                    reason: format!("non-finite prediction near parameter `{}`", model.params()[j].name),
                });
            }
            jac[(i, j)] = d;
        }
    }
    Ok(jac)
}
