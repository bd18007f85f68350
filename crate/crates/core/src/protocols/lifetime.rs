use rand::Rng;

use super::poisson_count;
use crate::data::{CurveData, CurveMeta};
use crate::dynamics::EmitterParams;
use crate::error::{Error, Result};

/// Expected counts A e^{−t/T1}.
pub fn lifetime_expectation(t_ns: f64, t1_ns: f64, peak_counts: f64) -> f64 {
    peak_counts * (-t_ns / t1_ns).exp()
}

/// Time-resolved fluorescence after pulsed excitation, each bin
/// Poisson-sampled around `peak_counts · e^{−t/T1}`. Uncertainties are
/// √max(n, 1).
pub fn simulate_lifetime<R: Rng + ?Sized>(
    params: &EmitterParams,
    t_grid_ns: &[f64],
    peak_counts: f64,
    rng: &mut R,
) -> Result<CurveData> {
    params.validate()?;
    if !(peak_counts > 0.0 && peak_counts.is_finite()) {
        return Err(Error::param("peak_counts", "must be finite and > 0"));
    }
    if t_grid_ns.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::param("t_grid_ns", "must be strictly increasing"));
    }
    let y: Vec<f64> = t_grid_ns
        .iter()
        .map(|&t| poisson_count(rng, lifetime_expectation(t, params.t1_ns, peak_counts)))
        .collect();
    let err = y.iter().map(|n| n.max(1.0).sqrt()).collect();
    Ok(CurveData::new("t_ns", "counts", t_grid_ns.to_vec(), y)
        .with_errors(err)
        .with_meta(CurveMeta {
            experiment: "lifetime".into(),
            seed: None,
            shots: None,
        }))
}
