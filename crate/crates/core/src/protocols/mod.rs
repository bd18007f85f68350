//! Synthetic versions of the four experiments: lifetime, Rabi power sweep,
//! PLE scan and Michelson-delayed Ramsey interferometry.
//!
//! The detected signal is always a single efficiency times the excited
//! population (or its expectation), so absolute count levels are
//! configuration, not physics.

mod lifetime;
mod ple;
mod rabi;
mod ramsey;

pub use lifetime::{lifetime_expectation, simulate_lifetime};
pub use ple::{ple_linewidth_vs_power, simulate_ple_scan, PleScan};
pub use rabi::{rabi_population_ideal, simulate_rabi_sweep, RabiSweep};
pub use ramsey::{
    calibrate_sigma_for_t2_star, default_long_delays, noiseless_visibility,
    ramsey_population_dephased, ramsey_population_ideal, ramsey_shot_population,
    simulate_ramsey_interferogram, visibility_series, Interferogram, MichelsonGeometry,
};

use rand::Rng;
use rand_distr::{Distribution, Poisson};

/// One Poisson draw; nonpositive means give zero.
pub(crate) fn poisson_count<R: Rng + ?Sized>(rng: &mut R, mean: f64) -> f64 {
    if !(mean > 0.0) {
        return 0.0;
    }
    match Poisson::new(mean) {
        Ok(p) => p.sample(rng),
        Err(_) => mean.round(),
    }
}
