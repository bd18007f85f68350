use std::f64::consts::PI;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// π-pulse power of the characterised emitter, μW.
pub const REFERENCE_PI_POWER_UW: f64 = 11.63;

/// Physical constants of a two-level emitter.
///
/// `t1_ns` may be `f64::INFINITY` to switch radiative decay off.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct EmitterParams {
    /// Radiative lifetime, ns.
    pub t1_ns: f64,
    /// Optical transition frequency, GHz.
    pub nu0_ghz: f64,
    /// Pure-dephasing rate, 1/ns.
    pub gamma_phi_per_ns: f64,
    /// Pulse-area calibration α in P_e = sin²(α√P), rad/√μW.
    pub alpha_rad_per_sqrt_uw: f64,
    /// Per-pulse two-photon emission probability.
    pub eps_two_photon: f64,
}

impl Default for EmitterParams {
    fn default() -> Self {
        Self {
            t1_ns: 1.95,
            nu0_ghz: 687_600.0,
            gamma_phi_per_ns: 0.0,
            alpha_rad_per_sqrt_uw: PI / (2.0 * REFERENCE_PI_POWER_UW.sqrt()),
            eps_two_photon: 0.0094,
        }
    }
}

impl EmitterParams {
    pub fn validate(&self) -> Result<()> {
        if !(self.t1_ns > 0.0) {
            return Err(Error::param("t1_ns", "must be > 0"));
        }
        if !(self.nu0_ghz > 0.0 && self.nu0_ghz.is_finite()) {
            return Err(Error::param("nu0_ghz", "must be finite and > 0"));
        }
        if !(self.gamma_phi_per_ns >= 0.0 && self.gamma_phi_per_ns.is_finite()) {
            return Err(Error::param("gamma_phi_per_ns", "must be finite and >= 0"));
        }
        if !(self.alpha_rad_per_sqrt_uw > 0.0 && self.alpha_rad_per_sqrt_uw.is_finite()) {
            return Err(Error::param("alpha_rad_per_sqrt_uw", "must be finite and > 0"));
        }
        if !(0.0..1.0).contains(&self.eps_two_photon) {
            return Err(Error::param("eps_two_photon", "must lie in [0, 1)"));
        }
        Ok(())
    }

    /// Population decay rate Γ1 = 1/T1.
    pub fn gamma1(&self) -> f64 {
        1.0 / self.t1_ns
    }

    /// Coherence decay rate Γ2 = 1/(2T1) + γφ.
    pub fn gamma2(&self) -> f64 {
        0.5 / self.t1_ns + self.gamma_phi_per_ns
    }

    /// Homogeneous coherence time T2 = 1/Γ2 (≤ 2T1).
    pub fn t2_hom_ns(&self) -> f64 {
        1.0 / self.gamma2()
    }

    /// Transition angular frequency ω0 = 2πν0 in rad/ns.
    pub fn omega0(&self) -> f64 {
        2.0 * PI * self.nu0_ghz
    }

    /// Same emitter with every dissipative channel removed.
    pub fn without_decoherence(mut self) -> Self {
        self.t1_ns = f64::INFINITY;
        self.gamma_phi_per_ns = 0.0;
        self
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_are_valid_and_bounded_by_twice_t1() {
        let p = EmitterParams::default();
        p.validate().unwrap();
        assert!((p.t2_hom_ns() - 3.90).abs() < 1e-12);
        let dephased = EmitterParams {
            gamma_phi_per_ns: 0.3,
            ..p
        };
        assert!(dephased.t2_hom_ns() < 2.0 * dephased.t1_ns);
    }

    #[test]
    fn rejects_out_of_range_fields() {
        let bad = [
            EmitterParams { t1_ns: 0.0, ..Default::default() },
            EmitterParams { nu0_ghz: -1.0, ..Default::default() },
            EmitterParams { gamma_phi_per_ns: -0.1, ..Default::default() },
            EmitterParams { alpha_rad_per_sqrt_uw: 0.0, ..Default::default() },
            EmitterParams { eps_two_photon: 1.0, ..Default::default() },
        ];
        for p in bad {
            assert!(p.validate().is_err(), "{p:?}");
        }
    }

    #[test]
    fn infinite_lifetime_disables_decay() {
        let p = EmitterParams::default().without_decoherence();
        p.validate().unwrap();
        assert_eq!(p.gamma1(), 0.0);
        assert_eq!(p.gamma2(), 0.0);
    }
}
