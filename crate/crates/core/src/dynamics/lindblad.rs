//! Fixed-step RK4 integration of the two-level master equation
//!
//! dρ/dt = −i[H, ρ] + Γ1 D[σ−]ρ + (γφ/2) D[σz]ρ,
//!
//! with D[L]ρ = LρL† − ½{L†L, ρ}. The closed-form propagators in
//! `propagate` are checked against this integrator.

use nalgebra::Matrix2;
use num_complex::Complex64;

use super::propagate::hamiltonian_with_phase;
use super::{EmitterParams, Pulse, QuantumState, SequenceSegment};
use crate::error::{Error, Result};

/// Upper bound on the RK4 step, ns.
pub const MAX_STEP_NS: f64 = 1e-3;

type Mat = Matrix2<Complex64>;

struct Rates {
    gamma1: f64,
    gamma_phi: f64,
}

fn rhs(rho: &Mat, h: &Mat, rates: &Rates) -> Mat {
    let i = Complex64::i();
    let mut d = (h * rho - rho * h) * (-i);
    // amplitude damping into |g⟩ (basis index 0)
    let ree = rho[(1, 1)];
    let g1 = rates.gamma1;
    d[(0, 0)] += ree * g1;
    d[(1, 1)] -= ree * g1;
    d[(0, 1)] -= rho[(0, 1)] * (0.5 * g1);
    d[(1, 0)] -= rho[(1, 0)] * (0.5 * g1);
    // pure dephasing: (γφ/2)(σz ρ σz − ρ) damps off-diagonals at γφ
    d[(0, 1)] -= rho[(0, 1)] * rates.gamma_phi;
    d[(1, 0)] -= rho[(1, 0)] * rates.gamma_phi;
    d
}

fn max_step_for(duration_ns: f64) -> f64 {
    (duration_ns / 200.0).min(MAX_STEP_NS)
}

/// Integrates one segment with step at most `dt_ns`.
///
/// `dt_ns` must satisfy `dt <= min(duration/200, 1e-3 ns)`; larger steps are
/// a configuration error.
pub fn propagate_lindblad(
    state: QuantumState,
    segment: &SequenceSegment,
    params: &EmitterParams,
    dt_ns: f64,
) -> Result<QuantumState> {
    let duration = segment.duration_ns();
    if !(duration >= 0.0 && duration.is_finite()) {
        return Err(Error::param("duration_ns", "must be finite and >= 0"));
    }
    if let SequenceSegment::Drive(p) = segment {
        p.validate()?;
    }
    if duration == 0.0 {
        return Ok(state);
    }
    let max = max_step_for(duration);
    if !(dt_ns > 0.0) || dt_ns > max * (1.0 + 1e-12) {
        return Err(Error::StepSize { dt_ns, max_ns: max });
    }

    let rates = Rates {
        gamma1: params.gamma1(),
        gamma_phi: params.gamma_phi_per_ns,
    };
    let n = (duration / dt_ns - 1e-9).ceil().max(1.0) as usize;
    let h = duration / n as f64;
    let ham_at = |t: f64| -> Mat {
        match segment {
            SequenceSegment::Drive(p) => ham_for_pulse(p, t),
            SequenceSegment::FreeEvolution {
                detuning_rad_per_ns,
                ..
            } => hamiltonian_with_phase(0.0, *detuning_rad_per_ns, 0.0),
        }
    };
    let time_dependent = matches!(
        segment,
        SequenceSegment::Drive(Pulse {
            shape: super::PulseShape::GaussianEnvelope,
            ..
        })
    );

    let mut rho = state.density_matrix();
    let h_const = ham_at(0.0);
    let half = Complex64::new(0.5 * h, 0.0);
    let full = Complex64::new(h, 0.0);
    let sixth = Complex64::new(h / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    for k in 0..n {
        let t = k as f64 * h;
        let (h0, hm, h1) = if time_dependent {
            (ham_at(t), ham_at(t + 0.5 * h), ham_at(t + h))
        } else {
            (h_const, h_const, h_const)
        };
        let k1 = rhs(&rho, &h0, &rates);
        let k2 = rhs(&(rho + k1 * half), &hm, &rates);
        let k3 = rhs(&(rho + k2 * half), &hm, &rates);
        let k4 = rhs(&(rho + k3 * full), &h1, &rates);
        rho += (k1 + k2 * two + k3 * two + k4) * sixth;
    }
    Ok(QuantumState::from_density_matrix(&rho))
}

fn ham_for_pulse(p: &Pulse, t: f64) -> Mat {
    hamiltonian_with_phase(p.rabi_frequency_at(t), p.detuning_rad_per_ns, p.phase_rad)
}

/// Integrates a whole sequence, each segment at its largest allowed step
/// capped by `dt_ns`.
pub fn propagate_lindblad_sequence(
    state: QuantumState,
    segments: &[SequenceSegment],
    params: &EmitterParams,
    dt_ns: f64,
) -> Result<QuantumState> {
    segments.iter().try_fold(state, |s, seg| {
        let dur = seg.duration_ns();
        let dt = if dur > 0.0 { dt_ns.min(max_step_for(dur)) } else { dt_ns };
        propagate_lindblad(s, seg, params, dt)
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dynamics::{detuned_rabi_population, propagate_free, propagate_unitary};
    use std::f64::consts::PI;

    #[test]
    fn identity_without_drive_or_decay() {
        let p = EmitterParams::default().without_decoherence();
        let s0 = QuantumState::new(0.3, 0.1, -0.2);
        let s = propagate_lindblad(s0, &SequenceSegment::free(1.0), &p, 1e-3).unwrap();
        assert!(s.max_abs_diff(&s0) < 1e-15);
    }

    #[test]
    fn resonant_pi_pulse_inverts() {
        let p = EmitterParams::default().without_decoherence();
        let seg = SequenceSegment::Drive(Pulse::square(PI, 1.0));
        let s = propagate_lindblad(QuantumState::ground(), &seg, &p, 1e-3).unwrap();
        assert!((s.excited_population() - 1.0).abs() < 1e-6);
    }

    #[test]
    fn step_size_is_enforced() {
        let p = EmitterParams::default();
        let seg = SequenceSegment::free(0.1);
        // limit = 0.1/200 = 5e-4
        assert!(matches!(
            propagate_lindblad(QuantumState::ground(), &seg, &p, 1e-3),
            Err(Error::StepSize { .. })
        ));
        assert!(propagate_lindblad(QuantumState::ground(), &seg, &p, 5e-4).is_ok());
        assert!(propagate_lindblad(QuantumState::ground(), &seg, &p, 0.0).is_err());
        let long = SequenceSegment::free(10.0);
        assert!(propagate_lindblad(QuantumState::ground(), &long, &p, 2e-3).is_err());
    }

    #[test]
    fn zero_duration_is_identity() {
        let s0 = QuantumState::new(0.0, 1.0, 0.0);
        let s = propagate_lindblad(s0, &SequenceSegment::free(0.0), &EmitterParams::default(), 1e-3)
            .unwrap();
        assert_eq!(s, s0);
    }

    #[test]
    fn free_decay_matches_closed_form() {
        let p = EmitterParams {
            gamma_phi_per_ns: 0.4,
            ..Default::default()
        };
        let s0 = QuantumState::new(0.6, -0.3, 0.5);
        let seg = SequenceSegment::FreeEvolution {
            duration_ns: 2.0,
            detuning_rad_per_ns: 1.7,
        };
        let a = propagate_lindblad(s0, &seg, &p, 1e-3).unwrap();
        let b = propagate_free(s0, 2.0, &p, 1.7).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-9, "{a:?} {b:?}");
    }

    #[test]
    fn detuned_pulse_matches_closed_form() {
        let p = EmitterParams::default().without_decoherence();
        let pulse = Pulse::square(PI, 1.0).with_detuning(PI).with_phase(0.3);
        let a = propagate_lindblad(QuantumState::ground(), &SequenceSegment::Drive(pulse), &p, 1e-4)
            .unwrap();
        let b = propagate_unitary(QuantumState::ground(), &pulse).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-10);
        assert!((a.excited_population() - detuned_rabi_population(PI, PI, 1.0)).abs() < 1e-10);
    }

    #[test]
    fn gaussian_pulse_matches_sliced_rotation() {
        let p = EmitterParams::default().without_decoherence();
        let pulse = Pulse::gaussian(0.8 * PI, 0.5).with_detuning(3.0);
        let a = propagate_lindblad(QuantumState::ground(), &SequenceSegment::Drive(pulse), &p, 1e-4)
            .unwrap();
        let b = propagate_unitary(QuantumState::ground(), &pulse).unwrap();
        assert!(a.max_abs_diff(&b) < 1e-6, "{a:?} {b:?}");
    }
}
