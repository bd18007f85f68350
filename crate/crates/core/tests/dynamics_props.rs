use std::f64::consts::PI;

use coherence_core::dynamics::{
    apply_rotation, area_from_power, propagate_free, propagate_lindblad, propagate_lindblad_sequence,
    propagate_sequence, propagate_unitary, EmitterParams, Pulse, QuantumState, SequenceSegment,
};
use proptest::prelude::*;

fn segment() -> impl Strategy<Value = SequenceSegment> {
    prop_oneof![
        (0.0..4.0 * PI, 0.001..0.05f64, -50.0..50.0f64, -PI..PI, any::<bool>()).prop_map(
            |(area, dur, det, phase, gaussian)| {
                let p = if gaussian { Pulse::gaussian(area, dur) } else { Pulse::square(area, dur) };
                SequenceSegment::Drive(p.with_detuning(det).with_phase(phase))
            }
        ),
        (0.0..3.0f64, -20.0..20.0f64).prop_map(|(d, det)| SequenceSegment::FreeEvolution {
            duration_ns: d,
            detuning_rad_per_ns: det,
        }),
    ]
}

fn params() -> impl Strategy<Value = EmitterParams> {
    (0.2..10.0f64, 0.0..2.0f64).prop_map(|(t1, gphi)| EmitterParams {
        t1_ns: t1,
        gamma_phi_per_ns: gphi,
        ..Default::default()
    })
}

fn start_state() -> impl Strategy<Value = QuantumState> {
    (0.0..PI, -PI..PI, 0.0..=1.0f64).prop_map(|(theta, phi, r)| {
        QuantumState::new(
            r * theta.sin() * phi.cos(),
            r * theta.sin() * phi.sin(),
            r * theta.cos(),
        )
    })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(512))]

    #[test]
    fn closed_form_sequences_stay_physical(
        s0 in start_state(),
        segs in prop::collection::vec(segment(), 1..8),
        p in params(),
    ) {
        let s = propagate_sequence(s0, &segs, &p).unwrap();
        let rho = s.density_matrix();
        prop_assert!(((rho[(0, 0)] + rho[(1, 1)]).re - 1.0).abs() < 1e-12);
        prop_assert!(s.is_physical(1e-9));
    }

    #[test]
    fn unitary_sequences_preserve_purity(
        segs in prop::collection::vec(segment(), 1..8),
    ) {
        let p = EmitterParams::default().without_decoherence();
        let s = propagate_sequence(QuantumState::ground(), &segs, &p).unwrap();
        prop_assert!((s.bloch_norm() - 1.0).abs() < 1e-9);
    }

    #[test]
    fn full_turn_is_identity(s0 in start_state(), phase in -PI..PI) {
        let s = apply_rotation(s0, 2.0 * PI, phase);
        prop_assert!(s.max_abs_diff(&s0) < 1e-12);
    }

    #[test]
    fn rotations_compose(s0 in start_state(), a in 0.0..6.0f64, b in 0.0..6.0f64, phase in -PI..PI) {
        let two = apply_rotation(apply_rotation(s0, a, phase), b, phase);
        let one = apply_rotation(s0, a + b, phase);
        prop_assert!(two.max_abs_diff(&one) < 1e-12);
    }

    #[test]
    fn free_evolution_composes(s0 in start_state(), t1 in 0.0..2.0f64, t2 in 0.0..2.0f64, det in -10.0..10.0f64, p in params()) {
        let two = propagate_free(propagate_free(s0, t1, &p, det).unwrap(), t2, &p, det).unwrap();
        let one = propagate_free(s0, t1 + t2, &p, det).unwrap();
        prop_assert!(two.max_abs_diff(&one) < 1e-12);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(100))]

    /// With decoherence off the master equation reduces to the unitary
    /// closed form.
    #[test]
    fn lindblad_matches_unitary_without_decoherence(
        s0 in start_state(),
        area in 0.0..3.0 * PI,
        dur in 0.005..0.05f64,
        det in -40.0..40.0f64,
        phase in -PI..PI,
    ) {
        let p = EmitterParams::default().without_decoherence();
        let pulse = Pulse::square(area, dur).with_detuning(det).with_phase(phase);
        let exact = propagate_unitary(s0, &pulse).unwrap();
        let rk4 = propagate_lindblad(s0, &SequenceSegment::Drive(pulse), &p, dur / 1000.0).unwrap();
        prop_assert!(exact.max_abs_diff(&rk4) < 1e-6, "{:?} vs {:?}", exact, rk4);
    }

    #[test]
    fn lindblad_free_decay_matches_closed_form(
        s0 in start_state(),
        tau in 0.0..2.0f64,
        det in -10.0..10.0f64,
        p in params(),
    ) {
        let seg = SequenceSegment::FreeEvolution { duration_ns: tau, detuning_rad_per_ns: det };
        let rk4 = propagate_lindblad_sequence(s0, &[seg], &p, 1e-3).unwrap();
        let exact = propagate_free(s0, tau, &p, det).unwrap();
        prop_assert!(exact.max_abs_diff(&rk4) < 1e-6);
        prop_assert!(rk4.is_physical(1e-9));
    }
}

#[test]
fn lindblad_reproduces_power_law_at_fifty_powers() {
    let p = EmitterParams::default().without_decoherence();
    let dur = 0.01;
    for i in 0..50 {
        let power = 250.0 * i as f64 / 49.0;
        let area = area_from_power(p.alpha_rad_per_sqrt_uw, power).unwrap();
        let seg = SequenceSegment::Drive(Pulse::square(area, dur));
        let s = propagate_lindblad(QuantumState::ground(), &seg, &p, dur / 1000.0).unwrap();
        let expected = (p.alpha_rad_per_sqrt_uw * power.sqrt()).sin().powi(2);
        assert!((s.excited_population() - expected).abs() < 1e-6, "P = {power}");
    }
}

/// Long resonant cw drive settles at ρ_ee = (s/2)/(1 + s), s = Ω²/(Γ1Γ2).
#[test]
fn cw_drive_reaches_steady_state() {
    for (omega, gphi) in [(0.3, 0.0), (1.0, 0.0), (2.0, 0.4)] {
        let p = EmitterParams {
            t1_ns: 1.95,
            gamma_phi_per_ns: gphi,
            ..Default::default()
        };
        let dur = 40.0;
        let seg = SequenceSegment::Drive(Pulse::square(omega * dur, dur));
        let s = propagate_lindblad(QuantumState::ground(), &seg, &p, 1e-3).unwrap();
        let sat = omega * omega / (p.gamma1() * p.gamma2());
        let expected = 0.5 * sat / (1.0 + sat);
        assert!((s.excited_population() - expected).abs() < 1e-6, "Ω = {omega}");
    }
}

#[test]
fn lindblad_rejects_coarse_steps() {
    let seg = SequenceSegment::Drive(Pulse::square(PI, 0.1));
    let r = propagate_lindblad(QuantumState::ground(), &seg, &EmitterParams::default(), 0.01);
    assert!(r.is_err());
}
