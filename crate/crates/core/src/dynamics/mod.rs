//! Driven, decaying two-level system in the rotating frame.
//!
//! Sign conventions: basis (|g⟩, |e⟩), H = ½(Ω σx − Δ σz) with
//! σz = diag(1, −1), Bloch `w = +1` for the excited state. Only
//! convention-independent observables (populations, fringe visibilities and
//! phase differences) are compared with measurements.

mod lindblad;
mod params;
mod propagate;
mod pulse;
mod state;

pub use lindblad::{propagate_lindblad, propagate_lindblad_sequence, MAX_STEP_NS};
pub use params::{EmitterParams, REFERENCE_PI_POWER_UW};
pub use propagate::{
    analytic_resonant_amplitude, apply_rotation, detuned_rabi_population, hamiltonian,
    hamiltonian_with_phase, propagate_free, propagate_unitary,
};
pub(crate) use propagate::free_unchecked;
pub use pulse::{area_from_power, pi_pulse_power, pulse_area, Pulse, PulseShape, SequenceSegment};
pub use state::QuantumState;

use crate::error::Result;

/// Closed-form propagation through a sequence: pulses are coherent rotations,
/// free segments include T1 and T2 decay.
pub fn propagate_sequence(
    state: QuantumState,
    segments: &[SequenceSegment],
    params: &EmitterParams,
) -> Result<QuantumState> {
    segments.iter().try_fold(state, |s, seg| match seg {
        SequenceSegment::Drive(p) => propagate_unitary(s, p),
        SequenceSegment::FreeEvolution {
            duration_ns,
            detuning_rad_per_ns,
        } => propagate_free(s, *duration_ns, params, *detuning_rad_per_ns),
    })
}
