use nalgebra::Matrix2;
use num_complex::Complex64;

use super::pulse::{Pulse, PulseShape};
use super::{EmitterParams, QuantumState};
use crate::error::{ensure_finite, Error, Result};

/// Slices used to propagate a shaped pulse when the rotation axis moves.
const SHAPED_PULSE_SLICES: usize = 4096;

/// Rotating-frame Hamiltonian ½(Ω σx − Δ σz) in the (|g⟩, |e⟩) basis, rad/ns.
pub fn hamiltonian(omega: f64, delta: f64) -> Matrix2<Complex64> {
    hamiltonian_with_phase(omega, delta, 0.0)
}

/// ½(Ω cos φ σx + Ω sin φ σy − Δ σz).
pub fn hamiltonian_with_phase(omega: f64, delta: f64, phase: f64) -> Matrix2<Complex64> {
    let half = 0.5;
    let off = Complex64::new(omega * phase.cos(), -omega * phase.sin()) * half;
    Matrix2::new(
        Complex64::new(-half * delta, 0.0),
        off,
        off.conj(),
        Complex64::new(half * delta, 0.0),
    )
}

/// Excited-state amplitude −i sin(Ωt/2) under resonant drive from |g⟩.
pub fn analytic_resonant_amplitude(omega: f64, t_ns: f64) -> Complex64 {
    Complex64::new(0.0, -(0.5 * omega * t_ns).sin())
}

/// Excited population after a square pulse of Rabi frequency Ω and detuning
/// Δ from |g⟩: (Ω²/Ω_eff²) sin²(Ω_eff t/2).
pub fn detuned_rabi_population(omega: f64, delta: f64, t_ns: f64) -> f64 {
    let eff2 = omega * omega + delta * delta;
    if eff2 == 0.0 {
        return 0.0;
    }
    let s = (0.5 * eff2.sqrt() * t_ns).sin();
    omega * omega / eff2 * s * s
}

/// Rotates the Bloch vector about the field vector `(hx, hy, hz)` (Pauli
/// coordinates, H = ½ h·σ) by the angle |h|·t.
fn rotate(state: QuantumState, hx: f64, hy: f64, hz: f64, t_ns: f64) -> QuantumState {
    let norm = (hx * hx + hy * hy + hz * hz).sqrt();
    let angle = norm * t_ns;
    if norm == 0.0 || angle == 0.0 {
        return state;
    }
    let (nx, ny, nz) = (hx / norm, hy / norm, hz / norm);
    // Pauli z expectation is −w in this basis.
    let (x, y, z) = (state.u, state.v, -state.w);
    let (s, c) = angle.sin_cos();
    let dot = nx * x + ny * y + nz * z;
    let (cx, cy, cz) = (ny * z - nz * y, nz * x - nx * z, nx * y - ny * x);
    let k = dot * (1.0 - c);
    QuantumState {
        u: x * c + cx * s + nx * k,
        v: y * c + cy * s + ny * k,
        w: -(z * c + cz * s + nz * k),
    }
}

/// Instantaneous resonant rotation by `area` about the equatorial axis at
/// `phase` (a pulse much shorter than every other time scale).
pub fn apply_rotation(state: QuantumState, area: f64, phase: f64) -> QuantumState {
    let (s, c) = phase.sin_cos();
    rotate(state, c, s, 0.0, area)
}

/// Coherent propagation through a pulse, ignoring dissipation.
///
/// Square pulses use the closed-form SU(2) rotation about
/// (Ω cos φ, Ω sin φ, −Δ)/Ω_eff by Ω_eff·t. Shaped pulses are exact when
/// resonant and otherwise use midpoint slices.
pub fn propagate_unitary(state: QuantumState, pulse: &Pulse) -> Result<QuantumState> {
    pulse.validate()?;
    let (s, c) = pulse.phase_rad.sin_cos();
    let delta = pulse.detuning_rad_per_ns;
    match pulse.shape {
        PulseShape::Square => {
            let om = pulse.omega_peak_rad_per_ns;
            Ok(rotate(state, om * c, om * s, -delta, pulse.duration_ns))
        }
        PulseShape::GaussianEnvelope if delta == 0.0 => {
            Ok(apply_rotation(state, super::pulse_area(pulse), pulse.phase_rad))
        }
        PulseShape::GaussianEnvelope => {
            let h = pulse.duration_ns / SHAPED_PULSE_SLICES as f64;
            let mut out = state;
            for k in 0..SHAPED_PULSE_SLICES {
                let om = pulse.rabi_frequency_at((k as f64 + 0.5) * h);
                out = rotate(out, om * c, om * s, -delta, h);
            }
            Ok(out)
        }
    }
}

/// Free evolution for `tau_ns` at rotating-frame detuning `detuning`.
///
/// The coherence ρ_ge picks up e^{iΔτ} and decays as e^{−τ/T2}; the
/// population relaxes as w(τ) = −1 + (w0 + 1) e^{−τ/T1}.
pub fn propagate_free(
    state: QuantumState,
    tau_ns: f64,
    params: &EmitterParams,
    detuning: f64,
) -> Result<QuantumState> {
    ensure_finite("tau_ns", tau_ns)?;
    ensure_finite("detuning", detuning)?;
    if tau_ns < 0.0 {
        return Err(Error::param("tau_ns", "must be >= 0"));
    }
    Ok(free_unchecked(state, tau_ns, params, detuning))
}

pub(crate) fn free_unchecked(
    state: QuantumState,
    tau_ns: f64,
    params: &EmitterParams,
    detuning: f64,
) -> QuantumState {
    if tau_ns == 0.0 {
        return state;
    }
    let coh_decay = (-tau_ns * params.gamma2()).exp();
    let pop_decay = (-tau_ns * params.gamma1()).exp();
    let (s, c) = (detuning * tau_ns).sin_cos();
    // u − iv → (u − iv) e^{iΔτ}
    let u = state.u * c + state.v * s;
    let v = state.v * c - state.u * s;
    QuantumState {
        u: u * coh_decay,
        v: v * coh_decay,
        w: -1.0 + (state.w + 1.0) * pop_decay,
    }
}
