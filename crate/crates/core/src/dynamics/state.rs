use nalgebra::Matrix2;
use num_complex::Complex64;

/// Two-level density matrix in Bloch form.
///
/// Basis order is (|g⟩, |e⟩). `w = ρ_ee − ρ_gg`, so `w = +1` is the excited
/// state, and `ρ_ge = (u − i v)/2`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct QuantumState {
    pub u: f64,
    pub v: f64,
    pub w: f64,
}

impl QuantumState {
    pub const fn new(u: f64, v: f64, w: f64) -> Self {
        Self { u, v, w }
    }

    pub const fn ground() -> Self {
        Self::new(0.0, 0.0, -1.0)
    }

    pub const fn excited() -> Self {
        Self::new(0.0, 0.0, 1.0)
    }

    /// ρ_ee.
    pub fn excited_population(&self) -> f64 {
        0.5 * (1.0 + self.w)
    }

    /// ρ_ge.
    pub fn coherence(&self) -> Complex64 {
        Complex64::new(0.5 * self.u, -0.5 * self.v)
    }

    pub fn bloch_norm(&self) -> f64 {
        (self.u * self.u + self.v * self.v + self.w * self.w).sqrt()
    }

    pub fn density_matrix(&self) -> Matrix2<Complex64> {
        let ree = self.excited_population();
        let rge = self.coherence();
        Matrix2::new(
            Complex64::new(1.0 - ree, 0.0),
            rge,
            rge.conj(),
            Complex64::new(ree, 0.0),
        )
    }

    /// Reads the Bloch vector off a density matrix, symmetrising the
    /// off-diagonal pair.
    pub fn from_density_matrix(rho: &Matrix2<Complex64>) -> Self {
        let rge = 0.5 * (rho[(0, 1)] + rho[(1, 0)].conj());
        let trace = rho[(0, 0)].re + rho[(1, 1)].re;
        Self {
            u: 2.0 * rge.re / trace,
            v: -2.0 * rge.im / trace,
            w: (rho[(1, 1)].re - rho[(0, 0)].re) / trace,
        }
    }

    /// Smallest eigenvalue of the density matrix, (1 − |r|)/2.
    pub fn min_eigenvalue(&self) -> f64 {
        0.5 * (1.0 - self.bloch_norm())
    }

    pub fn is_physical(&self, tol: f64) -> bool {
        self.u.is_finite()
            && self.v.is_finite()
            && self.w.is_finite()
            && self.bloch_norm().powi(2) <= 1.0 + tol
    }

    pub fn max_abs_diff(&self, other: &Self) -> f64 {
        (self.u - other.u)
            .abs()
            .max((self.v - other.v).abs())
            .max((self.w - other.w).abs())
    }
}
