//! Faddeeva function w(z) = e^{−z²} erfc(−iz) on the closed upper half plane,
//! via Weideman's rational expansion (SIAM J. Numer. Anal. 31, 1994) with 32
//! terms. Used only for Voigt profiles, where Im z ≥ 0.

use std::f64::consts::PI;
use std::sync::OnceLock;

use num_complex::Complex64;

const TERMS: usize = 32;

fn coefficients() -> &'static (f64, [f64; TERMS]) {
    static COEFFS: OnceLock<(f64, [f64; TERMS])> = OnceLock::new();
    COEFFS.get_or_init(|| {
        let m = 2 * TERMS;
        let l = (TERMS as f64 / std::f64::consts::SQRT_2).sqrt();
        let samples: Vec<(i64, f64)> = (-(m as i64) + 1..m as i64)
            .map(|k| {
                let t = l * (k as f64 * PI / (2 * m) as f64).tan();
                (k, (-t * t).exp() * (l * l + t * t))
            })
            .collect();
        let mut a = [0.0; TERMS];
        for (j, aj) in a.iter_mut().enumerate() {
            let j = (j + 1) as f64;
            *aj = samples
                .iter()
                .map(|&(k, f)| f * (PI * j * k as f64 / m as f64).cos())
                .sum::<f64>()
                / (2 * m) as f64;
        }
        (l, a)
    })
}

/// w(z) for Im z ≥ 0.
pub fn faddeeva(z: Complex64) -> Complex64 {
    let (l, a) = coefficients();
    let i = Complex64::i();
    let lz = Complex64::new(*l, 0.0) - i * z;
    let big_z = (Complex64::new(*l, 0.0) + i * z) / lz;
    // Horner, highest power first
    let p = a
        .iter()
        .rev()
        .fold(Complex64::new(0.0, 0.0), |acc, &c| acc * big_z + c);
    p * 2.0 / (lz * lz) + 1.0 / (PI.sqrt() * lz)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// erfc(y) e^{y²} by the continued fraction, valid for y > 2.
    fn erfcx_cf(y: f64) -> f64 {
        let mut f = 0.0;
        for k in (1..200).rev() {
            f = (k as f64 / 2.0) / (y + f);
        }
        1.0 / (PI.sqrt() * (y + f))
    }

    #[test]
    fn origin_is_one() {
        let w = faddeeva(Complex64::new(0.0, 0.0));
        assert!((w - Complex64::new(1.0, 0.0)).norm() < 1e-12);
    }

    #[test]
    fn real_axis_real_part_is_gaussian() {
        for k in 0..60 {
            let x = k as f64 * 0.1;
            let w = faddeeva(Complex64::new(x, 0.0));
            assert!((w.re - (-x * x).exp()).abs() < 1e-12, "x={x}: {}", w.re);
        }
    }

    #[test]
    fn imaginary_axis_matches_scaled_erfc() {
        for &y in &[2.5, 4.0, 10.0, 50.0] {
            let w = faddeeva(Complex64::new(0.0, y));
            assert!((w.re / erfcx_cf(y) - 1.0).abs() < 1e-10, "y={y}");
            assert!(w.im.abs() < 1e-12);
        }
    }

    #[test]
    fn asymptotic_far_field() {
        let z = Complex64::new(80.0, 3.0);
        let approx = Complex64::i() / (PI.sqrt() * z) * (1.0 + 0.5 / (z * z));
        assert!(((faddeeva(z) - approx) / approx).norm() < 1e-6);
    }
}
