use std::f64::consts::PI;

use nalgebra::{Matrix3, Vector3};

/// Dominant frequency of `y(x)` (cycles per unit x) from a dense
/// discrete-spectrum scan of the mean-removed signal, together with the
/// phase and amplitude of the best cosine at that frequency.
///
/// Samples need not be uniform. The scan covers one cycle per span up to
/// the Nyquist frequency of the mean spacing.
pub fn dominant_frequency(x: &[f64], y: &[f64]) -> Option<(f64, f64, f64)> {
    let n = x.len();
    if n < 4 {
        return None;
    }
    let (lo, hi) = x
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| (a.min(v), b.max(v)));
    let span = hi - lo;
    if !(span > 0.0) {
        return None;
    }
    let mean = y.iter().sum::<f64>() / n as f64;
    let f_min = 0.5 / span;
    let f_max = 0.5 * (n - 1) as f64 / span;
    let k = 20 * n;
    // explained variance of the least-squares fit y ≈ m + a cos + b sin
    let power = |f: f64| -> (f64, f64, f64) {
        let mut g = [[0.0f64; 3]; 3];
        let mut r = [0.0f64; 3];
        for (&xi, &yi) in x.iter().zip(y) {
            let (sn, cs) = (2.0 * PI * f * (xi - lo)).sin_cos();
            let basis = [1.0, cs, sn];
            for i in 0..3 {
                r[i] += basis[i] * (yi - mean);
                for j in 0..3 {
                    g[i][j] += basis[i] * basis[j];
                }
            }
        }
        let m = Matrix3::from_fn(|i, j| g[i][j]);
        match m.try_inverse() {
            Some(inv) => {
                let v = inv * Vector3::from(r);
                (v.dot(&Vector3::from(r)), v[1], v[2])
            }
            None => (0.0, 0.0, 0.0),
        }
    };
    let mut best = (f_min, power(f_min));
    for i in 1..=k {
        let f = f_min + (f_max - f_min) * i as f64 / k as f64;
        let p = power(f);
        if p.0 > best.1 .0 {
            best = (f, p);
        }
    }
    // golden-section polish inside one grid cell either side
    let step = (f_max - f_min) / k as f64;
    let (mut a, mut b) = (best.0 - step, best.0 + step);
    let g = 0.5 * (5f64.sqrt() - 1.0);
    for _ in 0..60 {
        let c = b - g * (b - a);
        let d = a + g * (b - a);
        if power(c).0 > power(d).0 {
            b = d;
        } else {
            a = c;
        }
    }
    let f = 0.5 * (a + b);
    let (p, c, s) = power(f);
    if !(p > 0.0) {
        return None;
    }
    // y ≈ m + c cos(2πf(x − lo)) + s sin(2πf(x − lo)) = m + amp cos(… + φ0)
    let amp = c.hypot(s);
    let phase0 = (-s).atan2(c);
    let phase = phase0 - 2.0 * PI * f * lo;
    Some((f, phase, amp))
}
