//! Periodogram at the Fourier frequencies.

use std::f64::consts::PI;

use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

/// I(λ_j) = |Σ_t (x_t - x̄) e^{-i t λ_j}|² / (2πT) at λ_j = 2πj/T, j = 1..=m.
/// Returns `(λ_j, I(λ_j))` pairs.
pub fn periodogram(x: &[f64], m: usize) -> Vec<(f64, f64)> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let mut buf: Vec<Complex<f64>> = x.iter().map(|v| Complex::new(v - mean, 0.0)).collect();
    let fft = FftPlanner::new().plan_fft_forward(n);
    fft.process(&mut buf);
    let norm = 2.0 * PI * n as f64;
    (1..=m.min(n / 2))
        .map(|j| (2.0 * PI * j as f64 / n as f64, buf[j].norm_sqr() / norm))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn matches_direct_dft() {
        let x: Vec<f64> = (0..37).map(|t| ((t * t) as f64 * 0.1).sin() + 0.2 * t as f64).collect();
        let n = x.len();
        let mean = x.iter().sum::<f64>() / n as f64;
        let p = periodogram(&x, 10);
        for (j, (lam, val)) in p.iter().enumerate() {
            let lj = 2.0 * PI * (j + 1) as f64 / n as f64;
            let (mut re, mut im) = (0.0, 0.0);
            for (t, v) in x.iter().enumerate() {
                re += (v - mean) * (lj * t as f64).cos();
                im -= (v - mean) * (lj * t as f64).sin();
            }
            let want = (re * re + im * im) / (2.0 * PI * n as f64);
            assert!((lam - lj).abs() < 1e-15);
            assert!((val - want).abs() < 1e-10 * want.max(1.0));
        }
    }
}
