//! Lag-polynomial helpers: partial-autocorrelation parameterization of
//! stationary AR polynomials and root moduli.
//!
//! AR polynomials are stored as φ for φ(z) = 1 - φ_1 z - ... - φ_p z^p.
//! MA polynomials θ(z) = 1 + θ_1 z + ... are invertible iff `-θ` is a
//! stationary AR vector.

use nalgebra::DMatrix;

/// Maps partial autocorrelations in (-1, 1) to AR coefficients by the
/// Durbin-Levinson recursion.
pub fn pacf_to_ar(r: &[f64]) -> Vec<f64> {
    let mut phi: Vec<f64> = Vec::with_capacity(r.len());
    for (k, &rk) in r.iter().enumerate() {
        let prev = phi.clone();
        for j in 0..k {
            phi[j] = prev[j] - rk * prev[k - 1 - j];
        }
        phi.push(rk);
    }
    phi
}

/// Inverse of [`pacf_to_ar`] (step-down recursion). `None` when some
/// partial autocorrelation has modulus ≥ 1, i.e. the polynomial has a root
/// on or inside the unit circle.
pub fn ar_to_pacf(phi: &[f64]) -> Option<Vec<f64>> {
    let mut cur = phi.to_vec();
    let mut r = vec![0.0; phi.len()];
    for k in (0..phi.len()).rev() {
        let rk = cur[k];
        if !rk.is_finite() || rk.abs() >= 1.0 {
            return None;
        }
        r[k] = rk;
        let denom = 1.0 - rk * rk;
        let next: Vec<f64> = (0..k)
            .map(|j| (cur[j] + rk * cur[k - 1 - j]) / denom)
            .collect();
        cur = next;
    }
    Some(r)
}

pub fn is_stationary(phi: &[f64]) -> bool {
    ar_to_pacf(phi).is_some()
}

pub fn is_invertible(theta: &[f64]) -> bool {
    let neg: Vec<f64> = theta.iter().map(|t| -t).collect();
    is_stationary(&neg)
}

/// Smallest modulus among the roots of 1 + c_1 z + ... + c_n z^n.
/// Returns +∞ for a constant polynomial.
pub fn min_root_modulus(c: &[f64]) -> f64 {
    let mut n = c.len();
    while n > 0 && c[n - 1] == 0.0 {
        n -= 1;
    }
    if n == 0 {
        return f64::INFINITY;
    }
    // Reciprocal roots w = 1/z solve w^n + c_1 w^{n-1} + ... + c_n = 0.
    let mut comp = DMatrix::<f64>::zeros(n, n);
    for j in 0..n {
        comp[(0, j)] = -c[j];
    }
    for i in 1..n {
        comp[(i, i - 1)] = 1.0;
    }
    let largest = comp
        .complex_eigenvalues()
        .iter()
        .map(|w| w.norm())
        .fold(0.0_f64, f64::max);
    1.0 / largest
}

/// Root moduli check for an AR vector (roots of 1 - Σφ z^i).
pub fn ar_min_root_modulus(phi: &[f64]) -> f64 {
    let c: Vec<f64> = phi.iter().map(|p| -p).collect();
    min_root_modulus(&c)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn ar1_round_trip() {
        assert_eq!(pacf_to_ar(&[0.5]), vec![0.5]);
        assert!(ar_to_pacf(&[1.0]).is_none());
        assert!(is_stationary(&[0.9]));
        assert!(!is_stationary(&[0.5, 0.6]));
    }

    #[test]
    fn root_modulus_of_ar1() {
        assert!((ar_min_root_modulus(&[0.5]) - 2.0).abs() < 1e-12);
        assert!((ar_min_root_modulus(&[0.0, 0.25]) - 2.0).abs() < 1e-12);
        assert_eq!(min_root_modulus(&[]), f64::INFINITY);
    }

    proptest! {
        #[test]
        fn pacf_maps_into_stationary_region(r in proptest::collection::vec(-0.999f64..0.999, 1..6)) {
            let phi = pacf_to_ar(&r);
            prop_assert!(ar_min_root_modulus(&phi) > 1.0 + 1e-8);
            let back = ar_to_pacf(&phi).unwrap();
            for (a, b) in back.iter().zip(&r) {
                prop_assert!((a - b).abs() < 1e-8);
            }
        }
    }
}
