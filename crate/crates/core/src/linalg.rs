//! Toeplitz prediction (Durbin-Levinson) and least squares.

use nalgebra::{DMatrix, DVector};

/// One-step prediction errors e_t and their variances v_t (in units of the
/// autocovariance scale) for a zero-mean Gaussian series with
/// autocovariances `acov[0..n]`.
pub(crate) struct PredictionErrors {
    pub errors: Vec<f64>,
    pub variances: Vec<f64>,
}

/// Durbin-Levinson recursion over the sample `x`.
/// Requires `acov.len() >= x.len()` and a positive-definite sequence; returns
/// `None` when a prediction variance collapses to a non-positive value.
pub(crate) fn durbin_levinson_errors(acov: &[f64], x: &[f64]) -> Option<PredictionErrors> {
    let n = x.len();
    assert!(acov.len() >= n, "need {n} autocovariances");
    let mut errors = Vec::with_capacity(n);
    let mut variances = Vec::with_capacity(n);
    if n == 0 {
        return Some(PredictionErrors { errors, variances });
    }
    let mut phi = vec![0.0; n];
    let mut v = acov[0];
    if !(v > 0.0) {
        return None;
    }
    errors.push(x[0]);
    variances.push(v);
    for m in 1..n {
        let mut num = acov[m];
        for j in 1..m {
            num -= phi[j - 1] * acov[m - j];
        }
        let k = num / v;
        update_coeffs(&mut phi, m, k);
        v *= 1.0 - k * k;
        if !(v > 0.0) {
            return None;
        }
        let pred: f64 = (1..=m).map(|j| phi[j - 1] * x[m - j]).sum();
        errors.push(x[m] - pred);
        variances.push(v);
    }
    Some(PredictionErrors { errors, variances })
}

/// φ_{m,j} = φ_{m-1,j} - k φ_{m-1,m-j} for j < m, and φ_{m,m} = k
/// (`phi` stores φ_{·,j} at index j-1).
fn update_coeffs(phi: &mut [f64], m: usize, k: f64) {
    let half = (m - 1) / 2;
    for j in 1..=half {
        let a = phi[j - 1];
        let b = phi[m - j - 1];
        phi[j - 1] = a - k * b;
        phi[m - j - 1] = b - k * a;
    }
    if (m - 1) % 2 == 1 {
        let mid = m / 2;
        phi[mid - 1] -= k * phi[mid - 1];
    }
    phi[m - 1] = k;
}

/// Best linear predictors of x_{N+1..N+h} from x_1..x_N for a zero-mean
/// stationary process with autocovariances `acov` (needs `acov.len() >= N+h`).
///
/// The k-step forecast applies the order-(N+k-1) Durbin-Levinson
/// coefficients to the observed sample extended by the earlier forecasts,
/// which by iterated projection equals the exact finite-sample predictor.
pub(crate) fn blp_forecast(acov: &[f64], x: &[f64], h: usize) -> Option<Vec<f64>> {
    let n = x.len();
    let total = n + h;
    assert!(acov.len() >= total, "need {total} autocovariances");
    let mut z = Vec::with_capacity(total);
    z.extend_from_slice(x);
    if n == 0 {
        z.resize(total, 0.0);
        return Some(z);
    }
    let mut phi = vec![0.0; total];
    let mut v = acov[0];
    for m in 1..total {
        let mut num = acov[m];
        for j in 1..m {
            num -= phi[j - 1] * acov[m - j];
        }
        let k = num / v;
        update_coeffs(&mut phi, m, k);
        v *= 1.0 - k * k;
        if !(v > 0.0) || !v.is_finite() {
            return None;
        }
        if m >= n {
            let pred: f64 = (1..=m).map(|j| phi[j - 1] * z[m - j]).sum();
            z.push(pred);
        }
    }
    Some(z.split_off(n))
}

/// Least squares solution of `X b = y` via thin QR.
/// `None` when the design is rank deficient (relative pivot below 1e-10).
pub(crate) fn least_squares(x: &DMatrix<f64>, y: &DVector<f64>) -> Option<(DVector<f64>, f64)> {
    let (n, p) = x.shape();
    if n < p {
        return None;
    }
    let qr = x.clone().qr();
    let r = qr.r();
    let scale = (0..p).map(|i| r[(i, i)].abs()).fold(0.0_f64, f64::max);
    if scale == 0.0 || (0..p).any(|i| r[(i, i)].abs() <= 1e-10 * scale) {
        return None;
    }
    let qty = qr.q().transpose() * y;
    let beta = r.solve_upper_triangular(&qty)?;
    let resid = y - x * &beta;
    let rss = resid.dot(&resid);
    Some((beta, rss))
}
