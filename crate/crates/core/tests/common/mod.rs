//! Independent oracles shared by the integration and acceptance tests.
#![allow(dead_code)]

use longmem::models::{FittedModel, Method, ModelSpec};
use longmem::TimeSeries;

/// FI(d) autocorrelations by the ratio recursion ρ_k = ρ_{k-1} (k-1+d)/(k-d).
pub fn fi_rho(d: f64, max_lag: usize) -> Vec<f64> {
    let mut r = vec![1.0; max_lag + 1];
    for k in 1..=max_lag {
        r[k] = r[k - 1] * (k as f64 - 1.0 + d) / (k as f64 - d);
    }
    r
}

/// ARMA ψ weights of θ(L)/φ(L), truncated at `n` terms.
pub fn psi(ar: &[f64], ma: &[f64], n: usize) -> Vec<f64> {
    let mut w = vec![0.0; n];
    for j in 0..n {
        let mut v = if j == 0 { 1.0 } else { ma.get(j - 1).copied().unwrap_or(0.0) };
        for (i, a) in ar.iter().enumerate() {
            if j > i {
                v += a * w[j - 1 - i];
            }
        }
        w[j] = v;
    }
    w
}

/// Autocovariances (up to scale) of ARFIMA(p,d,q): the ARMA filter applied
/// to FI(d) autocorrelations, with the geometric ψ tail truncated at 400.
pub fn arfima_acov_oracle(d: f64, ar: &[f64], ma: &[f64], max_lag: usize) -> Vec<f64> {
    let l = 400;
    let w = psi(ar, ma, l);
    let rho = fi_rho(d, max_lag + l);
    (0..=max_lag)
        .map(|k| {
            let mut s = 0.0;
            for (i, wi) in w.iter().enumerate() {
                for (j, wj) in w.iter().enumerate() {
                    let lag = (k as i64 + i as i64 - j as i64).unsigned_abs() as usize;
                    s += wi * wj * rho[lag];
                }
            }
            s
        })
        .collect()
}

/// h-step best linear predictors of a zero-mean stationary series by the
/// innovations algorithm.
pub fn innovations_forecast(acov: &[f64], x: &[f64], h: usize) -> Vec<f64> {
    let n = x.len();
    let total = n + h;
    assert!(acov.len() >= total);
    // theta[m][j] for j = 1..=m, v[m]
    let mut theta: Vec<Vec<f64>> = vec![Vec::new(); total];
    let mut v = vec![0.0; total];
    v[0] = acov[0];
    for m in 1..total {
        theta[m] = vec![0.0; m + 1];
        for k in 0..m {
            let mut s = acov[m - k];
            for j in 0..k {
                s -= theta[k][k - j] * theta[m][m - j] * v[j];
            }
            theta[m][m - k] = s / v[k];
        }
        v[m] = acov[0] - (0..m).map(|j| theta[m][m - j].powi(2) * v[j]).sum::<f64>();
    }
    // one-step predictions x̂_1..x̂_n (x̂_1 = 0)
    let mut xhat = vec![0.0; n];
    for m in 1..n {
        xhat[m] = (1..=m).map(|j| theta[m][j] * (x[m - j] - xhat[m - j])).sum();
    }
    (1..=h)
        .map(|s| {
            let m = n + s - 1;
            (s..=m).map(|j| theta[m][j] * (x[m - j] - xhat[m - j])).sum()
        })
        .collect()
}

/// A fractional model with given parameters, as if fitted on `series`.
pub fn fitted_fractional(series: &TimeSeries, d: f64, ar: Vec<f64>, ma: Vec<f64>) -> FittedModel {
    let spec = if ar.is_empty() && ma.is_empty() {
        ModelSpec::fi()
    } else {
        ModelSpec::arfima(ar.len(), ma.len())
    };
    FittedModel {
        spec,
        method: Method::Css,
        d_hat: Some(d),
        ar_coeffs: ar,
        ma_coeffs: ma,
        har_coeffs: Vec::new(),
        intercept: None,
        sample_mean: series.mean(),
        sigma2_hat: 1.0,
        loglik: None,
        bic: None,
        residuals: Vec::new(),
        n_obs: series.len(),
        n_eff: series.len(),
    }
}

pub fn mean(x: &[f64]) -> f64 {
    x.iter().sum::<f64>() / x.len() as f64
}
