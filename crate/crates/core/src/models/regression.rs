//! Least-squares autoregressions (unrestricted AR and HAR) and the
//! no-change model.

use nalgebra::{DMatrix, DVector};

use super::{bic, check_values, gaussian_loglik, FittedModel, Method, ModelSpec};
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::series::{mean, TimeSeries};

/// Conditional Gaussian ML: OLS of y_t on an intercept and y_{t-1..t-p}.
pub fn fit_ar(series: &TimeSeries, order: usize) -> Result<FittedModel> {
    let spec = ModelSpec::ar(order);
    check_values(series)?;
    let y = series.values();
    let n = y.len();
    if n <= order + 10 {
        return Err(Error::domain(format!(
            "series length {n} must exceed order + 10 = {}",
            order + 10
        )));
    }
    let rows = n - order;
    let x = DMatrix::from_fn(rows, order + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            y[order + i - j]
        }
    });
    let fit = regress(&spec, &x, &y[order..])?;
    Ok(FittedModel {
        ar_coeffs: fit.beta[1..].to_vec(),
        ..fit.into_model(spec, series)
    })
}

/// Average of y_{t-1}, ..., y_{t-w}.
fn window_mean(y: &[f64], t: usize, w: usize) -> f64 {
    y[t - w..t].iter().sum::<f64>() / w as f64
}

/// OLS of y_t on an intercept and backward window averages of lagged values.
pub fn fit_har(series: &TimeSeries, windows: &[usize]) -> Result<FittedModel> {
    let spec = ModelSpec::har(windows);
    spec.validate()?;
    check_values(series)?;
    let y = series.values();
    let n = y.len();
    let max_w = spec.max_lag();
    if n <= max_w + 10 {
        return Err(Error::domain(format!(
            "series length {n} must exceed the longest window + 10 = {}",
            max_w + 10
        )));
    }
    let rows = n - max_w;
    let x = DMatrix::from_fn(rows, windows.len() + 1, |i, j| {
        if j == 0 {
            1.0
        } else {
            window_mean(y, max_w + i, windows[j - 1])
        }
    });
    let fit = regress(&spec, &x, &y[max_w..])?;
    let slopes = fit.beta[1..].to_vec();
    Ok(FittedModel {
        ar_coeffs: har_to_ar(windows, &slopes),
        har_coeffs: slopes,
        ..fit.into_model(spec, series)
    })
}

/// AR(max window) coefficients implied by HAR slopes:
/// φ_i = Σ_{w_k ≥ i} a_k / w_k.
pub fn har_to_ar(windows: &[usize], slopes: &[f64]) -> Vec<f64> {
    let max_w = windows.last().copied().unwrap_or(0);
    (1..=max_w)
        .map(|i| {
            windows
                .iter()
                .zip(slopes)
                .filter(|(w, _)| **w >= i)
                .map(|(w, a)| a / *w as f64)
                .sum()
        })
        .collect()
}

struct Regression {
    beta: Vec<f64>,
    rss: f64,
    residuals: Vec<f64>,
    rows: usize,
}

impl Regression {
    fn into_model(self, spec: ModelSpec, series: &TimeSeries) -> FittedModel {
        let n = self.rows;
        let sigma2 = self.rss / n as f64;
        let ll = gaussian_loglik(self.rss, 0.0, n);
        FittedModel {
            bic: Some(bic(ll, spec.n_params(), n)),
            spec,
            method: Method::LeastSquares,
            d_hat: None,
            ar_coeffs: vec![],
            ma_coeffs: vec![],
            har_coeffs: vec![],
            intercept: Some(self.beta[0]),
            sample_mean: mean(series.values()),
            sigma2_hat: sigma2,
            loglik: Some(ll),
            residuals: self.residuals,
            n_obs: series.len(),
            n_eff: n,
        }
    }
}

fn regress(spec: &ModelSpec, x: &DMatrix<f64>, y: &[f64]) -> Result<Regression> {
    let target = DVector::from_column_slice(y);
    let (beta, rss) = least_squares(x, &target).ok_or_else(|| {
        Error::estimation(format!("{spec}: singular regression design"), f64::NAN)
    })?;
    let fitted = x * &beta;
    let residuals = y.iter().zip(fitted.iter()).map(|(a, b)| a - b).collect();
    if !(rss > 0.0) {
        return Err(Error::estimation(format!("{spec}: zero residual variance"), rss));
    }
    Ok(Regression {
        beta: beta.iter().copied().collect(),
        rss,
        residuals,
        rows: y.len(),
    })
}

/// No-change forecaster: no parameters, no likelihood.
pub fn fit_random_walk(series: &TimeSeries) -> Result<FittedModel> {
    check_values(series)?;
    let y = series.values();
    if y.is_empty() {
        return Err(Error::domain("empty series"));
    }
    let residuals: Vec<f64> = y.windows(2).map(|w| w[1] - w[0]).collect();
    let sigma2 = if residuals.is_empty() {
        0.0
    } else {
        residuals.iter().map(|v| v * v).sum::<f64>() / residuals.len() as f64
    };
    Ok(FittedModel {
        spec: ModelSpec::random_walk(),
        method: Method::None,
        d_hat: None,
        ar_coeffs: vec![],
        ma_coeffs: vec![],
        har_coeffs: vec![],
        intercept: None,
        sample_mean: mean(y),
        sigma2_hat: sigma2,
        loglik: None,
        bic: None,
        n_eff: residuals.len(),
        residuals,
        n_obs: y.len(),
    })
}
