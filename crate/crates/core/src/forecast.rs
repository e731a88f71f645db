//! Point forecasts from fitted models and forecast-loss summaries.

use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};
use crate::linalg::blp_forecast;
use crate::models::{arma_filter, Family, FittedModel, ModelSpec};
use crate::series::TimeSeries;
use crate::specfun::{arfima_acf, binomial_weights, ArfimaParams};

/// Forecasts ŷ_{T+1..T+h} from origin T.
#[derive(Debug, Clone, PartialEq)]
pub struct ForecastPath {
    pub model: ModelSpec,
    pub horizon: usize,
    pub values: Vec<f64>,
    pub origin_index: usize,
}

/// h-step point forecasts.
///
/// * No-change: y_T at every step.
/// * AR/HAR: the fitted recursion with forecasts substituted for future values.
/// * ARMA: Kalman-filter state at T propagated with zero future innovations.
/// * FI/ARFIMA: the finite-sample AR representation of the fitted model,
///   i.e. the order-(T+k-1) Durbin-Levinson predictor built from the model
///   autocovariances, applied to the demeaned sample; the mean is added back.
///
/// The ARMA and fractional predictors are the exact best linear predictors
/// under the fitted model given all T observations.
pub fn forecast(model: &FittedModel, series: &TimeSeries, h: usize) -> Result<ForecastPath> {
    if h == 0 {
        return Err(Error::domain("forecast horizon must be at least 1"));
    }
    let y = series.values();
    if y.len() != model.n_obs || y.is_empty() {
        return Err(Error::Contract(format!(
            "{} was fitted on {} observations but the series has {}",
            model.spec,
            model.n_obs,
            y.len()
        )));
    }
    let values = match model.spec.family {
        Family::RandomWalk => vec![y[y.len() - 1]; h],
        Family::Ar | Family::Har => {
            let c = model
                .intercept
                .ok_or_else(|| Error::Contract(format!("{} has no intercept", model.spec)))?;
            ar_recursion(c, &model.ar_coeffs, y, h)
        }
        Family::Arma => {
            let mu = model.sample_mean;
            let x: Vec<f64> = y.iter().map(|v| v - mu).collect();
            let filt = arma_filter(&model.ar_coeffs, &model.ma_coeffs, &x).ok_or_else(|| {
                Error::Contract(format!("{}: fitted parameters are not admissible", model.spec))
            })?;
            filt.project(h).into_iter().map(|v| v + mu).collect()
        }
        Family::Fi | Family::Arfima => fractional_blp(model, y, h)?,
    };
    if values.iter().any(|v| !v.is_finite()) {
        return Err(Error::estimation(format!("{}: non-finite forecast", model.spec), f64::NAN));
    }
    Ok(ForecastPath {
        model: model.spec.clone(),
        horizon: h,
        values,
        origin_index: y.len(),
    })
}

fn ar_recursion(c: f64, phi: &[f64], y: &[f64], h: usize) -> Vec<f64> {
    let n = y.len();
    let mut z = y.to_vec();
    for t in n..n + h {
        let v = c + phi
            .iter()
            .enumerate()
            .map(|(i, a)| if t > i { a * z[t - 1 - i] } else { 0.0 })
            .sum::<f64>();
        z.push(v);
    }
    z.split_off(n)
}

fn fitted_params(model: &FittedModel) -> Result<ArfimaParams> {
    let d = model
        .d_hat
        .ok_or_else(|| Error::Contract(format!("{} has no memory estimate", model.spec)))?;
    Ok(ArfimaParams::new(
        d,
        model.ar_coeffs.clone(),
        model.ma_coeffs.clone(),
        1.0,
    ))
}

fn fractional_blp(model: &FittedModel, y: &[f64], h: usize) -> Result<Vec<f64>> {
    let params = fitted_params(model)?;
    let mu = model.sample_mean;
    let x: Vec<f64> = y.iter().map(|v| v - mu).collect();
    let acov = arfima_acf(&params, x.len() + h)?.values;
    let path = blp_forecast(&acov, &x, h)
        .ok_or_else(|| Error::estimation(format!("{}: singular prediction recursion", model.spec), f64::NAN))?;
    Ok(path.into_iter().map(|v| v + mu).collect())
}

/// Forecasts from the infinite-past AR(∞) weights π(L) = (1-L)^d φ(L)/θ(L)
/// truncated at the sample length, applied to the demeaned sample. Differs
/// from [`forecast`] by the truncation error of the slowly decaying weights.
pub fn truncated_ar_forecast(model: &FittedModel, series: &TimeSeries, h: usize) -> Result<Vec<f64>> {
    if h == 0 {
        return Err(Error::domain("forecast horizon must be at least 1"));
    }
    let params = fitted_params(model)?;
    let mu = model.sample_mean;
    let n = series.len();
    let mut z: Vec<f64> = series.values().iter().map(|v| v - mu).collect();
    let frac = binomial_weights(params.d, n);
    // (1-L)^d φ(L)
    let mut num = frac.clone();
    for (i, a) in params.ar.iter().enumerate() {
        for j in (i + 1)..=n {
            num[j] -= a * frac[j - 1 - i];
        }
    }
    // divide by θ(L)
    let mut pi = vec![0.0; n + 1];
    for j in 0..=n {
        let mut v = num[j];
        for (k, th) in params.ma.iter().enumerate() {
            if j > k {
                v -= th * pi[j - 1 - k];
            }
        }
        pi[j] = v;
    }
    for _ in 0..h {
        let t = z.len();
        let v: f64 = -(1..=n).map(|j| pi[j] * z[t - j]).sum::<f64>();
        z.push(v);
    }
    Ok(z.split_off(n).into_iter().map(|v| v + mu).collect())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum LossKind {
    /// Squared error.
    Sq,
    /// Absolute deviation.
    Ad,
}

impl fmt::Display for LossKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            LossKind::Sq => "sq",
            LossKind::Ad => "ad",
        })
    }
}

impl FromStr for LossKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "sq" | "se" | "mse" => Ok(LossKind::Sq),
            "ad" | "mad" => Ok(LossKind::Ad),
            other => Err(Error::Config(format!("unknown loss '{other}' (expected sq or ad)"))),
        }
    }
}

pub fn loss(actual: f64, predicted: f64, kind: LossKind) -> Result<f64> {
    if !actual.is_finite() || !predicted.is_finite() {
        return Err(Error::domain("loss of a non-finite value"));
    }
    let e = actual - predicted;
    Ok(match kind {
        LossKind::Sq => e * e,
        LossKind::Ad => e.abs(),
    })
}

fn mean_loss(actuals: &[f64], path: &ForecastPath, kind: LossKind) -> Result<f64> {
    if actuals.len() != path.values.len() || actuals.is_empty() {
        return Err(Error::Contract(format!(
            "{} actuals for a forecast path of length {}",
            actuals.len(),
            path.values.len()
        )));
    }
    let mut acc = 0.0;
    for (a, p) in actuals.iter().zip(&path.values) {
        acc += loss(*a, *p, kind)?;
    }
    Ok(acc / actuals.len() as f64)
}

/// Square root of the mean loss: RMSE for `Sq`; for `Ad` the root of the
/// mean absolute deviation (RMAD).
pub fn rm_summary(actuals: &[f64], path: &ForecastPath, kind: LossKind) -> Result<f64> {
    Ok(mean_loss(actuals, path, kind)?.sqrt())
}

/// Plain mean absolute deviation, without the square root.
pub fn mean_absolute_deviation(actuals: &[f64], path: &ForecastPath) -> Result<f64> {
    mean_loss(actuals, path, LossKind::Ad)
}
