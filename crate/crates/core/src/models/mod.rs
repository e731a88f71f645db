//! Estimation of the competing forecasting models, information criteria
//! and semiparametric memory estimators.
//!
//! Fractional and ARMA models are fitted to the demeaned series and carry the
//! sample mean; AR and HAR regressions carry an explicit intercept.

mod arma;
mod fractional;
mod memory;
mod regression;
mod select;
mod spec;

use std::f64::consts::PI;

pub use arma::fit_arma;
pub(crate) use arma::arma_filter;
pub use fractional::{css_sum_of_squares, fi_exact_loglik, fit_arfima, fit_arfima_with, FiMethod};
pub use memory::{
    default_gph_bandwidth, default_lw_bandwidth, gph_estimate, local_whittle_estimate,
    local_whittle_objective, MemoryEstimate,
};
pub use regression::{fit_ar, fit_har, fit_random_walk, har_to_ar};
pub use select::{bic_select, bic_table, BicEntry, SelectFamily};
pub use spec::{default_model_set, har_comparison_set, Family, ModelSpec, HAR3_LAGS, HAR4_LAGS};

use crate::error::{Error, Result};
use crate::optim::{bfgs, nelder_mead_restarted, BfgsOptions, NmOptions, NmResult};
use crate::series::TimeSeries;

/// How the parameters of a [`FittedModel`] were obtained.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Method {
    /// Exact Gaussian likelihood (Durbin-Levinson on the model autocovariances).
    ExactLikelihood,
    /// Conditional sum of squares.
    Css,
    /// Exact Gaussian likelihood through the Kalman filter.
    StateSpace,
    /// Ordinary least squares with intercept.
    LeastSquares,
    /// No estimation (no-change model).
    None,
}

/// Estimated parameters and fit statistics of one model.
#[derive(Debug, Clone, PartialEq)]
pub struct FittedModel {
    pub spec: ModelSpec,
    pub method: Method,
    /// Memory estimate (fractional families only), in (-0.5, 0.5).
    pub d_hat: Option<f64>,
    /// AR coefficients φ for φ(L) = 1 - Σ φ_i L^i. For HAR this is the
    /// implied constrained AR(max window) vector.
    pub ar_coeffs: Vec<f64>,
    /// MA coefficients θ for θ(L) = 1 + Σ θ_j L^j.
    pub ma_coeffs: Vec<f64>,
    /// HAR slopes a_1.. on the window averages (HAR only).
    pub har_coeffs: Vec<f64>,
    /// Regression intercept (AR and HAR only).
    pub intercept: Option<f64>,
    /// Sample mean of the fitted series; the process mean for the
    /// fractional and ARMA families.
    pub sample_mean: f64,
    pub sigma2_hat: f64,
    /// Maximized log-likelihood; `None` for the no-change model.
    pub loglik: Option<f64>,
    /// `-2 loglik + k ln n`; `None` for the no-change model.
    pub bic: Option<f64>,
    /// In-sample one-step prediction errors.
    pub residuals: Vec<f64>,
    /// Length of the series the model was fitted on (the forecast origin).
    pub n_obs: usize,
    /// Observations entering the likelihood (n in the BIC penalty).
    pub n_eff: usize,
}

impl FittedModel {
    /// Process mean used for forecasting: the regression-implied mean for
    /// AR/HAR, the sample mean otherwise.
    pub fn process_mean(&self) -> f64 {
        match (self.intercept, self.spec.family) {
            (Some(c), Family::Ar | Family::Har) => {
                let s: f64 = self.ar_coeffs.iter().sum();
                if (1.0 - s).abs() > 1e-12 {
                    c / (1.0 - s)
                } else {
                    self.sample_mean
                }
            }
            _ => self.sample_mean,
        }
    }
}

/// Fits any supported model with its default estimator.
pub fn fit(series: &TimeSeries, spec: &ModelSpec) -> Result<FittedModel> {
    spec.validate()?;
    match spec.family {
        Family::Fi | Family::Arfima => fit_arfima(series, spec),
        Family::Arma => fit_arma(series, spec),
        Family::Ar => fit_ar(series, spec.p),
        Family::Har => fit_har(series, &spec.har_lags),
        Family::RandomWalk => fit_random_walk(series),
    }
}

/// Concentrated Gaussian log-likelihood given the residual sum of squares
/// (scaled by the prediction variances) and the log-determinant term.
pub(crate) fn gaussian_loglik(ssq: f64, log_det: f64, n: usize) -> f64 {
    let nf = n as f64;
    -0.5 * nf * ((2.0 * PI).ln() + 1.0 + (ssq / nf).ln()) - 0.5 * log_det
}

pub(crate) fn bic(loglik: f64, k: usize, n: usize) -> f64 {
    -2.0 * loglik + k as f64 * (n as f64).ln()
}

pub(crate) fn check_values(series: &TimeSeries) -> Result<()> {
    if series.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("series contains non-finite values".into()));
    }
    Ok(())
}

/// BFGS from each start; the best run is accepted if converged, otherwise
/// it is handed to a Nelder-Mead polish and a final BFGS pass.
pub(crate) fn minimize_multistart<F>(mut f: F, starts: &[Vec<f64>]) -> NmResult
where
    F: FnMut(&[f64]) -> f64,
{
    let opts = BfgsOptions::default();
    let mut best: Option<NmResult> = None;
    for z0 in starts {
        let r = bfgs(&mut f, z0, opts);
        let better = match &best {
            None => true,
            Some(b) => r.fx < b.fx,
        };
        if better {
            best = Some(r);
        }
    }
    let best = best.expect("at least one start");
    if best.converged || best.x.is_empty() {
        return best;
    }
    let nm = nelder_mead_restarted(
        &mut f,
        &best.x,
        NmOptions {
            step: 0.2,
            ftol: 1e-12,
            xtol: 1e-8,
            max_evals: 500 * best.x.len(),
        },
        2,
    );
    let again = bfgs(&mut f, &nm.x, opts);
    let evals = best.evals + nm.evals + again.evals;
    let mut out = [best, nm, again]
        .into_iter()
        .min_by(|a, b| a.fx.total_cmp(&b.fx))
        .expect("three candidates");
    out.evals = evals;
    out
}

/// Maps an unconstrained coordinate to (-1, 1); clamped so that the implied
/// polynomial roots stay strictly outside the unit circle.
pub(crate) fn squash(z: f64) -> f64 {
    z.clamp(-6.0, 6.0).tanh()
}

pub(crate) fn unsquash(r: f64) -> f64 {
    r.clamp(-0.999_9, 0.999_9).atanh()
}

/// AR and MA polynomials from partial-autocorrelation coordinates.
pub(crate) fn unpack_arma(z: &[f64], p: usize) -> (Vec<f64>, Vec<f64>) {
    let r_ar: Vec<f64> = z[..p].iter().map(|&v| squash(v)).collect();
    let r_ma: Vec<f64> = z[p..].iter().map(|&v| squash(v)).collect();
    let ar = crate::poly::pacf_to_ar(&r_ar);
    let ma = crate::poly::pacf_to_ar(&r_ma).into_iter().map(|v| -v).collect();
    (ar, ma)
}

/// Inverse of [`unpack_arma`]; `None` for non-stationary or non-invertible input.
pub(crate) fn pack_arma(ar: &[f64], ma: &[f64]) -> Option<Vec<f64>> {
    let neg: Vec<f64> = ma.iter().map(|v| -v).collect();
    let mut z: Vec<f64> = crate::poly::ar_to_pacf(ar)?.into_iter().map(unsquash).collect();
    z.extend(crate::poly::ar_to_pacf(&neg)?.into_iter().map(unsquash));
    Some(z)
}
