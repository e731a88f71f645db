//! FI(d) and ARFIMA(p,d,q) estimation.

use std::sync::Arc;

use rustfft::num_complex::Complex;
use rustfft::{Fft, FftPlanner};

use super::{
    bic, check_values, gaussian_loglik, minimize_multistart, squash, unpack_arma, FittedModel, Method,
    ModelSpec,
};
use super::Family;
use crate::error::{Error, Result};
use crate::linalg::durbin_levinson_errors;
use crate::optim::golden_section;
use crate::series::{demean, TimeSeries};
use crate::specfun::{binomial_weights, fi_autocov};

/// Search interval for d is (-D_MAX, D_MAX).
const D_MAX: f64 = 0.49;
/// Starting values of d for the CSS multi-start.
const D_STARTS: [f64; 3] = [0.1, 0.25, 0.4];
const MIN_LENGTH: usize = 100;
const MAX_ORDER: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum FiMethod {
    /// Exact Gaussian likelihood; FI(d) only.
    Exact,
    /// Conditional sum of squares.
    Css,
}

/// FI(d) by exact likelihood, ARFIMA(p,d,q) by CSS.
pub fn fit_arfima(series: &TimeSeries, spec: &ModelSpec) -> Result<FittedModel> {
    let method = if spec.family == Family::Fi {
        FiMethod::Exact
    } else {
        FiMethod::Css
    };
    fit_arfima_with(series, spec, method)
}

pub fn fit_arfima_with(series: &TimeSeries, spec: &ModelSpec, method: FiMethod) -> Result<FittedModel> {
    if !spec.is_fractional() {
        return Err(Error::Contract(format!("{spec} is not a fractional model")));
    }
    spec.validate()?;
    if spec.p > MAX_ORDER || spec.q > MAX_ORDER {
        return Err(Error::domain(format!(
            "{spec}: ARFIMA orders above ({MAX_ORDER},{MAX_ORDER}) are not supported"
        )));
    }
    check_values(series)?;
    let n = series.len();
    if n < MIN_LENGTH {
        return Err(Error::domain(format!(
            "series length {n} below the minimum {MIN_LENGTH} for fractional fits"
        )));
    }
    let (x, mean) = demean(series.values());
    match method {
        FiMethod::Exact if spec.p + spec.q > 0 => Err(Error::Config(format!(
            "exact likelihood is implemented for FI(d) only, not {spec}"
        ))),
        FiMethod::Exact => fit_fi_exact(spec, &x, mean),
        FiMethod::Css => fit_css(spec, &x, mean),
    }
}

/// Exact Gaussian log-likelihood of FI(d) for a zero-mean sample with the
/// innovation variance profiled out. Returns `(loglik, sigma2)`.
pub fn fi_exact_loglik(x: &[f64], d: f64) -> Option<(f64, f64)> {
    let n = x.len();
    let acov = fi_autocov(d, 1.0, n.saturating_sub(1)).ok()?.values;
    let pe = durbin_levinson_errors(&acov, x)?;
    let ssq: f64 = pe.errors.iter().zip(&pe.variances).map(|(e, v)| e * e / v).sum();
    let log_det: f64 = pe.variances.iter().map(|v| v.ln()).sum();
    Some((gaussian_loglik(ssq, log_det, n), ssq / n as f64))
}

fn fit_fi_exact(spec: &ModelSpec, x: &[f64], mean: f64) -> Result<FittedModel> {
    let n = x.len();
    let objective = |d: f64| match fi_exact_loglik(x, d) {
        Some((ll, _)) => -ll / n as f64,
        None => f64::INFINITY,
    };
    // Coarse scan, then golden section in the bracket around the best node.
    let step = 0.1;
    let grid: Vec<f64> = (-4..=4).map(|i| i as f64 * step).collect();
    let values: Vec<f64> = grid.iter().map(|&d| objective(d)).collect();
    let best = (0..grid.len())
        .min_by(|&a, &b| values[a].total_cmp(&values[b]))
        .unwrap_or(0);
    if !values[best].is_finite() {
        return Err(Error::estimation("FI(d) likelihood undefined on the whole grid", f64::INFINITY));
    }
    let lo = (grid[best] - step).max(-D_MAX);
    let hi = (grid[best] + step).min(D_MAX);
    let (d, _) = golden_section(objective, lo, hi, 1e-6);
    let (ll, sigma2) = fi_exact_loglik(x, d)
        .ok_or_else(|| Error::estimation("FI(d) likelihood undefined at optimum", values[best]))?;
    let acov = fi_autocov(d, 1.0, n - 1)?.values;
    let residuals = durbin_levinson_errors(&acov, x)
        .map(|pe| pe.errors)
        .unwrap_or_default();
    Ok(FittedModel {
        spec: spec.clone(),
        method: Method::ExactLikelihood,
        d_hat: Some(d),
        ar_coeffs: vec![],
        ma_coeffs: vec![],
        har_coeffs: vec![],
        intercept: None,
        sample_mean: mean,
        sigma2_hat: sigma2,
        loglik: Some(ll),
        bic: Some(bic(ll, spec.n_params(), n)),
        residuals,
        n_obs: n,
        n_eff: n,
    })
}

/// Fractional differencing by FFT convolution with a cached transform of
/// the sample, and the ARMA residual recursion on top of it.
pub(crate) struct CssProblem {
    n: usize,
    size: usize,
    x_hat: Vec<Complex<f64>>,
    fwd: Arc<dyn Fft<f64>>,
    inv: Arc<dyn Fft<f64>>,
    buf: Vec<Complex<f64>>,
    u: Vec<f64>,
    e: Vec<f64>,
}

impl CssProblem {
    pub(crate) fn new(x: &[f64]) -> Self {
        let n = x.len();
        let size = (2 * n).next_power_of_two();
        let mut planner = FftPlanner::new();
        let fwd = planner.plan_fft_forward(size);
        let inv = planner.plan_fft_inverse(size);
        let mut x_hat: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
        x_hat.resize(size, Complex::new(0.0, 0.0));
        fwd.process(&mut x_hat);
        Self {
            n,
            size,
            x_hat,
            fwd,
            inv,
            buf: vec![Complex::new(0.0, 0.0); size],
            u: vec![0.0; n],
            e: vec![0.0; n],
        }
    }

    fn fracdiff(&mut self, d: f64) {
        let pi = binomial_weights(d, self.n - 1);
        for (slot, &w) in self.buf.iter_mut().zip(pi.iter().chain(std::iter::repeat(&0.0))) {
            *slot = Complex::new(w, 0.0);
        }
        self.fwd.process(&mut self.buf);
        for (b, xh) in self.buf.iter_mut().zip(&self.x_hat) {
            *b *= xh;
        }
        self.inv.process(&mut self.buf);
        let scale = 1.0 / self.size as f64;
        for (u, b) in self.u.iter_mut().zip(&self.buf) {
            *u = b.re * scale;
        }
    }

    /// Σ e_t² with e_t = u_t - Σφ_i u_{t-i} - Σθ_j e_{t-j}, u = (1-L)^d x,
    /// all pre-sample values zero.
    pub(crate) fn sum_of_squares(&mut self, d: f64, ar: &[f64], ma: &[f64]) -> f64 {
        self.fracdiff(d);
        let mut ssq = 0.0;
        for t in 0..self.n {
            let mut v = self.u[t];
            for (i, phi) in ar.iter().enumerate() {
                if t > i {
                    v -= phi * self.u[t - 1 - i];
                }
            }
            for (j, th) in ma.iter().enumerate() {
                if t > j {
                    v -= th * self.e[t - 1 - j];
                }
            }
            self.e[t] = v;
            ssq += v * v;
        }
        ssq
    }

    pub(crate) fn residuals(&self) -> &[f64] {
        &self.e
    }
}

/// CSS objective Σ e_t² for a zero-mean sample at the given parameters.
pub fn css_sum_of_squares(x: &[f64], d: f64, ar: &[f64], ma: &[f64]) -> f64 {
    CssProblem::new(x).sum_of_squares(d, ar, ma)
}

fn unpack(z: &[f64], p: usize) -> (f64, Vec<f64>, Vec<f64>) {
    let d = D_MAX * squash(z[0]);
    let (ar, ma) = unpack_arma(&z[1..], p);
    (d, ar, ma)
}

fn fit_css(spec: &ModelSpec, x: &[f64], mean: f64) -> Result<FittedModel> {
    let n = x.len();
    let (p, q) = (spec.p, spec.q);
    let dim = 1 + p + q;
    let mut prob = CssProblem::new(x);
    let objective = |z: &[f64]| {
        let (d, ar, ma) = unpack(z, p);
        (prob.sum_of_squares(d, &ar, &ma) / n as f64).ln()
    };
    let starts: Vec<Vec<f64>> = D_STARTS
        .iter()
        .map(|d0| {
            let mut z0 = vec![0.0; dim];
            z0[0] = (d0 / D_MAX).atanh();
            z0
        })
        .collect();
    let result = minimize_multistart(objective, &starts);
    if !result.fx.is_finite() || !result.converged {
        return Err(Error::estimation(
            format!("{spec}: CSS search did not converge"),
            result.fx.exp() * n as f64,
        ));
    }
    let (d, ar, ma) = unpack(&result.x, p);
    let ssq = prob.sum_of_squares(d, &ar, &ma);
    let ll = gaussian_loglik(ssq, 0.0, n);
    Ok(FittedModel {
        spec: spec.clone(),
        method: Method::Css,
        d_hat: Some(d),
        ar_coeffs: ar,
        ma_coeffs: ma,
        har_coeffs: vec![],
        intercept: None,
        sample_mean: mean,
        sigma2_hat: ssq / n as f64,
        loglik: Some(ll),
        bic: Some(bic(ll, spec.n_params(), n)),
        residuals: prob.residuals().to_vec(),
        n_obs: n,
        n_eff: n,
    })
}
