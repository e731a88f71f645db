//! Exact Gaussian ARMA(p,q) likelihood through the Kalman filter.
//!
//! State-space form with r = max(p, q+1): the state transition has φ in the
//! first column and an identity superdiagonal, the disturbance loading is
//! (1, θ_1, ..., θ_{r-1}), and y_t is the first state element. The initial
//! covariance solves the discrete Lyapunov equation, so the filter gives the
//! exact finite-sample likelihood and predictor.

use nalgebra::{DMatrix, DVector};

use super::{
    bic, check_values, gaussian_loglik, minimize_multistart, pack_arma, unpack_arma, FittedModel,
    Method, ModelSpec,
};
use super::Family;
use crate::error::{Error, Result};
use crate::linalg::least_squares;
use crate::series::{demean, TimeSeries};

/// Output of one filter pass with innovation variance 1.
pub(crate) struct ArmaFilter {
    /// Σ v_t² / F_t.
    pub ssq: f64,
    /// Σ ln F_t.
    pub log_det: f64,
    pub residuals: Vec<f64>,
    /// Predicted state for the first out-of-sample period.
    pub next_state: Vec<f64>,
    pub phi: Vec<f64>,
}

impl ArmaFilter {
    /// Zero-innovation state propagation: the first `h` predicted values.
    pub(crate) fn project(&self, h: usize) -> Vec<f64> {
        let r = self.next_state.len();
        let mut a = self.next_state.clone();
        let mut out = Vec::with_capacity(h);
        for _ in 0..h {
            out.push(a[0]);
            let a0 = a[0];
            for i in 0..r {
                let next = if i + 1 < r { a[i + 1] } else { 0.0 };
                a[i] = self.phi[i] * a0 + next;
            }
        }
        out
    }
}

fn stationary_cov(phi: &[f64], rvec: &[f64]) -> Option<Vec<f64>> {
    let r = phi.len();
    let t = |i: usize, k: usize| -> f64 {
        if k == 0 {
            phi[i]
        } else if k == i + 1 {
            1.0
        } else {
            0.0
        }
    };
    let rr = r * r;
    let mut m = DMatrix::<f64>::identity(rr, rr);
    for i in 0..r {
        for j in 0..r {
            for k in 0..r {
                let tik = t(i, k);
                if tik == 0.0 {
                    continue;
                }
                for l in 0..r {
                    let tjl = t(j, l);
                    if tjl != 0.0 {
                        m[(i * r + j, k * r + l)] -= tik * tjl;
                    }
                }
            }
        }
    }
    let b = DVector::from_iterator(rr, (0..rr).map(|idx| rvec[idx / r] * rvec[idx % r]));
    let sol = m.lu().solve(&b)?;
    Some(sol.iter().copied().collect())
}

/// Runs the filter on a zero-mean sample. `None` when the initial covariance
/// cannot be formed or a prediction variance is not positive.
pub(crate) fn arma_filter(ar: &[f64], ma: &[f64], y: &[f64]) -> Option<ArmaFilter> {
    let r = ar.len().max(ma.len() + 1);
    let mut phi = vec![0.0; r];
    phi[..ar.len()].copy_from_slice(ar);
    let mut rvec = vec![0.0; r];
    rvec[0] = 1.0;
    rvec[1..=ma.len()].copy_from_slice(ma);
    let mut p = stationary_cov(&phi, &rvec)?;
    let mut a = vec![0.0; r];
    let mut tp = vec![0.0; r * r];
    let mut k = vec![0.0; r];
    let mut ssq = 0.0;
    let mut log_det = 0.0;
    let mut residuals = Vec::with_capacity(y.len());
    let mut steady = false;
    let mut f_prev = f64::NAN;
    for &obs in y {
        let v = obs - a[0];
        let f = p[0];
        if !(f > 0.0) || !f.is_finite() {
            return None;
        }
        ssq += v * v / f;
        log_det += f.ln();
        residuals.push(v);
        // K = T P Z' / F
        for i in 0..r {
            let below = if i + 1 < r { p[(i + 1) * r] } else { 0.0 };
            k[i] = (phi[i] * p[0] + below) / f;
        }
        let a0 = a[0];
        for i in 0..r {
            let next = if i + 1 < r { a[i + 1] } else { 0.0 };
            a[i] = phi[i] * a0 + next + k[i] * v;
        }
        if steady {
            continue;
        }
        // P <- T P T' + R R' - F K K'
        for i in 0..r {
            for j in 0..r {
                let below = if i + 1 < r { p[(i + 1) * r + j] } else { 0.0 };
                tp[i * r + j] = phi[i] * p[j] + below;
            }
        }
        for i in 0..r {
            for j in 0..r {
                let right = if j + 1 < r { tp[i * r + j + 1] } else { 0.0 };
                p[i * r + j] = tp[i * r] * phi[j] + right + rvec[i] * rvec[j] - f * k[i] * k[j];
            }
        }
        if (f - f_prev).abs() < 1e-13 * f {
            steady = true;
        }
        f_prev = f;
    }
    Some(ArmaFilter {
        ssq,
        log_det,
        residuals,
        next_state: a,
        phi,
    })
}

/// Exact Gaussian ML for ARMA(p,q) on the demeaned series, with
/// stationarity and invertibility enforced through partial-autocorrelation
/// coordinates.
pub fn fit_arma(series: &TimeSeries, spec: &ModelSpec) -> Result<FittedModel> {
    if spec.family != Family::Arma {
        return Err(Error::Contract(format!("{spec} is not an ARMA model")));
    }
    check_values(series)?;
    let n = series.len();
    let (p, q) = (spec.p, spec.q);
    if n < p + q + 10 {
        return Err(Error::domain(format!("series length {n} too short for {spec}")));
    }
    let (y, mean) = demean(series.values());
    let dim = p + q;
    let objective = |z: &[f64]| {
        let (ar, ma) = unpack_arma(z, p);
        match arma_filter(&ar, &ma, &y) {
            Some(f) => -gaussian_loglik(f.ssq, f.log_det, n) / n as f64,
            None => f64::INFINITY,
        }
    };
    let z = if dim == 0 {
        vec![]
    } else {
        let mut starts = vec![vec![0.0; dim]];
        if let Some(hr) = hannan_rissanen(&y, p, q) {
            starts.push(hr);
        }
        let result = minimize_multistart(objective, &starts);
        if !result.fx.is_finite() || !result.converged {
            return Err(Error::estimation(
                format!("{spec}: likelihood search did not converge"),
                result.fx * n as f64,
            ));
        }
        result.x
    };
    let (ar, ma) = unpack_arma(&z, p);
    let filt = arma_filter(&ar, &ma, &y)
        .ok_or_else(|| Error::estimation(format!("{spec}: filter failed at optimum"), f64::NAN))?;
    let ll = gaussian_loglik(filt.ssq, filt.log_det, n);
    Ok(FittedModel {
        spec: spec.clone(),
        method: Method::StateSpace,
        d_hat: None,
        ar_coeffs: ar,
        ma_coeffs: ma,
        har_coeffs: vec![],
        intercept: None,
        sample_mean: mean,
        sigma2_hat: filt.ssq / n as f64,
        loglik: Some(ll),
        bic: Some(bic(ll, spec.n_params(), n)),
        residuals: filt.residuals,
        n_obs: n,
        n_eff: n,
    })
}

/// Two-stage regression start: long-AR residuals as proxies for the
/// innovations, then least squares of y_t on its lags and lagged proxies.
/// Coefficients are shrunk toward zero until admissible.
fn hannan_rissanen(y: &[f64], p: usize, q: usize) -> Option<Vec<f64>> {
    let n = y.len();
    let long = 20.min(n / 10).max(p + q + 1);
    let rows = n.checked_sub(long)?;
    let x = DMatrix::from_fn(rows, long, |i, j| y[long + i - 1 - j]);
    let target = DVector::from_iterator(rows, y[long..].iter().copied());
    let (b, _) = least_squares(&x, &target)?;
    let mut eps = vec![0.0; n];
    for t in long..n {
        eps[t] = y[t] - (0..long).map(|j| b[j] * y[t - 1 - j]).sum::<f64>();
    }
    let start = long + p.max(q);
    let rows = n.checked_sub(start)?;
    if rows <= p + q {
        return None;
    }
    let x = DMatrix::from_fn(rows, p + q, |i, j| {
        let t = start + i;
        if j < p {
            y[t - 1 - j]
        } else {
            eps[t - 1 - (j - p)]
        }
    });
    let target = DVector::from_iterator(rows, y[start..].iter().copied());
    let (b, _) = least_squares(&x, &target)?;
    let mut ar: Vec<f64> = b.iter().take(p).copied().collect();
    let mut ma: Vec<f64> = b.iter().skip(p).copied().collect();
    for _ in 0..30 {
        if let Some(z) = pack_arma(&ar, &ma) {
            return Some(z);
        }
        ar.iter_mut().for_each(|v| *v *= 0.9);
        ma.iter_mut().for_each(|v| *v *= 0.9);
    }
    None
}
