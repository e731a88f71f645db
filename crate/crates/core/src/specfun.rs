//! Gamma-function utilities, fractional-difference coefficients and
//! theoretical autocovariances of FI(d) and ARFIMA(p,d,q) processes.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::poly;

const LANCZOS_G: f64 = 7.0;
const LANCZOS_COEFFS: [f64; 9] = [
    0.999_999_999_999_809_93,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_13,
    -176.615_029_162_140_59,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_571_6e-6,
    1.505_632_735_149_311_6e-7,
];

/// Open interval of admissible memory parameters.
pub const D_BOUND: f64 = 0.5;

/// Natural log of the Gamma function for positive finite `x`.
pub fn log_gamma(x: f64) -> Result<f64> {
    if !x.is_finite() || x <= 0.0 {
        return Err(Error::domain(format!("log_gamma requires x > 0, got {x}")));
    }
    Ok(ln_gamma_unchecked(x))
}

pub(crate) fn ln_gamma_unchecked(x: f64) -> f64 {
    if x < 0.5 {
        // Reflection: Γ(x)Γ(1-x) = π / sin(πx); sin(πx) > 0 on (0, 0.5).
        return (PI / (PI * x).sin()).ln() - ln_gamma_unchecked(1.0 - x);
    }
    let x = x - 1.0;
    let mut acc = LANCZOS_COEFFS[0];
    for (i, c) in LANCZOS_COEFFS.iter().enumerate().skip(1) {
        acc += c / (x + i as f64);
    }
    let t = x + LANCZOS_G + 0.5;
    0.5 * (2.0 * PI).ln() + (x + 0.5) * t.ln() - t + acc.ln()
}

fn check_d(d: f64) -> Result<()> {
    if !d.is_finite() || d <= -D_BOUND || d >= D_BOUND {
        return Err(Error::domain(format!(
            "memory parameter d must lie in (-0.5, 0.5), got {d}"
        )));
    }
    Ok(())
}

/// Coefficients π_0..π_n of the binomial expansion of (1-L)^d.
#[derive(Debug, Clone, PartialEq)]
pub struct FracDiffCoeffs {
    pub d: f64,
    pub coeffs: Vec<f64>,
}

/// Coefficients of (1-L)^d up to lag `n`, via π_j = π_{j-1}(j-1-d)/j.
pub fn fracdiff_coeffs(d: f64, n: usize) -> Result<FracDiffCoeffs> {
    check_d(d)?;
    Ok(FracDiffCoeffs {
        d,
        coeffs: binomial_weights(d, n),
    })
}

/// Expansion of (1-L)^d for any real `d`, without domain checks.
/// `binomial_weights(-d, n)` gives the MA(∞) weights of an FI(d) process.
pub(crate) fn binomial_weights(d: f64, n: usize) -> Vec<f64> {
    let mut w = Vec::with_capacity(n + 1);
    w.push(1.0);
    let mut prev = 1.0;
    for j in 1..=n {
        let jf = j as f64;
        prev *= (jf - 1.0 - d) / jf;
        w.push(prev);
    }
    w
}

/// Autocovariances or autocorrelations γ_0..γ_K.
#[derive(Debug, Clone, PartialEq)]
pub struct AcfSequence {
    pub values: Vec<f64>,
    /// `true` when `values[0] == 1` (autocorrelations).
    pub normalized: bool,
    /// Upper bound on the absolute truncation error of every entry; zero for
    /// closed forms.
    pub tail_bound: f64,
}

impl AcfSequence {
    pub fn normalize(&self) -> AcfSequence {
        let g0 = self.values[0];
        AcfSequence {
            values: self.values.iter().map(|v| v / g0).collect(),
            normalized: true,
            tail_bound: self.tail_bound / g0,
        }
    }

    pub fn max_lag(&self) -> usize {
        self.values.len() - 1
    }
}

/// Autocorrelations ρ_0..ρ_K of FI(d):
/// ρ_k = Γ(1-d)Γ(k+d) / (Γ(d)Γ(k+1-d)).
pub fn fi_acf(d: f64, max_lag: usize) -> Result<AcfSequence> {
    check_d(d)?;
    Ok(AcfSequence {
        values: fi_rho(d, max_lag),
        normalized: true,
        tail_bound: 0.0,
    })
}

/// FI(d) autocovariances for innovation variance `sigma2`;
/// γ_0 = σ² Γ(1-2d) / Γ(1-d)².
pub fn fi_autocov(d: f64, sigma2: f64, max_lag: usize) -> Result<AcfSequence> {
    check_d(d)?;
    let g0 = sigma2 * fi_variance_ratio(d);
    Ok(AcfSequence {
        values: fi_rho(d, max_lag).into_iter().map(|r| r * g0).collect(),
        normalized: false,
        tail_bound: 0.0,
    })
}

/// γ_0 / σ² for FI(d).
pub(crate) fn fi_variance_ratio(d: f64) -> f64 {
    (ln_gamma_unchecked(1.0 - 2.0 * d) - 2.0 * ln_gamma_unchecked(1.0 - d)).exp()
}

fn fi_rho(d: f64, max_lag: usize) -> Vec<f64> {
    let mut rho = Vec::with_capacity(max_lag + 1);
    rho.push(1.0);
    if d == 0.0 {
        rho.resize(max_lag + 1, 0.0);
        return rho;
    }
    // Γ(1-d)/Γ(d) = d Γ(1-d)/Γ(1+d) keeps every log_gamma argument positive
    // when d < 0.
    let lead = ln_gamma_unchecked(1.0 - d) - ln_gamma_unchecked(1.0 + d);
    for k in 1..=max_lag {
        let kf = k as f64;
        let lr = lead + ln_gamma_unchecked(kf + d) - ln_gamma_unchecked(kf + 1.0 - d);
        rho.push(d * lr.exp());
    }
    rho
}

/// Parameters of φ(L)(1-L)^d x_t = θ(L)ε_t with
/// φ(z) = 1 - Σφ_i z^i, θ(z) = 1 + Σθ_j z^j and Var ε = `sigma2`.
#[derive(Debug, Clone, PartialEq)]
pub struct ArfimaParams {
    pub d: f64,
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub sigma2: f64,
}

impl ArfimaParams {
    pub fn new(d: f64, ar: Vec<f64>, ma: Vec<f64>, sigma2: f64) -> Self {
        Self { d, ar, ma, sigma2 }
    }
}

/// Largest number of ARMA ψ-weights carried by [`arfima_acf`].
pub const MAX_ARMA_PSI: usize = 50_000;

/// Autocovariances γ_0..γ_K of an ARFIMA(p,d,q) process.
///
/// Writing x = ψ(L)u with ψ(L) = θ(L)/φ(L) and u an FI(d) process,
/// γ_x(k) = Σ_m c_m γ_u(k+m) over m ∈ ℤ, where c_m = Σ_j ψ_j ψ_{j+|m|}.
/// The FI autocovariances are exact; only the geometrically decaying ARMA
/// ψ-weights are truncated, at the first index J where the remaining weights
/// fall below 1e-16 of the largest (capped at [`MAX_ARMA_PSI`]). The bound
/// `2 γ_u(0) Σ|ψ| Σ_{j>J}|ψ_j|` is reported in `tail_bound`.
pub fn arfima_acf(params: &ArfimaParams, max_lag: usize) -> Result<AcfSequence> {
    check_d(params.d)?;
    if !poly::is_stationary(&params.ar) {
        return Err(Error::domain(format!(
            "AR polynomial {:?} is not stationary",
            params.ar
        )));
    }
    if !(params.sigma2 > 0.0) || !params.sigma2.is_finite() {
        return Err(Error::domain("innovation variance must be positive"));
    }
    let (psi, tail) = arma_psi_weights(&params.ar, &params.ma);
    let j_max = psi.len() - 1;
    let c: Vec<f64> = (0..=j_max)
        .map(|m| {
            psi[..=j_max - m]
                .iter()
                .zip(&psi[m..])
                .map(|(a, b)| a * b)
                .sum()
        })
        .collect();
    let gu = fi_autocov(params.d, params.sigma2, max_lag + j_max)?.values;
    let values: Vec<f64> = (0..=max_lag)
        .map(|k| {
            let mut acc = c[0] * gu[k];
            for (m, cm) in c.iter().enumerate().skip(1) {
                acc += cm * (gu[k + m] + gu[k.abs_diff(m)]);
            }
            acc
        })
        .collect();
    let abs_sum: f64 = psi.iter().map(|p| p.abs()).sum();
    Ok(AcfSequence {
        values,
        normalized: false,
        tail_bound: 2.0 * gu[0] * abs_sum * tail,
    })
}

/// ψ-weights of θ(L)/φ(L) and a geometric bound on the omitted tail Σ_{j>J}|ψ_j|.
pub(crate) fn arma_psi_weights(ar: &[f64], ma: &[f64]) -> (Vec<f64>, f64) {
    let p = ar.len();
    let q = ma.len();
    let mut psi = vec![1.0];
    if p == 0 {
        psi.extend_from_slice(ma);
        return (psi, 0.0);
    }
    let mut peak: f64 = 1.0;
    let window = p.max(1) + 8;
    for j in 1..=MAX_ARMA_PSI {
        let mut v = if j <= q { ma[j - 1] } else { 0.0 };
        for (i, phi) in ar.iter().enumerate() {
            if j > i {
                v += phi * psi[j - 1 - i];
            }
        }
        psi.push(v);
        peak = peak.max(v.abs());
        if j > q + window {
            let recent = psi[j + 1 - window..=j]
                .iter()
                .fold(0.0_f64, |a, b| a.max(b.abs()));
            if recent < 1e-16 * peak {
                break;
            }
        }
    }
    // Estimate the decay rate from the last stretch to bound the tail.
    let n = psi.len();
    let a = psi[n - 1 - window..n - 1]
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let b = psi[n - window..]
        .iter()
        .fold(0.0_f64, |m, v| m.max(v.abs()));
    let rate = if a > 0.0 { (b / a).min(0.999_999) } else { 0.0 };
    let tail = b * window as f64 / (1.0 - rate);
    (psi, tail)
}
