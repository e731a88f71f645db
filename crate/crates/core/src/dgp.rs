//! Simulators for the three long-memory generating processes:
//! ARFIMA(1,d,0), cross-sectional aggregation of AR(1) micro units, and the
//! error duration model. All draws come from explicitly seeded ChaCha8
//! streams, so `(spec, seed)` fully determines a path.

use std::fmt;

use rand::Rng;
use rand_distr::{Beta, Distribution, StandardNormal};
use rayon::prelude::*;
use rustfft::num_complex::Complex;
use rustfft::FftPlanner;

use crate::error::{Error, Result};
use crate::rng::{derive_seed, rng_from_seed};
use crate::series::TimeSeries;
use crate::specfun::{self, binomial_weights};

/// Units simulated per deterministic work chunk in the aggregation DGP.
const CSA_CHUNK: usize = 256;

/// Minimum MA truncation when circulant embedding is unavailable.
pub const MIN_FALLBACK_BURN_IN: usize = 5_000;

/// Default pre-sample window of the error duration model.
pub const DEFAULT_EDM_WINDOW: usize = 10_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DgpKind {
    Arfima,
    CrossSectionalAggregation,
    ErrorDuration,
}

impl fmt::Display for DgpKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DgpKind::Arfima => "arfima",
            DgpKind::CrossSectionalAggregation => "csa",
            DgpKind::ErrorDuration => "edm",
        })
    }
}

impl std::str::FromStr for DgpKind {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "arfima" | "dgp1" => Ok(DgpKind::Arfima),
            "csa" | "dgp2" => Ok(DgpKind::CrossSectionalAggregation),
            "edm" | "dgp3" => Ok(DgpKind::ErrorDuration),
            other => Err(Error::Config(format!("unknown dgp '{other}'"))),
        }
    }
}

/// Parameterization of one long-memory generator.
#[derive(Debug, Clone, PartialEq)]
pub struct DgpSpec {
    pub kind: DgpKind,
    pub d: f64,
    /// AR(1) coefficient (ARFIMA only).
    pub phi: f64,
    /// Number of micro units (aggregation only).
    pub n_units: usize,
    /// First Beta shape p (aggregation only); q = 2(1-d) is derived.
    pub beta_p: f64,
    /// Discarded warm-up observations. For the error duration model this is
    /// the pre-sample window approximating the infinite past.
    pub burn_in: usize,
    pub innovation_sd: f64,
    /// Aggregation only: draw α_i itself from Beta(p, q) instead of α_i².
    pub beta_on_alpha: bool,
}

impl DgpSpec {
    /// ARFIMA(1,d,0) with the Monte Carlo defaults (φ = 0.2 in the tables).
    pub fn arfima(d: f64, phi: f64) -> Self {
        Self {
            kind: DgpKind::Arfima,
            d,
            phi,
            n_units: 1,
            beta_p: 1.4,
            burn_in: 1_000,
            innovation_sd: 1.0,
            beta_on_alpha: false,
        }
    }

    /// Aggregation of `n_units` AR(1) series with α_i² ~ Beta(beta_p, 2(1-d)).
    pub fn csa(d: f64, n_units: usize, beta_p: f64) -> Self {
        Self {
            kind: DgpKind::CrossSectionalAggregation,
            d,
            phi: 0.0,
            n_units,
            beta_p,
            burn_in: 0,
            innovation_sd: 1.0,
            beta_on_alpha: false,
        }
    }

    pub fn edm(d: f64) -> Self {
        Self {
            kind: DgpKind::ErrorDuration,
            d,
            phi: 0.0,
            n_units: 1,
            beta_p: 1.4,
            burn_in: DEFAULT_EDM_WINDOW,
            innovation_sd: 1.0,
            beta_on_alpha: false,
        }
    }

    /// The calibration used in the Monte Carlo tables for each kind.
    pub fn default_for(kind: DgpKind, d: f64) -> Self {
        match kind {
            DgpKind::Arfima => Self::arfima(d, 0.2),
            DgpKind::CrossSectionalAggregation => Self::csa(d, 10_000, 1.4),
            DgpKind::ErrorDuration => Self::edm(d),
        }
    }

    /// Second Beta shape of the aggregation DGP.
    pub fn beta_q(&self) -> f64 {
        2.0 * (1.0 - self.d)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.innovation_sd > 0.0) || !self.innovation_sd.is_finite() {
            return Err(Error::domain("innovation_sd must be positive"));
        }
        match self.kind {
            DgpKind::Arfima => {
                if !(self.d > -0.5 && self.d < 0.5) {
                    return Err(Error::domain(format!("d = {} outside (-0.5, 0.5)", self.d)));
                }
                if !(self.phi.abs() < 1.0) {
                    return Err(Error::domain(format!("|phi| = {} must be < 1", self.phi)));
                }
            }
            DgpKind::CrossSectionalAggregation => {
                if !(self.d > 0.0 && self.d < 0.5) {
                    return Err(Error::domain(format!(
                        "d = {} outside (0, 0.5); q = 2(1-d) = {} must exceed 1",
                        self.d,
                        self.beta_q()
                    )));
                }
                if self.n_units == 0 {
                    return Err(Error::domain("n_units must be at least 1"));
                }
                if !(self.beta_p > 1.0) {
                    return Err(Error::domain(format!("beta_p = {} must exceed 1", self.beta_p)));
                }
            }
            DgpKind::ErrorDuration => {
                if !(self.d > 0.0 && self.d < 0.5) {
                    return Err(Error::domain(format!("d = {} outside (0, 0.5)", self.d)));
                }
            }
        }
        Ok(())
    }

    /// One-line description used in CSV header comments and manifests.
    pub fn describe(&self) -> String {
        match self.kind {
            DgpKind::Arfima => format!(
                "dgp=arfima d={} phi={} burn_in={} innovation_sd={}",
                self.d, self.phi, self.burn_in, self.innovation_sd
            ),
            DgpKind::CrossSectionalAggregation => format!(
                "dgp=csa d={} n_units={} beta_p={} beta_q={} beta_on_alpha={} burn_in={} innovation_sd={}",
                self.d,
                self.n_units,
                self.beta_p,
                self.beta_q(),
                self.beta_on_alpha,
                self.burn_in,
                self.innovation_sd
            ),
            DgpKind::ErrorDuration => format!(
                "dgp=edm d={} window={} innovation_sd={}",
                self.d, self.burn_in, self.innovation_sd
            ),
        }
    }
}

/// A simulated sample path with everything needed to regenerate it.
#[derive(Debug, Clone)]
pub struct SimulatedPath {
    pub series: TimeSeries,
    pub seed: u64,
    pub spec: DgpSpec,
}

/// Dispatches on `spec.kind`.
pub fn simulate(spec: &DgpSpec, length: usize, seed: u64) -> Result<SimulatedPath> {
    match spec.kind {
        DgpKind::Arfima => simulate_arfima(spec, length, seed),
        DgpKind::CrossSectionalAggregation => simulate_csa(spec, length, seed),
        DgpKind::ErrorDuration => simulate_edm(spec, length, seed),
    }
}

fn check_request(spec: &DgpSpec, kind: DgpKind, length: usize) -> Result<()> {
    if spec.kind != kind {
        return Err(Error::Contract(format!(
            "expected a {kind} spec, got {}",
            spec.kind
        )));
    }
    spec.validate()?;
    if length == 0 {
        return Err(Error::domain("length must be at least 1"));
    }
    Ok(())
}

fn finish(values: Vec<f64>, spec: &DgpSpec, seed: u64) -> SimulatedPath {
    let series = TimeSeries::new(values)
        .with_meta("dgp", spec.describe())
        .with_meta("seed", seed);
    SimulatedPath {
        series,
        seed,
        spec: spec.clone(),
    }
}

/// Gaussian ARFIMA(1,d,0): an exact-covariance FI(d) core from circulant
/// embedding, passed through x_t = φ x_{t-1} + u_t; the first `burn_in`
/// values are dropped.
pub fn simulate_arfima(spec: &DgpSpec, length: usize, seed: u64) -> Result<SimulatedPath> {
    check_request(spec, DgpKind::Arfima, length)?;
    let n = length + spec.burn_in;
    let mut rng = rng_from_seed(seed);
    let (core, generator) = match circulant_fi(spec.d, n, &mut rng) {
        Some(core) => (core, "circulant_embedding"),
        None => {
            let trunc = spec.burn_in.max(MIN_FALLBACK_BURN_IN);
            (fi_truncated_ma(spec.d, n, trunc, &mut rng), "truncated_ma")
        }
    };
    let mut out = Vec::with_capacity(n);
    let mut prev = 0.0;
    for u in core {
        prev = spec.phi * prev + spec.innovation_sd * u;
        out.push(prev);
    }
    let values = out.split_off(spec.burn_in);
    let mut path = finish(values, spec, seed);
    path.series.meta.insert("generator".into(), generator.into());
    Ok(path)
}

/// Unit-variance-innovation FI(d) sample of length `n` by circulant
/// embedding. `None` when the embedding is not non-negative definite.
pub(crate) fn circulant_fi<R: Rng>(d: f64, n: usize, rng: &mut R) -> Option<Vec<f64>> {
    let m = n.next_power_of_two().max(2);
    let size = 2 * m;
    let acov = specfun::fi_autocov(d, 1.0, m).ok()?.values;
    let mut row: Vec<Complex<f64>> = Vec::with_capacity(size);
    row.extend(acov.iter().map(|&g| Complex::new(g, 0.0)));
    row.extend(acov[1..m].iter().rev().map(|&g| Complex::new(g, 0.0)));
    let mut planner = FftPlanner::new();
    let fft = planner.plan_fft_forward(size);
    fft.process(&mut row);
    let peak = row.iter().fold(0.0_f64, |a, c| a.max(c.re));
    if row.iter().any(|c| c.re < -1e-10 * peak) {
        return None;
    }
    let scale = 1.0 / size as f64;
    let mut w: Vec<Complex<f64>> = row
        .iter()
        .map(|lam| {
            let s = (lam.re.max(0.0) * scale).sqrt();
            let a: f64 = rng.sample(StandardNormal);
            let b: f64 = rng.sample(StandardNormal);
            Complex::new(s * a, s * b)
        })
        .collect();
    fft.process(&mut w);
    Some(w[..n].iter().map(|c| c.re).collect())
}

/// FI(d) sample from the MA(∞) representation truncated after `trunc` lags.
pub(crate) fn fi_truncated_ma<R: Rng>(d: f64, n: usize, trunc: usize, rng: &mut R) -> Vec<f64> {
    let psi = binomial_weights(-d, trunc);
    let eps: Vec<f64> = (0..n + trunc).map(|_| rng.sample(StandardNormal)).collect();
    let size = (n + 2 * trunc + 1).next_power_of_two();
    let mut a: Vec<Complex<f64>> = eps.iter().map(|&e| Complex::new(e, 0.0)).collect();
    a.resize(size, Complex::new(0.0, 0.0));
    let mut b: Vec<Complex<f64>> = psi.iter().map(|&p| Complex::new(p, 0.0)).collect();
    b.resize(size, Complex::new(0.0, 0.0));
    let mut planner = FftPlanner::new();
    let fwd = planner.plan_fft_forward(size);
    let inv = planner.plan_fft_inverse(size);
    fwd.process(&mut a);
    fwd.process(&mut b);
    for (x, y) in a.iter_mut().zip(&b) {
        *x *= y;
    }
    inv.process(&mut a);
    let scale = 1.0 / size as f64;
    a[trunc..trunc + n].iter().map(|c| c.re * scale).collect()
}

/// Persistence coefficients α_i of the aggregation DGP, in unit order.
pub fn csa_coefficients(spec: &DgpSpec, seed: u64) -> Result<Vec<f64>> {
    spec.validate()?;
    let beta = csa_beta(spec)?;
    Ok((0..spec.n_units)
        .map(|i| {
            let mut rng = rng_from_seed(derive_seed(seed, i as u64));
            draw_alpha(spec, &beta, &mut rng)
        })
        .collect())
}

fn csa_beta(spec: &DgpSpec) -> Result<Beta<f64>> {
    Beta::new(spec.beta_p, spec.beta_q())
        .map_err(|e| Error::domain(format!("invalid Beta shapes: {e}")))
}

fn draw_alpha<R: Rng>(spec: &DgpSpec, beta: &Beta<f64>, rng: &mut R) -> f64 {
    let draw = beta.sample(rng).min(1.0 - 1e-12);
    if spec.beta_on_alpha {
        draw
    } else {
        draw.sqrt()
    }
}

/// x_t = N^{-1/2} Σ_i x_{i,t}, x_{i,t} = α_i x_{i,t-1} + ε_{i,t}.
///
/// Unit i draws from its own stream seeded with `derive_seed(seed, i)`: first
/// α_i, then its stationary starting value N(0, σ²/(1-α_i²)), then the
/// innovations. Units are summed in fixed chunks and the chunk sums are
/// added in unit order, so the output does not depend on the thread count.
pub fn simulate_csa(spec: &DgpSpec, length: usize, seed: u64) -> Result<SimulatedPath> {
    check_request(spec, DgpKind::CrossSectionalAggregation, length)?;
    let beta = csa_beta(spec)?;
    let sd = spec.innovation_sd;
    let burn = spec.burn_in;
    let n_chunks = spec.n_units.div_ceil(CSA_CHUNK);
    let partial: Vec<Vec<f64>> = (0..n_chunks)
        .into_par_iter()
        .map(|c| {
            let mut acc = vec![0.0; length];
            let lo = c * CSA_CHUNK;
            let hi = (lo + CSA_CHUNK).min(spec.n_units);
            for i in lo..hi {
                let mut rng = rng_from_seed(derive_seed(seed, i as u64));
                let alpha = draw_alpha(spec, &beta, &mut rng);
                let z: f64 = rng.sample(StandardNormal);
                let mut x = z * sd / (1.0 - alpha * alpha).sqrt();
                for _ in 0..burn {
                    let e: f64 = rng.sample(StandardNormal);
                    x = alpha * x + sd * e;
                }
                for slot in acc.iter_mut() {
                    let e: f64 = rng.sample(StandardNormal);
                    x = alpha * x + sd * e;
                    *slot += x;
                }
            }
            acc
        })
        .collect();
    let mut total = vec![0.0; length];
    for chunk in &partial {
        for (t, v) in total.iter_mut().zip(chunk) {
            *t += v;
        }
    }
    let norm = 1.0 / (spec.n_units as f64).sqrt();
    total.iter_mut().for_each(|v| *v *= norm);
    Ok(finish(total, spec, seed))
}

/// Survival probabilities p_0..p_K with p_k = Γ(k+d)Γ(2-d) / (Γ(k+2-d)Γ(d)),
/// via p_{k+1} = p_k (k+d)/(k+2-d) from p_0 = 1.
pub fn edm_survival(d: f64, max_k: usize) -> Vec<f64> {
    let mut p = Vec::with_capacity(max_k + 1);
    p.push(1.0);
    for k in 0..max_k {
        let kf = k as f64;
        let next = p[k] * (kf + d) / (kf + 2.0 - d);
        p.push(next);
    }
    p
}

/// Share of the expected number of live shocks contributed by durations
/// longer than `window`: Σ_{k>window} p_k / Σ_k p_k. For these survival
/// probabilities the partial tail sums are proportional to the FI(d)
/// autocorrelations, so the share equals ρ_{window+1}.
pub fn edm_tail_mass(d: f64, window: usize) -> Result<f64> {
    Ok(specfun::fi_acf(d, window + 1)?.values[window + 1])
}

/// x_t = Σ_{s ≤ t} g_{s,t} ε_s. Shock s lives for n_s further periods with
/// P(n_s ≥ k) = p_k, drawn by inverting the survival function. Shocks
/// starting in a pre-sample window of `burn_in` periods stand in for the
/// infinite past; the omitted share is recorded in the metadata.
pub fn simulate_edm(spec: &DgpSpec, length: usize, seed: u64) -> Result<SimulatedPath> {
    check_request(spec, DgpKind::ErrorDuration, length)?;
    let window = spec.burn_in;
    let total = window + length;
    let surv = edm_survival(spec.d, total);
    let mut rng = rng_from_seed(seed);
    let mut diff = vec![0.0; total + 1];
    for s in 0..total {
        let e: f64 = rng.sample(StandardNormal);
        let u = 1.0 - rng.random::<f64>();
        // Largest k with p_k ≥ u (p is decreasing and p_0 = 1 ≥ u).
        let n = surv.partition_point(|&p| p >= u) - 1;
        let eps = spec.innovation_sd * e;
        diff[s] += eps;
        let end = s + n + 1;
        if end < total {
            diff[end] -= eps;
        }
    }
    let mut level = 0.0;
    let mut values = Vec::with_capacity(length);
    for (t, dv) in diff[..total].iter().enumerate() {
        level += dv;
        if t >= window {
            values.push(level);
        }
    }
    let mut path = finish(values, spec, seed);
    path.series.meta.insert(
        "presample_tail_mass".into(),
        format!("{:.6}", edm_tail_mass(spec.d, window)?),
    );
    Ok(path)
}
