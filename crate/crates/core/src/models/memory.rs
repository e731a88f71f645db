//! Semiparametric memory estimators on the low Fourier frequencies.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::optim::golden_section;
use crate::series::TimeSeries;
use crate::spectral::periodogram;

const MIN_BANDWIDTH: usize = 5;
const D_MAX: f64 = 0.49;

/// A memory estimate with its bandwidth and asymptotic standard error.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MemoryEstimate {
    pub d_hat: f64,
    pub bandwidth: usize,
    pub std_error: f64,
}

pub fn default_gph_bandwidth(n: usize) -> usize {
    (n as f64).powf(0.5).floor() as usize
}

pub fn default_lw_bandwidth(n: usize) -> usize {
    (n as f64).powf(0.65).floor() as usize
}

fn check_bandwidth(series: &TimeSeries, m: usize) -> Result<()> {
    let n = series.len();
    if m < MIN_BANDWIDTH {
        return Err(Error::domain(format!("bandwidth {m} below {MIN_BANDWIDTH}")));
    }
    if 2 * m >= n {
        return Err(Error::domain(format!("bandwidth {m} must be below T/2 = {}", n / 2)));
    }
    if series.values().iter().any(|v| !v.is_finite()) {
        return Err(Error::Data("series contains non-finite values".into()));
    }
    Ok(())
}

/// Log-periodogram regression: slope of ln I(λ_j) on -2 ln(2 sin(λ_j/2)),
/// j = 1..m. `None` selects floor(T^0.5).
pub fn gph_estimate(series: &TimeSeries, bandwidth: Option<usize>) -> Result<MemoryEstimate> {
    let m = bandwidth.unwrap_or_else(|| default_gph_bandwidth(series.len()));
    check_bandwidth(series, m)?;
    let pg = periodogram(series.values(), m);
    if pg.iter().any(|(_, i)| !(*i > 0.0)) {
        return Err(Error::domain("zero periodogram ordinate in the regression band"));
    }
    let xs: Vec<f64> = pg.iter().map(|(l, _)| -2.0 * (2.0 * (l / 2.0).sin()).ln()).collect();
    let ys: Vec<f64> = pg.iter().map(|(_, i)| i.ln()).collect();
    let mf = m as f64;
    let mx = xs.iter().sum::<f64>() / mf;
    let my = ys.iter().sum::<f64>() / mf;
    let sxy: f64 = xs.iter().zip(&ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx).powi(2)).sum();
    Ok(MemoryEstimate {
        d_hat: sxy / sxx,
        bandwidth: m,
        std_error: PI / (24.0 * mf).sqrt(),
    })
}

/// R(d) = ln(m⁻¹ Σ λ_j^{2d} I(λ_j)) - 2d m⁻¹ Σ ln λ_j.
pub fn local_whittle_objective(series: &TimeSeries, bandwidth: usize, d: f64) -> f64 {
    lw_objective(&periodogram(series.values(), bandwidth), d)
}

fn lw_objective(pg: &[(f64, f64)], d: f64) -> f64 {
    let m = pg.len() as f64;
    let mean_log: f64 = pg.iter().map(|(l, _)| l.ln()).sum::<f64>() / m;
    let g: f64 = pg.iter().map(|(l, i)| l.powf(2.0 * d) * i).sum::<f64>() / m;
    g.ln() - 2.0 * d * mean_log
}

/// Local Whittle estimate by golden-section search on (-0.49, 0.49);
/// R(d) is convex, so the search is global. `None` selects floor(T^0.65).
pub fn local_whittle_estimate(series: &TimeSeries, bandwidth: Option<usize>) -> Result<MemoryEstimate> {
    let m = bandwidth.unwrap_or_else(|| default_lw_bandwidth(series.len()));
    check_bandwidth(series, m)?;
    let pg = periodogram(series.values(), m);
    let (d, _) = golden_section(|d| lw_objective(&pg, d), -D_MAX, D_MAX, 1e-9);
    Ok(MemoryEstimate {
        d_hat: d,
        bandwidth: m,
        std_error: 1.0 / (2.0 * (m as f64).sqrt()),
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bandwidth_limits() {
        let s = TimeSeries::new((0..100).map(|t| (t as f64).sin()).collect());
        assert!(matches!(gph_estimate(&s, Some(4)), Err(Error::Domain(_))));
        assert!(matches!(local_whittle_estimate(&s, Some(50)), Err(Error::Domain(_))));
        assert_eq!(default_gph_bandwidth(1000), 31);
        assert_eq!(default_lw_bandwidth(1000), 89);
    }

    #[test]
    fn lw_minimizer_is_stationary_point() {
        let s = crate::dgp::simulate(&crate::dgp::DgpSpec::arfima(0.3, 0.0), 1000, 2)
            .unwrap()
            .series;
        let e = local_whittle_estimate(&s, None).unwrap();
        let h = 1e-5;
        let g = (local_whittle_objective(&s, e.bandwidth, e.d_hat + h)
            - local_whittle_objective(&s, e.bandwidth, e.d_hat - h))
            / (2.0 * h);
        assert!(g.abs() < 1e-4, "{g}");
    }

    #[test]
    fn gph_recovers_exact_power_law() {
        // A series whose periodogram is exactly proportional to
        // (2 sin(λ/2))^{-2d} on the band: built in the frequency domain.
        use rustfft::{num_complex::Complex, FftPlanner};
        let n = 1024;
        let d = 0.3;
        let mut buf = vec![Complex::new(0.0, 0.0); n];
        for j in 1..n / 2 {
            let lam = 2.0 * PI * j as f64 / n as f64;
            let amp = (2.0 * (lam / 2.0).sin()).powf(-d);
            buf[j] = Complex::new(amp, 0.0);
            buf[n - j] = Complex::new(amp, 0.0);
        }
        FftPlanner::new().plan_fft_inverse(n).process(&mut buf);
        let s = TimeSeries::new(buf.iter().map(|c| c.re).collect());
        let e = gph_estimate(&s, Some(30)).unwrap();
        assert!((e.d_hat - d).abs() < 1e-9, "{}", e.d_hat);
    }
}
