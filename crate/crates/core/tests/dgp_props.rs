mod common;

use common::*;
use longmem::dgp::{simulate, DgpKind, DgpSpec};
use longmem::models::local_whittle_estimate;
use proptest::prelude::*;

fn sample_acf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let m = mean(x);
    let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
    (0..=max_lag)
        .map(|k| (k..x.len()).map(|t| (x[t] - m) * (x[t - k] - m)).sum::<f64>() / c0)
        .collect()
}

/// Least-squares slope of ln acf against ln lag over lags 10..=100,
/// averaged over `paths` sample paths.
fn acf_slope(spec: &DgpSpec, paths: u64) -> f64 {
    let n = 20_000;
    let mut acf = vec![0.0; 101];
    for s in 0..paths {
        let x = simulate(spec, n, 700 + s).unwrap().series;
        for (a, v) in acf.iter_mut().zip(sample_acf(x.values(), 100)) {
            *a += v / paths as f64;
        }
    }
    let pts: Vec<(f64, f64)> = (10..=100).map(|k| ((k as f64).ln(), acf[k].max(1e-6).ln())).collect();
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / pts.len() as f64;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / pts.len() as f64;
    pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>()
}

#[test]
fn fi_acf_decays_hyperbolically() {
    let d = 0.3;
    let slope = acf_slope(&DgpSpec::arfima(d, 0.0), 4);
    // sample autocorrelations are biased down at long lags; the band is wide
    assert!((slope - (2.0 * d - 1.0)).abs() < 0.25, "slope {slope}");
}

#[test]
fn aggregation_and_duration_transmit_memory() {
    for kind in [DgpKind::CrossSectionalAggregation, DgpKind::ErrorDuration] {
        let d = 0.3;
        let spec = DgpSpec::default_for(kind, d);
        let est: Vec<f64> = (0..4)
            .map(|s| {
                let x = simulate(&spec, 8000, 40 + s).unwrap().series;
                local_whittle_estimate(&x, None).unwrap().d_hat
            })
            .collect();
        let m = mean(&est);
        assert!(m > 0.15 && m < 0.45, "{kind}: {est:?}");
    }
}

#[test]
fn simulated_paths_are_centred() {
    for kind in [DgpKind::Arfima, DgpKind::CrossSectionalAggregation, DgpKind::ErrorDuration] {
        let spec = DgpSpec::default_for(kind, 0.2);
        let means: Vec<f64> = (0..20)
            .map(|s| mean(simulate(&spec, 2000, s).unwrap().series.values()))
            .collect();
        let grand = mean(&means);
        let sd = (means.iter().map(|m| (m - grand).powi(2)).sum::<f64>() / 19.0).sqrt();
        assert!(grand.abs() < 4.0 * sd / (20f64).sqrt() + 1e-3, "{kind}: {grand} (sd {sd})");
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(16))]

    #[test]
    fn same_seed_same_path(kind in 0usize..3, d in 0.05f64..0.45, seed in any::<u64>(), n in 1usize..300) {
        let kind = [DgpKind::Arfima, DgpKind::CrossSectionalAggregation, DgpKind::ErrorDuration][kind];
        let mut spec = DgpSpec::default_for(kind, d);
        spec.n_units = spec.n_units.min(300);
        let a = simulate(&spec, n, seed).unwrap();
        let b = simulate(&spec, n, seed).unwrap();
        prop_assert_eq!(a.series.values(), b.series.values());
        prop_assert_eq!(a.series.len(), n);
        prop_assert!(a.series.values().iter().all(|v| v.is_finite()));
    }
}
