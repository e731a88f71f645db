use std::path::Path;

use chrono::NaiveDate;
use longmem::models::ModelSpec;
use longmem::rvdata::{load_rv, run_window_study, RvSeries, WindowStudyConfig};

fn fixture() -> RvSeries {
    load_rv(&Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/data/rv_fixture.csv"), "rv5").unwrap()
}

fn date(s: &str) -> NaiveDate {
    s.parse().unwrap()
}

fn small_config() -> WindowStudyConfig {
    let mut cfg = WindowStudyConfig::new(date("2002-01-02"), date("2002-01-08"));
    cfg.horizons = vec![5, 22];
    cfg.model_set = vec![ModelSpec::fi(), ModelSpec::arma(1, 1), ModelSpec::har(&[1, 5, 22]), ModelSpec::random_walk()];
    cfg.boot_replications = 500;
    cfg.seed = 17;
    cfg
}

#[test]
fn fixture_loads() {
    let s = fixture();
    assert_eq!(s.len(), 640);
    assert_eq!(s.dropped, 0);
    assert!(s.rv.iter().all(|v| *v > 0.0));
}

#[test]
fn windows_grow_by_one_day() {
    let res = run_window_study(&fixture(), &small_config()).unwrap();
    assert_eq!(res.n_windows, res.windows.len());
    assert!(res.n_windows >= 4);
    for w in res.windows.windows(2) {
        assert_eq!(w[1].n_obs, w[0].n_obs + 1);
        assert!(w[1].window_end > w[0].window_end);
    }
    for k in 0..2 {
        let total: f64 = res.group_inclusion.iter().map(|g| g[k]).sum();
        assert!((total - 1.0).abs() < 1e-12, "{total}");
    }
}

#[test]
fn forecasts_ignore_data_after_the_window_end() {
    let base = fixture();
    let cfg = small_config();
    let a = run_window_study(&base, &cfg).unwrap();
    // Overwrite everything after the first window end with sentinels.
    let end = base.index_on_or_before(cfg.first_window_end).unwrap();
    let mut rv = base.rv.clone();
    for v in &mut rv[end + 1..] {
        *v = 1e6;
    }
    let poisoned = RvSeries::new(base.dates.clone(), rv, "sentinel").unwrap();
    let mut one = cfg.clone();
    one.last_window_end = cfg.first_window_end;
    let b = run_window_study(&poisoned, &one).unwrap();
    assert_eq!(a.windows[0].forecasts, b.windows[0].forecasts);
    // the scores do see the sentinels
    assert!(b.windows[0].rmad[0][0].unwrap() > 100.0);
}

#[test]
fn too_short_sample_is_rejected() {
    let mut cfg = small_config();
    cfg.last_window_end = date("2002-06-20");
    let e = run_window_study(&fixture(), &cfg).unwrap_err();
    assert_eq!(e.kind(), "config");
}
