//! Acceptance suite. Runs every criterion at full size and prints one
//! `PASS`/`FAIL`/`SKIP` line per criterion followed by the measured values.
//! The process exits 0 so that the report is always produced; the lines are
//! the verdict. Expect roughly an hour on a single core.

mod common;

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};
use std::time::Instant;

use common::*;
use longmem::dgp::{simulate, DgpKind, DgpSpec};
use longmem::forecast::{forecast, truncated_ar_forecast, LossKind};
use longmem::harness::{run_experiment, run_har_comparison, ExperimentConfig, ExperimentResult};
use longmem::mcs::{mcs, BootstrapConfig, LossPanel, Statistic};
use longmem::models::{
    bic_select, fit, gph_estimate, local_whittle_estimate, ModelSpec, SelectFamily,
};
use longmem::rng::{derive_seed, rng_from_seed};
use longmem::rvdata::{load_rv, run_window_study, ModelGroup, WindowStudyConfig};
use rand::Rng;
use rand_distr::{Distribution, Exp};

const MASTER_SEED: u64 = 20_240_601;
const R: usize = 200;

enum Verdict {
    Pass,
    Fail,
    Skip,
}

struct Outcome {
    verdict: Verdict,
    detail: String,
}

impl Outcome {
    fn check(ok: bool, detail: String) -> Self {
        Self {
            verdict: if ok { Verdict::Pass } else { Verdict::Fail },
            detail,
        }
    }
}

fn workers() -> usize {
    std::thread::available_parallelism().map(|n| n.get()).unwrap_or(1)
}

fn experiment(kind: DgpKind, d: f64, seed_offset: u64) -> ExperimentResult {
    let mut cfg = ExperimentConfig::new(DgpSpec::default_for(kind, d));
    cfg.d_grid = vec![d];
    cfg.replications = R;
    cfg.loss_kind = LossKind::Ad;
    cfg.statistic = Statistic::Range;
    cfg.alpha = 0.05;
    cfg.master_seed = MASTER_SEED + seed_offset;
    cfg.workers = workers();
    run_experiment(&cfg).expect("experiment runs")
}

fn top_model(res: &ExperimentResult, h: usize) -> (String, f64) {
    let k = res.horizon_index(h).unwrap();
    let i = (0..res.models.len())
        .max_by(|&a, &b| res.inclusion[a][k].total_cmp(&res.inclusion[b][k]))
        .unwrap();
    (res.models[i].clone(), res.inclusion[i][k])
}

fn inclusion_row(res: &ExperimentResult, label: &str) -> String {
    let vals: Vec<String> = res
        .horizons
        .iter()
        .map(|&h| format!("h{h}={:.3}", res.inclusion_of(label, h).unwrap()))
        .collect();
    format!("{label} inclusion [{}]", vals.join(" "))
}

fn failure_note(res: &ExperimentResult) -> String {
    let mut by_model: BTreeMap<&str, usize> = BTreeMap::new();
    for f in &res.failures {
        *by_model.entry(f.model.as_str()).or_default() += 1;
    }
    if by_model.is_empty() {
        "no estimation failures".into()
    } else {
        let parts: Vec<String> = by_model.iter().map(|(m, c)| format!("{m}:{c}")).collect();
        format!("failures {}", parts.join(" "))
    }
}

fn criterion_1() -> Outcome {
    let res = experiment(DgpKind::Arfima, 0.3, 1);
    let (top5, v5) = top_model(&res, 5);
    let rw5 = res.inclusion_of("I(1)", 5).unwrap();
    let a = top5 == "I(1)" || rw5 >= v5;
    let (top300, v300) = top_model(&res, 300);
    let fi300 = res.inclusion_of("FI(d)", 300).unwrap();
    let b = (top300 == "FI(d)" || fi300 >= v300) && (fi300 - 0.315).abs() <= 0.07;
    let mut worst_all = true;
    for &h in &res.horizons {
        let k = res.horizon_index(h).unwrap();
        let worst = (0..res.models.len())
            .max_by(|&x, &y| res.mean_rmad[x][k].total_cmp(&res.mean_rmad[y][k]))
            .unwrap();
        worst_all &= res.models[worst] == "I(1)";
    }
    Outcome::check(
        a && b && worst_all,
        format!(
            "(a) top at h=5: {top5} {v5:.3}, I(1) {rw5:.3} -> {a}; (b) top at h=300: {top300} {v300:.3}, FI(d) {fi300:.3} (target 0.315 +/- 0.07) -> {b}; \
             (c) I(1) worst mean RMAD at every horizon -> {worst_all}; {}; {}",
            inclusion_row(&res, "I(1)"),
            failure_note(&res)
        ),
    )
}

fn criterion_2() -> Outcome {
    let res = experiment(DgpKind::CrossSectionalAggregation, 0.3, 2);
    let rw5 = res.inclusion_of("I(1)", 5).unwrap();
    let a = (rw5 - 0.227).abs() <= 0.08;
    let mut winners = Vec::new();
    let mut b = true;
    for &h in &res.horizons {
        let k = res.horizon_index(h).unwrap();
        let best = (0..res.models.len())
            .min_by(|&x, &y| res.mean_rmad[x][k].total_cmp(&res.mean_rmad[y][k]))
            .unwrap();
        let spec: ModelSpec = res.models[best].parse().unwrap();
        b &= spec.is_fractional();
        winners.push(format!("h{h}:{}", res.models[best]));
    }
    Outcome::check(
        a && b,
        format!(
            "I(1) inclusion at h=5 {rw5:.3} (target 0.227 +/- 0.08) -> {a}; minimum mean RMAD [{}] all fractional -> {b}; {}",
            winners.join(" "),
            failure_note(&res)
        ),
    )
}

fn criterion_3() -> Outcome {
    let res = experiment(DgpKind::ErrorDuration, 0.3, 3);
    let fi300 = res.inclusion_of("FI(d)", 300).unwrap();
    let a = (fi300 - 0.277).abs() <= 0.07;
    let path: Vec<f64> = [30, 50, 100, 300].iter().map(|&h| res.inclusion_of("FI(d)", h).unwrap()).collect();
    let b = path.windows(2).all(|w| w[1] >= w[0] - 0.03);
    Outcome::check(
        a && b,
        format!(
            "FI(d) inclusion at h=300 {fi300:.3} (target 0.277 +/- 0.07) -> {a}; FI(d) over h=30,50,100,300 {path:.3?} weakly increasing -> {b}; {}",
            failure_note(&res)
        ),
    )
}

fn criterion_4() -> Outcome {
    let mut cfg = ExperimentConfig::new(DgpSpec::default_for(DgpKind::Arfima, 0.4));
    cfg.d_grid = vec![0.4];
    cfg.replications = R;
    cfg.master_seed = MASTER_SEED + 4;
    cfg.workers = workers();
    let res = run_har_comparison(&cfg).expect("comparison runs");
    let har300 = res.inclusion_of("HAR(4)", 300).unwrap();
    let ar300 = res.inclusion_of("AR(50)", 300).unwrap();
    let har5 = res.inclusion_of("HAR(4)", 5).unwrap();
    let ar5 = res.inclusion_of("AR(50)", 5).unwrap();
    let a = har300 >= ar300;
    let b = ar5 >= har5;
    Outcome::check(
        a && b,
        format!(
            "h=300: HAR(4) {har300:.3} >= AR(50) {ar300:.3} -> {a}; h=5: AR(50) {ar5:.3} >= HAR(4) {har5:.3} -> {b}; {}",
            failure_note(&res)
        ),
    )
}

fn criterion_5() -> Outcome {
    let mut ok = true;
    let mut parts = Vec::new();
    for (g, d) in [0.2, 0.3, 0.4].into_iter().enumerate() {
        let (mut ml, mut gph, mut lw) = (Vec::new(), Vec::new(), Vec::new());
        let mut ml_fail = 0;
        for r in 0..R as u64 {
            let seed = derive_seed(derive_seed(MASTER_SEED + 5, g as u64), r);
            let s = simulate(&DgpSpec::arfima(d, 0.0), 1000, seed).unwrap().series;
            match fit(&s, &ModelSpec::fi()) {
                Ok(m) => ml.push(m.d_hat.unwrap()),
                Err(_) => ml_fail += 1,
            }
            gph.push(gph_estimate(&s, None).unwrap().d_hat);
            lw.push(local_whittle_estimate(&s, None).unwrap().d_hat);
        }
        let (em, eg, el) = (mean(&ml) - d, mean(&gph) - d, mean(&lw) - d);
        let pass = em.abs() <= 0.03 && eg.abs() <= 0.07 && el.abs() <= 0.06 && ml_fail == 0;
        ok &= pass;
        parts.push(format!(
            "d={d}: exact {:.4} gph {:.4} lw {:.4} (ml failures {ml_fail}) -> {pass}",
            mean(&ml),
            mean(&gph),
            mean(&lw)
        ));
    }
    Outcome::check(ok, format!("tolerances 0.03/0.07/0.06; {}", parts.join("; ")))
}

fn criterion_6() -> Outcome {
    let mut rng = rng_from_seed(MASTER_SEED + 6);
    let mut worst = 0.0f64;
    let mut worst_trunc = 0.0f64;
    for case in 0..50u64 {
        let d: f64 = rng.random_range(-0.45..0.45);
        let p = rng.random_range(0..=2usize);
        let q = rng.random_range(0..=(2 - p));
        let ar: Vec<f64> = match p {
            0 => vec![],
            1 => vec![rng.random_range(-0.8..0.8)],
            _ => {
                // build from admissible partial autocorrelations
                let (r1, r2): (f64, f64) = (rng.random_range(-0.7..0.7), rng.random_range(-0.7..0.7));
                vec![r1 * (1.0 - r2), r2]
            }
        };
        let ma: Vec<f64> = (0..q).map(|_| rng.random_range(-0.5..0.5) / q as f64).collect();
        let t = rng.random_range(20..=100);
        let h = rng.random_range(1..=10);
        let s = simulate(&DgpSpec::arfima(0.3, 0.0), t, derive_seed(MASTER_SEED + 6, case)).unwrap().series;
        let model = fitted_fractional(&s, d, ar.clone(), ma.clone());
        let got = forecast(&model, &s, h).unwrap().values;
        let mu = s.mean();
        let x: Vec<f64> = s.values().iter().map(|v| v - mu).collect();
        let acov = arfima_acov_oracle(d, &ar, &ma, t + h);
        let want: Vec<f64> = innovations_forecast(&acov, &x, h).iter().map(|v| v + mu).collect();
        let scale = want.iter().fold(0.0f64, |m, v| m.max(v.abs())).max(1e-12);
        let err = got.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
        worst = worst.max(err);
        let trunc = truncated_ar_forecast(&model, &s, h).unwrap();
        let terr = trunc.iter().zip(&want).map(|(a, b)| (a - b).abs()).fold(0.0, f64::max) / scale;
        worst_trunc = worst_trunc.max(terr);
    }
    Outcome::check(
        worst <= 1e-4,
        format!(
            "50 instances T<=100 h<=10: max relative gap of the production forecast to the innovations predictor {worst:.3e} (tol 1e-4); \
             literal pi-weight truncation gap for reference {worst_trunc:.3e}"
        ),
    )
}

fn mcs_boot(seed: u64) -> BootstrapConfig {
    BootstrapConfig {
        replications: 999,
        block_length: None,
        seed,
    }
}

fn panel(cols: Vec<Vec<f64>>, kind: LossKind) -> LossPanel {
    let ids = (0..cols.len()).map(|i| format!("m{i}")).collect();
    LossPanel::from_columns(ids, cols, kind).unwrap()
}

fn criterion_7() -> Outcome {
    let clock = Instant::now();
    let mut rng = rng_from_seed(MASTER_SEED + 7);
    let exp = Exp::new(1.0).unwrap();

    let mut empty = 0;
    for k in 0..1000u64 {
        let m = rng.random_range(2..=8);
        let n = rng.random_range(2..=60);
        let style = k % 4;
        let cols: Vec<Vec<f64>> = (0..m)
            .map(|i| {
                (0..n)
                    .map(|_| match style {
                        0 => exp.sample(&mut rng),
                        1 => (rng.random_range(0..3) as f64) * 0.5,
                        2 => exp.sample(&mut rng) + 0.3 * i as f64,
                        _ => rng.random::<f64>().powi(4) * 100.0,
                    })
                    .collect()
            })
            .collect();
        let stat = if k % 2 == 0 { Statistic::Range } else { Statistic::SemiQuadratic };
        let res = mcs(&panel(cols, LossKind::Sq), stat, 0.05, &mcs_boot(k)).unwrap();
        if res.superior_set.is_empty() {
            empty += 1;
        }
    }
    let nonempty = empty == 0;

    let mut identical = true;
    for k in 0..20u64 {
        let col: Vec<f64> = (0..30).map(|_| exp.sample(&mut rng)).collect();
        let m = 2 + (k as usize % 5);
        for stat in [Statistic::Range, Statistic::SemiQuadratic] {
            let res = mcs(&panel(vec![col.clone(); m], LossKind::Ad), stat, 0.05, &mcs_boot(k)).unwrap();
            identical &= res.superior_set.len() == m && res.p_values.iter().all(|(_, p)| *p == 1.0);
        }
    }

    let mut dominance = true;
    let mut max_p = 0.0f64;
    for k in 0..20u64 {
        let mut cols: Vec<Vec<f64>> = (0..4).map(|_| (0..100).map(|_| exp.sample(&mut rng)).collect()).collect();
        cols.push((0..100).map(|_| exp.sample(&mut rng) + 2.0).collect());
        let res = mcs(&panel(cols, LossKind::Sq), Statistic::Range, 0.05, &mcs_boot(100 + k)).unwrap();
        let p = res.p_values.iter().find(|(id, _)| id == "m4").unwrap().1;
        max_p = max_p.max(p);
        dominance &= !res.contains("m4") && p < 0.01;
    }

    let panels = 500;
    let mut covered = [0usize; 5];
    for k in 0..panels as u64 {
        let cols: Vec<Vec<f64>> = (0..5).map(|_| (0..100).map(|_| exp.sample(&mut rng)).collect()).collect();
        let res = mcs(&panel(cols, LossKind::Sq), Statistic::Range, 0.05, &mcs_boot(1000 + k)).unwrap();
        for (i, c) in covered.iter_mut().enumerate() {
            *c += usize::from(res.contains(&format!("m{i}")));
        }
    }
    let rates: Vec<f64> = covered.iter().map(|&c| c as f64 / panels as f64).collect();
    let coverage = rates.iter().all(|&r| r >= 0.9);
    let secs = clock.elapsed().as_secs_f64();
    let fast = secs < 300.0;
    Outcome::check(
        nonempty && identical && dominance && coverage && fast,
        format!(
            "non-empty on 1000 panels -> {nonempty} ({empty} empty); identical losses retained with p=1 -> {identical}; \
             dominated model eliminated with p<0.01 -> {dominance} (max p {max_p:.4}); null coverage {rates:.3?} >= 0.90 -> {coverage}; runtime {secs:.0}s"
        ),
    )
}

fn modal_order(kind: DgpKind, d: f64, family: SelectFamily, max: (usize, usize), offset: u64) -> (ModelSpec, usize, usize) {
    let mut counts: BTreeMap<String, (ModelSpec, usize)> = BTreeMap::new();
    let mut failed = 0;
    for r in 0..R as u64 {
        let seed = derive_seed(MASTER_SEED + 8 + offset, r);
        let s = simulate(&DgpSpec::default_for(kind, d), 1000, seed).unwrap().series;
        match bic_select(&s, family, max.0, max.1) {
            Ok(spec) => counts.entry(spec.to_string()).or_insert((spec, 0)).1 += 1,
            Err(_) => failed += 1,
        }
    }
    let (spec, n) = counts.into_values().max_by_key(|(_, n)| *n).expect("some selection");
    (spec, n, failed)
}

fn criterion_8() -> Outcome {
    let cases = [
        (DgpKind::CrossSectionalAggregation, 0.2, (1, 0), (2, 1)),
        (DgpKind::CrossSectionalAggregation, 0.4, (1, 0), (2, 1)),
        (DgpKind::ErrorDuration, 0.2, (0, 1), (1, 1)),
        (DgpKind::ErrorDuration, 0.4, (0, 1), (1, 2)),
    ];
    let mut ok = true;
    let mut parts = Vec::new();
    for (c, (kind, d, want_fi, want_arma)) in cases.into_iter().enumerate() {
        let (fi, nf, ff) = modal_order(kind, d, SelectFamily::Arfima, (2, 2), 2 * c as u64);
        let (am, na, fa) = modal_order(kind, d, SelectFamily::Arma, (4, 4), 2 * c as u64);
        let pass = (fi.p, fi.q) == want_fi && (am.p, am.q) == want_arma;
        ok &= pass;
        parts.push(format!(
            "{kind} d={d}: ARFIMA {:?} ({nf}/{R}, {ff} failed) want {want_fi:?}, ARMA {:?} ({na}/{R}, {fa} failed) want {want_arma:?} -> {pass}",
            (fi.p, fi.q),
            (am.p, am.q)
        ));
    }
    Outcome::check(ok, parts.join("; "))
}

fn rv_data_path() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../data/spx_rv.csv")
}

fn criterion_9() -> Outcome {
    let path = rv_data_path();
    if !path.exists() {
        return Outcome {
            verdict: Verdict::Skip,
            detail: format!("realized-variance extract not found at {}; supply it (columns date,rv5) to run", path.display()),
        };
    }
    let series = match load_rv(&path, "rv5") {
        Ok(s) => s,
        Err(e) => return Outcome::check(false, format!("cannot load {}: {e}", path.display())),
    };
    let ts = series.to_series(false).unwrap();
    let gph = gph_estimate(&ts, None).unwrap().d_hat;
    let lw = local_whittle_estimate(&ts, None).unwrap().d_hat;
    let a = (gph - 0.4501).abs() <= 0.02 && (lw - 0.4675).abs() <= 0.02;
    let first_end: chrono::NaiveDate = "2014-12-30".parse().unwrap();
    let Some(first) = series.index_on_or_before(first_end) else {
        return Outcome::check(false, "sample starts after the first window end".into());
    };
    let last = first + 253;
    if last + 254 >= series.len() {
        return Outcome::check(
            false,
            format!("gph {gph:.4} lw {lw:.4} -> {a}; too few observations after the first window for 254 windows at h=254"),
        );
    }
    let mut cfg = WindowStudyConfig::new(series.dates[first], series.dates[last]);
    cfg.seed = MASTER_SEED + 9;
    cfg.workers = workers();
    let res = run_window_study(&series, &cfg).unwrap();
    let arma254 = res.group_inclusion_of(ModelGroup::ShortMemory, 254).unwrap();
    let b = arma254 == 0.0;
    let mut c = true;
    for h in [66, 120, 254] {
        let lm = res.group_inclusion_of(ModelGroup::LongMemory, h).unwrap();
        c &= ModelGroup::ALL
            .iter()
            .all(|&g| res.group_inclusion_of(g, h).unwrap() <= lm);
    }
    Outcome::check(
        a && b && c,
        format!(
            "gph {gph:.4} (0.4501) lw {lw:.4} (0.4675) -> {a}; short-memory group at h=254 {arma254:.3} == 0 -> {b}; \
             long-memory group highest for h>=66 -> {c}; groups:\n{}",
            res.render_groups()
        ),
    )
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("1 arfima d=0.3 MCS and RMAD pattern", criterion_1),
        ("2 aggregation d=0.3 MCS and RMAD pattern", criterion_2),
        ("3 duration d=0.3 FI(d) inclusion", criterion_3),
        ("4 HAR(4) versus AR(50) crossing at d=0.4", criterion_4),
        ("5 memory estimator consistency", criterion_5),
        ("6 forecast equals innovations predictor", criterion_6),
        ("7 MCS property suite", criterion_7),
        ("8 modal BIC orders", criterion_8),
        ("9 realized-variance study", criterion_9),
    ];
    let filter: Vec<String> = std::env::args().skip(1).filter(|a| !a.starts_with('-')).collect();
    let (mut pass, mut fail, mut skip) = (0, 0, 0);
    for (name, run) in criteria {
        if !filter.is_empty() && !filter.iter().any(|f| name.starts_with(f.as_str())) {
            continue;
        }
        let clock = Instant::now();
        let out = run();
        let tag = match out.verdict {
            Verdict::Pass => {
                pass += 1;
                "PASS"
            }
            Verdict::Fail => {
                fail += 1;
                "FAIL"
            }
            Verdict::Skip => {
                skip += 1;
                "SKIP"
            }
        };
        println!("{tag} criterion {name} ({:.0}s): {}", clock.elapsed().as_secs_f64(), out.detail);
    }
    println!("acceptance summary: {pass} passed, {fail} failed, {skip} skipped");
}
