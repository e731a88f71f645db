//! Monte Carlo protocol: simulate T + max(h), fit every model on the first T
//! observations, forecast to the longest horizon, and per horizon score the
//! forecasts and run the MCS on the n = h loss panel. Inclusion frequencies
//! and mean RMSE/RMAD are aggregated over replications.
//!
//! Replication r uses only seeds derived from `(master_seed, r)` and the
//! outcomes are merged in replication order, so results do not depend on
//! the worker count.

use std::collections::BTreeSet;
use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use serde::Deserialize;

use crate::dgp::{simulate, DgpKind, DgpSpec};
use crate::error::{Error, Result};
use crate::forecast::{forecast, loss, LossKind};
use crate::mcs::{mcs, BootstrapConfig, LossPanel, Statistic, DEFAULT_REPLICATIONS};
use crate::models::{default_model_set, fit, har_comparison_set, ModelSpec};
use crate::rng::derive_seed;
use crate::series::TimeSeries;

pub const DEFAULT_HORIZONS: [usize; 6] = [5, 10, 30, 50, 100, 300];
pub const DEFAULT_D_GRID: [f64; 4] = [0.1, 0.2, 0.3, 0.4];
pub const MIN_T: usize = 200;

#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    /// Generator; its `d` is replaced by each grid value in [`run_grid`].
    pub dgp: DgpSpec,
    pub d_grid: Vec<f64>,
    pub t: usize,
    pub horizons: Vec<usize>,
    pub replications: usize,
    pub model_set: Vec<ModelSpec>,
    pub loss_kind: LossKind,
    pub statistic: Statistic,
    pub alpha: f64,
    pub master_seed: u64,
    /// Worker threads; 0 uses every available core.
    pub workers: usize,
    pub boot_replications: usize,
    pub block_length: Option<usize>,
}

impl ExperimentConfig {
    /// Table defaults: T = 1000, R = 200, the fifteen-model set, absolute
    /// loss, range statistic, 95% confidence.
    pub fn new(dgp: DgpSpec) -> Self {
        Self {
            d_grid: vec![dgp.d],
            dgp,
            t: 1000,
            horizons: DEFAULT_HORIZONS.to_vec(),
            replications: 200,
            model_set: default_model_set(),
            loss_kind: LossKind::Ad,
            statistic: Statistic::Range,
            alpha: 0.05,
            master_seed: 0,
            workers: 0,
            boot_replications: DEFAULT_REPLICATIONS,
            block_length: None,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.t < MIN_T {
            return Err(Error::Config(format!("T = {} below the minimum {MIN_T}", self.t)));
        }
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.horizons.is_empty() || self.horizons[0] == 0 {
            return Err(Error::Config("horizons must be non-empty and positive".into()));
        }
        if self.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("horizons must be strictly increasing".into()));
        }
        if self.model_set.is_empty() {
            return Err(Error::Config("model set is empty".into()));
        }
        let labels: BTreeSet<String> = self.model_set.iter().map(|m| m.to_string()).collect();
        if labels.len() != self.model_set.len() {
            return Err(Error::Config("model set contains duplicates".into()));
        }
        for m in &self.model_set {
            m.validate()?;
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha = {} outside (0, 1)", self.alpha)));
        }
        if self.boot_replications < crate::mcs::MIN_REPLICATIONS {
            return Err(Error::Config(format!(
                "boot_replications must be at least {}",
                crate::mcs::MIN_REPLICATIONS
            )));
        }
        if self.block_length == Some(0) {
            return Err(Error::Config("block_length must be at least 1".into()));
        }
        if self.d_grid.is_empty() {
            return Err(Error::Config("d_grid is empty".into()));
        }
        for &d in &self.d_grid {
            DgpSpec { d, ..self.dgp.clone() }
                .validate()
                .map_err(|e| Error::Config(e.to_string()))?;
        }
        Ok(())
    }

    pub fn max_horizon(&self) -> usize {
        self.horizons.last().copied().unwrap_or(0)
    }

    /// Parses the flat `key = value` TOML format; see [`CONFIG_KEYS`].
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawConfig =
            toml::from_str(text).map_err(|e| Error::Config(e.message().replace('\n', " ")))?;
        raw.resolve()
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    /// Flat TOML echo that [`ExperimentConfig::from_toml`] reads back.
    pub fn to_toml(&self) -> String {
        let mut s = String::new();
        let dgp = match self.dgp.kind {
            DgpKind::Arfima => "arfima",
            DgpKind::CrossSectionalAggregation => "csa",
            DgpKind::ErrorDuration => "edm",
        };
        let list = |v: &[String]| v.join(", ");
        let _ = writeln!(s, "dgp = \"{dgp}\"");
        let _ = writeln!(
            s,
            "d_grid = [{}]",
            list(&self.d_grid.iter().map(|d| format!("{d:?}")).collect::<Vec<_>>())
        );
        let _ = writeln!(s, "phi = {:?}", self.dgp.phi);
        let _ = writeln!(s, "n_units = {}", self.dgp.n_units);
        let _ = writeln!(s, "beta_p = {:?}", self.dgp.beta_p);
        let _ = writeln!(s, "beta_on_alpha = {}", self.dgp.beta_on_alpha);
        let _ = writeln!(s, "burn_in = {}", self.dgp.burn_in);
        let _ = writeln!(s, "innovation_sd = {:?}", self.dgp.innovation_sd);
        let _ = writeln!(s, "t = {}", self.t);
        let _ = writeln!(
            s,
            "horizons = [{}]",
            list(&self.horizons.iter().map(|h| h.to_string()).collect::<Vec<_>>())
        );
        let _ = writeln!(s, "replications = {}", self.replications);
        let _ = writeln!(
            s,
            "models = [{}]",
            list(&self.model_set.iter().map(|m| format!("\"{m}\"")).collect::<Vec<_>>())
        );
        let _ = writeln!(s, "loss = \"{}\"", self.loss_kind);
        let _ = writeln!(s, "statistic = \"{}\"", self.statistic);
        let _ = writeln!(s, "alpha = {:?}", self.alpha);
        let _ = writeln!(s, "seed = {}", self.master_seed);
        let _ = writeln!(s, "workers = {}", self.workers);
        let _ = writeln!(s, "boot_replications = {}", self.boot_replications);
        if let Some(b) = self.block_length {
            let _ = writeln!(s, "block_length = {b}");
        }
        s
    }
}

/// Keys accepted by [`ExperimentConfig::from_toml`].
pub const CONFIG_KEYS: &[&str] = &[
    "dgp",
    "d",
    "d_grid",
    "phi",
    "n_units",
    "beta_p",
    "beta_on_alpha",
    "burn_in",
    "innovation_sd",
    "t",
    "horizons",
    "replications",
    "models",
    "model_set",
    "loss",
    "statistic",
    "alpha",
    "seed",
    "workers",
    "boot_replications",
    "block_length",
];

#[derive(Debug, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    dgp: String,
    d: Option<f64>,
    d_grid: Option<Vec<f64>>,
    phi: Option<f64>,
    n_units: Option<usize>,
    beta_p: Option<f64>,
    beta_on_alpha: Option<bool>,
    burn_in: Option<usize>,
    innovation_sd: Option<f64>,
    t: Option<usize>,
    horizons: Option<Vec<usize>>,
    replications: Option<usize>,
    models: Option<Vec<String>>,
    model_set: Option<String>,
    loss: Option<String>,
    statistic: Option<String>,
    alpha: Option<f64>,
    seed: Option<u64>,
    workers: Option<usize>,
    boot_replications: Option<usize>,
    block_length: Option<usize>,
}

impl RawConfig {
    fn resolve(self) -> Result<ExperimentConfig> {
        let kind: DgpKind = self.dgp.parse()?;
        let d_grid = match (self.d, self.d_grid) {
            (Some(_), Some(_)) => return Err(Error::Config("give either d or d_grid, not both".into())),
            (Some(d), None) => vec![d],
            (None, Some(g)) => g,
            (None, None) => DEFAULT_D_GRID.to_vec(),
        };
        let mut dgp = DgpSpec::default_for(kind, d_grid[0]);
        if let Some(v) = self.phi {
            dgp.phi = v;
        }
        if let Some(v) = self.n_units {
            dgp.n_units = v;
        }
        if let Some(v) = self.beta_p {
            dgp.beta_p = v;
        }
        if let Some(v) = self.beta_on_alpha {
            dgp.beta_on_alpha = v;
        }
        if let Some(v) = self.burn_in {
            dgp.burn_in = v;
        }
        if let Some(v) = self.innovation_sd {
            dgp.innovation_sd = v;
        }
        let mut cfg = ExperimentConfig::new(dgp);
        cfg.d_grid = d_grid;
        if let Some(v) = self.t {
            cfg.t = v;
        }
        if let Some(v) = self.horizons {
            cfg.horizons = v;
        }
        if let Some(v) = self.replications {
            cfg.replications = v;
        }
        match (self.models, self.model_set) {
            (Some(_), Some(_)) => return Err(Error::Config("give either models or model_set, not both".into())),
            (Some(list), None) => {
                cfg.model_set = list.iter().map(|s| s.parse()).collect::<Result<Vec<_>>>()?;
            }
            (None, Some(name)) => {
                cfg.model_set = match name.as_str() {
                    "default" => default_model_set(),
                    "har-comparison" => har_comparison_set(),
                    other => return Err(Error::Config(format!("unknown model_set '{other}'"))),
                }
            }
            (None, None) => {}
        }
        if let Some(v) = self.loss {
            cfg.loss_kind = v.parse()?;
        }
        if let Some(v) = self.statistic {
            cfg.statistic = v.parse()?;
        }
        if let Some(v) = self.alpha {
            cfg.alpha = v;
        }
        if let Some(v) = self.seed {
            cfg.master_seed = v;
        }
        if let Some(v) = self.workers {
            cfg.workers = v;
        }
        if let Some(v) = self.boot_replications {
            cfg.boot_replications = v;
        }
        cfg.block_length = self.block_length;
        cfg.validate()?;
        Ok(cfg)
    }
}

/// A model that failed in one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct FailureRecord {
    pub replication: usize,
    pub model: String,
    pub message: String,
}

/// Aggregates for one memory value. Matrices are indexed `[model][horizon]`.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentResult {
    pub config: ExperimentConfig,
    pub d: f64,
    pub models: Vec<String>,
    pub horizons: Vec<usize>,
    /// Share of the R replications in which the model is in the MCS.
    pub inclusion: Vec<Vec<f64>>,
    /// Mean over successful replications of the per-replication RMSE.
    pub mean_rmse: Vec<Vec<f64>>,
    /// Mean over successful replications of the per-replication RMAD.
    pub mean_rmad: Vec<Vec<f64>>,
    /// Replications in which each model produced a forecast.
    pub successes: Vec<usize>,
    pub failures: Vec<FailureRecord>,
    pub replications: usize,
}

impl ExperimentResult {
    pub fn model_index(&self, label: &str) -> Option<usize> {
        self.models.iter().position(|m| m == label)
    }

    pub fn horizon_index(&self, h: usize) -> Option<usize> {
        self.horizons.iter().position(|&x| x == h)
    }

    pub fn inclusion_of(&self, label: &str, h: usize) -> Option<f64> {
        Some(self.inclusion[self.model_index(label)?][self.horizon_index(h)?])
    }

    pub fn rmad_of(&self, label: &str, h: usize) -> Option<f64> {
        Some(self.mean_rmad[self.model_index(label)?][self.horizon_index(h)?])
    }

    pub fn rmse_of(&self, label: &str, h: usize) -> Option<f64> {
        Some(self.mean_rmse[self.model_index(label)?][self.horizon_index(h)?])
    }

    /// Mean of the square-root loss matching the configured loss kind.
    pub fn summary_matrix(&self) -> &[Vec<f64>] {
        match self.config.loss_kind {
            LossKind::Sq => &self.mean_rmse,
            LossKind::Ad => &self.mean_rmad,
        }
    }
}

/// Per-model forecasts to the longest horizon, or the failure message.
pub type ForecastSet = Vec<std::result::Result<Vec<f64>, String>>;

/// Fits every model on `estimation` and forecasts `h_max` steps.
pub fn fit_and_forecast(estimation: &TimeSeries, models: &[ModelSpec], h_max: usize) -> ForecastSet {
    models
        .iter()
        .map(|spec| {
            fit(estimation, spec)
                .and_then(|m| forecast(&m, estimation, h_max))
                .map(|p| p.values)
                .map_err(|e| e.to_string())
        })
        .collect()
}

/// Scores one forecast origin: per horizon, RMSE and RMAD of every
/// successful model and MCS membership. Models that failed are absent from
/// the panel; a single surviving model is included by default.
pub(crate) struct OriginScore {
    /// `[model][horizon]`
    pub included: Vec<Vec<bool>>,
    pub rmse: Vec<Vec<Option<f64>>>,
    pub rmad: Vec<Vec<Option<f64>>>,
    pub mcs_errors: Vec<String>,
}

#[allow(clippy::too_many_arguments)]
pub(crate) fn score_origin(
    labels: &[String],
    forecasts: &ForecastSet,
    actuals: &[f64],
    horizons: &[usize],
    loss_kind: LossKind,
    statistic: Statistic,
    alpha: f64,
    boot: &dyn Fn(usize) -> BootstrapConfig,
) -> OriginScore {
    let m = labels.len();
    let nh = horizons.len();
    let mut out = OriginScore {
        included: vec![vec![false; nh]; m],
        rmse: vec![vec![None; nh]; m],
        rmad: vec![vec![None; nh]; m],
        mcs_errors: Vec::new(),
    };
    let ok: Vec<usize> = (0..m).filter(|&i| forecasts[i].is_ok()).collect();
    for (k, &h) in horizons.iter().enumerate() {
        let mut columns = Vec::with_capacity(ok.len());
        for &i in &ok {
            let f = forecasts[i].as_ref().expect("filtered");
            let se: f64 = (0..h).map(|s| (actuals[s] - f[s]).powi(2)).sum::<f64>() / h as f64;
            let ad: f64 = (0..h).map(|s| (actuals[s] - f[s]).abs()).sum::<f64>() / h as f64;
            out.rmse[i][k] = Some(se.sqrt());
            out.rmad[i][k] = Some(ad.sqrt());
            columns.push(
                (0..h)
                    .map(|s| loss(actuals[s], f[s], loss_kind).unwrap_or(f64::NAN))
                    .collect::<Vec<f64>>(),
            );
        }
        match ok.len() {
            0 => {}
            1 => out.included[ok[0]][k] = true,
            _ => {
                let ids: Vec<String> = ok.iter().map(|&i| labels[i].clone()).collect();
                let res = LossPanel::from_columns(ids, columns, loss_kind)
                    .and_then(|panel| mcs(&panel, statistic, alpha, &boot(k)));
                match res {
                    Ok(r) => {
                        for &i in &ok {
                            out.included[i][k] = r.contains(&labels[i]);
                        }
                    }
                    Err(e) => out.mcs_errors.push(format!("h={h}: {e}")),
                }
            }
        }
    }
    out
}

struct Replication {
    score: OriginScore,
    failures: Vec<FailureRecord>,
}

fn replicate(config: &ExperimentConfig, dgp: &DgpSpec, labels: &[String], r: usize) -> Replication {
    let rep_seed = derive_seed(config.master_seed, r as u64);
    let h_max = config.max_horizon();
    let path = match simulate(dgp, config.t + h_max, derive_seed(rep_seed, 0)) {
        Ok(p) => p.series,
        Err(e) => {
            let nh = config.horizons.len();
            let m = labels.len();
            return Replication {
                score: OriginScore {
                    included: vec![vec![false; nh]; m],
                    rmse: vec![vec![None; nh]; m],
                    rmad: vec![vec![None; nh]; m],
                    mcs_errors: vec![],
                },
                failures: vec![FailureRecord {
                    replication: r,
                    model: "*".into(),
                    message: format!("simulation: {e}"),
                }],
            };
        }
    };
    let estimation = path.head(config.t);
    let actuals = &path.values()[config.t..];
    let forecasts = fit_and_forecast(&estimation, &config.model_set, h_max);
    let mut failures: Vec<FailureRecord> = forecasts
        .iter()
        .zip(labels)
        .filter_map(|(f, l)| {
            f.as_ref().err().map(|msg| FailureRecord {
                replication: r,
                model: l.clone(),
                message: msg.clone(),
            })
        })
        .collect();
    let boot = |k: usize| BootstrapConfig {
        replications: config.boot_replications,
        block_length: config.block_length,
        seed: derive_seed(rep_seed, 1 + k as u64),
    };
    let score = score_origin(
        labels,
        &forecasts,
        actuals,
        &config.horizons,
        config.loss_kind,
        config.statistic,
        config.alpha,
        &boot,
    );
    failures.extend(score.mcs_errors.iter().map(|e| FailureRecord {
        replication: r,
        model: "MCS".into(),
        message: e.clone(),
    }));
    Replication { score, failures }
}

pub(crate) fn with_workers<T: Send>(workers: usize, job: impl FnOnce() -> T + Send) -> Result<T> {
    if workers == 0 {
        return Ok(job());
    }
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers)
        .build()
        .map_err(|e| Error::Config(format!("cannot start {workers} workers: {e}")))?;
    Ok(pool.install(job))
}

/// Runs the protocol at `config.dgp.d`.
pub fn run_experiment(config: &ExperimentConfig) -> Result<ExperimentResult> {
    config.validate()?;
    let dgp = config.dgp.clone();
    let labels: Vec<String> = config.model_set.iter().map(|m| m.to_string()).collect();
    let reps: Vec<Replication> = with_workers(config.workers, || {
        (0..config.replications)
            .into_par_iter()
            .map(|r| replicate(config, &dgp, &labels, r))
            .collect()
    })?;
    Ok(aggregate(config, dgp.d, labels, reps))
}

fn aggregate(config: &ExperimentConfig, d: f64, labels: Vec<String>, reps: Vec<Replication>) -> ExperimentResult {
    let m = labels.len();
    let nh = config.horizons.len();
    let mut incl = vec![vec![0usize; nh]; m];
    let mut se_sum = vec![vec![0.0; nh]; m];
    let mut ad_sum = vec![vec![0.0; nh]; m];
    let mut cnt = vec![vec![0usize; nh]; m];
    let mut successes = vec![0usize; m];
    let mut failures = Vec::new();
    for rep in reps {
        for i in 0..m {
            if rep.score.rmse[i][0].is_some() {
                successes[i] += 1;
            }
            for k in 0..nh {
                if rep.score.included[i][k] {
                    incl[i][k] += 1;
                }
                if let (Some(a), Some(b)) = (rep.score.rmse[i][k], rep.score.rmad[i][k]) {
                    se_sum[i][k] += a;
                    ad_sum[i][k] += b;
                    cnt[i][k] += 1;
                }
            }
        }
        failures.extend(rep.failures);
    }
    let r = config.replications as f64;
    let mean = |s: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| {
                (0..nh)
                    .map(|k| if cnt[i][k] > 0 { s[i][k] / cnt[i][k] as f64 } else { f64::NAN })
                    .collect()
            })
            .collect()
    };
    ExperimentResult {
        config: config.clone(),
        d,
        inclusion: incl
            .iter()
            .map(|row| row.iter().map(|&c| c as f64 / r).collect())
            .collect(),
        mean_rmse: mean(&se_sum),
        mean_rmad: mean(&ad_sum),
        models: labels,
        horizons: config.horizons.clone(),
        successes,
        failures,
        replications: config.replications,
    }
}

/// Runs the protocol at every value of `config.d_grid`, reusing the master
/// seed at each grid point.
pub fn run_grid(config: &ExperimentConfig) -> Result<Vec<ExperimentResult>> {
    config.validate()?;
    config
        .d_grid
        .iter()
        .map(|&d| {
            let cfg = ExperimentConfig {
                dgp: DgpSpec { d, ..config.dgp.clone() },
                d_grid: vec![d],
                ..config.clone()
            };
            run_experiment(&cfg)
        })
        .collect()
}

/// The protocol with the six-model constrained-versus-unconstrained set:
/// HAR(3), AR(22), HAR(4), AR(50), FI(d), I(1).
pub fn run_har_comparison(config: &ExperimentConfig) -> Result<ExperimentResult> {
    let cfg = ExperimentConfig {
        model_set: har_comparison_set(),
        ..config.clone()
    };
    run_experiment(&cfg)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum TableLayout {
    /// One row per model; for each horizon the mean root loss then the MCS
    /// inclusion rate, three decimals.
    PaperTable,
    /// Long format `model,horizon,metric,value`, 17 significant digits.
    TidyCsv,
}

/// Number formatting for tidy outputs: 17 significant digits, scientific.
pub fn format_sig17(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.16e}")
    } else {
        "NaN".to_string()
    }
}

fn format_short(v: f64) -> String {
    if v.is_finite() {
        format!("{v:.3}")
    } else {
        "NA".to_string()
    }
}

/// Renders a result as CSV text.
pub fn render_table(result: &ExperimentResult, layout: TableLayout) -> Result<String> {
    if result.horizons.is_empty() {
        return Err(Error::Contract("result has no horizons".into()));
    }
    let mut s = String::new();
    let root = match result.config.loss_kind {
        LossKind::Ad => "RMAD",
        LossKind::Sq => "RMSE",
    };
    match layout {
        TableLayout::PaperTable => {
            s.push_str("model");
            for h in &result.horizons {
                let _ = write!(s, ",{root}_h{h},MCS_h{h}");
            }
            s.push('\n');
            let summary = result.summary_matrix();
            for (i, label) in result.models.iter().enumerate() {
                s.push_str(&csv_field(label));
                for k in 0..result.horizons.len() {
                    let _ = write!(
                        s,
                        ",{},{}",
                        format_short(summary[i][k]),
                        format_short(result.inclusion[i][k])
                    );
                }
                s.push('\n');
            }
        }
        TableLayout::TidyCsv => {
            s.push_str("model,horizon,metric,value\n");
            for (i, label) in result.models.iter().enumerate() {
                for (k, h) in result.horizons.iter().enumerate() {
                    let l = csv_field(label);
                    let _ = writeln!(s, "{l},{h},mcs_inclusion,{}", format_sig17(result.inclusion[i][k]));
                    let _ = writeln!(s, "{l},{h},mean_rmse,{}", format_sig17(result.mean_rmse[i][k]));
                    let _ = writeln!(s, "{l},{h},mean_rmad,{}", format_sig17(result.mean_rmad[i][k]));
                }
            }
        }
    }
    Ok(s)
}

fn csv_field(s: &str) -> String {
    if s.contains([',', '"']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

/// Writes the table to `path`, returning the path written.
pub fn emit_tables(result: &ExperimentResult, layout: TableLayout, path: &Path) -> Result<PathBuf> {
    let text = render_table(result, layout)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))?;
    Ok(path.to_path_buf())
}

/// Failure log as CSV `replication,model,message`.
pub fn render_failures(result: &ExperimentResult) -> String {
    let mut s = String::from("replication,model,message\n");
    for f in &result.failures {
        let _ = writeln!(s, "{},{},{}", f.replication, csv_field(&f.model), csv_field(&f.message));
    }
    s
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(models: Vec<ModelSpec>) -> ExperimentConfig {
        ExperimentConfig {
            t: 200,
            horizons: vec![5, 20],
            replications: 3,
            model_set: models,
            boot_replications: 500,
            master_seed: 11,
            ..ExperimentConfig::new(DgpSpec::arfima(0.3, 0.2))
        }
    }

    #[test]
    fn singleton_model_always_included() {
        let r = run_experiment(&small(vec![ModelSpec::random_walk()])).unwrap();
        assert!(r.inclusion[0].iter().all(|&v| v == 1.0));
        let table = render_table(&r, TableLayout::PaperTable).unwrap();
        assert_eq!(table.lines().count(), 2);
        assert_eq!(table.lines().next().unwrap(), "model,RMAD_h5,MCS_h5,RMAD_h20,MCS_h20");
    }

    #[test]
    fn deterministic_and_worker_independent() {
        let mut cfg = small(vec![ModelSpec::ar(2), ModelSpec::har(&HAR), ModelSpec::random_walk()]);
        cfg.workers = 1;
        let a = run_experiment(&cfg).unwrap();
        cfg.workers = 3;
        let b = run_experiment(&cfg).unwrap();
        assert_eq!(a, ExperimentResult { config: a.config.clone(), ..b });
        for k in 0..2 {
            assert!((0..3).any(|i| a.inclusion[i][k] > 0.0));
        }
    }

    const HAR: [usize; 2] = [1, 5];

    #[test]
    fn config_round_trip_and_errors() {
        let text = "dgp = \"csa\"\nd = 0.3\nt = 500\nhorizons = [5, 10]\nreplications = 7\nmodels = [\"FI(d)\", \"I(1)\"]\nloss = \"sq\"\nstatistic = \"sq\"\nseed = 5\n";
        let cfg = ExperimentConfig::from_toml(text).unwrap();
        assert_eq!(cfg.dgp.kind, DgpKind::CrossSectionalAggregation);
        assert_eq!(cfg.dgp.n_units, 10_000);
        assert_eq!(cfg.loss_kind, LossKind::Sq);
        assert_eq!(ExperimentConfig::from_toml(&cfg.to_toml()).unwrap(), cfg);
        assert!(ExperimentConfig::from_toml("dgp = \"arfima\"\nbogus = 1\n").is_err());
        assert!(ExperimentConfig::from_toml("dgp = \"arfima\"\nhorizons = []\n").is_err());
        assert!(ExperimentConfig::from_toml("dgp = \"arfima\"\nt = 100\n").is_err());
        let grid = ExperimentConfig::from_toml("dgp = \"edm\"\n").unwrap();
        assert_eq!(grid.d_grid, DEFAULT_D_GRID.to_vec());
    }

    #[test]
    fn empty_horizons_cannot_render() {
        let mut r = run_experiment(&small(vec![ModelSpec::random_walk()])).unwrap();
        r.horizons.clear();
        assert!(render_table(&r, TableLayout::TidyCsv).is_err());
    }
}
