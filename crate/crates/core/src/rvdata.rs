//! Realized-variance input and the expanding-window forecasting study.
//!
//! Input is a CSV with a `date` column (ISO `YYYY-MM-DD`) and a named RV
//! column. The study fits every model on data from the first observation up
//! to each window end, forecasts the configured horizons, and runs the MCS
//! per (window, horizon).

use std::path::Path;

use chrono::NaiveDate;
use rayon::prelude::*;
use serde::Deserialize;

use crate::error::{Error, Result};
use crate::forecast::LossKind;
use crate::harness::{fit_and_forecast, score_origin, with_workers, FailureRecord};
use crate::mcs::{BootstrapConfig, Statistic, DEFAULT_REPLICATIONS};
use crate::models::{default_model_set, Family, ModelSpec};
use crate::rng::derive_seed;
use crate::series::TimeSeries;

/// Trading-day horizons of the study.
pub const RV_HORIZONS: [usize; 6] = [5, 10, 22, 66, 120, 254];

/// A cleaned daily realized-variance series.
#[derive(Debug, Clone, PartialEq)]
pub struct RvSeries {
    pub dates: Vec<NaiveDate>,
    pub rv: Vec<f64>,
    pub source: String,
    /// Rows removed because the RV value was missing, non-finite or negative.
    pub dropped: usize,
}

impl RvSeries {
    /// Builds a series directly; dates must be strictly increasing and values
    /// finite and non-negative.
    pub fn new(dates: Vec<NaiveDate>, rv: Vec<f64>, source: impl Into<String>) -> Result<Self> {
        if dates.len() != rv.len() {
            return Err(Error::Contract(format!("{} dates but {} values", dates.len(), rv.len())));
        }
        if rv.is_empty() {
            return Err(Error::Data("empty realized-variance series".into()));
        }
        if let Some(w) = dates.windows(2).find(|w| w[1] <= w[0]) {
            return Err(Error::Data(format!("dates not strictly increasing at {}", w[1])));
        }
        if let Some(v) = rv.iter().find(|v| !v.is_finite() || **v < 0.0) {
            return Err(Error::Data(format!("invalid realized variance {v}")));
        }
        Ok(Self {
            dates,
            rv,
            source: source.into(),
            dropped: 0,
        })
    }

    pub fn len(&self) -> usize {
        self.rv.len()
    }

    pub fn is_empty(&self) -> bool {
        self.rv.is_empty()
    }

    /// Index of the last observation dated on or before `date`.
    pub fn index_on_or_before(&self, date: NaiveDate) -> Option<usize> {
        match self.dates.binary_search(&date) {
            Ok(i) => Some(i),
            Err(0) => None,
            Err(i) => Some(i - 1),
        }
    }

    /// The series as a dated [`TimeSeries`], optionally in logs. Zero values
    /// cannot be logged.
    pub fn to_series(&self, log: bool) -> Result<TimeSeries> {
        let values = if log {
            self.rv
                .iter()
                .map(|&v| {
                    if v > 0.0 {
                        Ok(v.ln())
                    } else {
                        Err(Error::Data("log transform of a zero realized variance".into()))
                    }
                })
                .collect::<Result<Vec<f64>>>()?
        } else {
            self.rv.clone()
        };
        Ok(TimeSeries::with_timestamps(values, self.dates.clone())?.with_meta("source", &self.source))
    }
}

fn parse_date(s: &str) -> Option<NaiveDate> {
    let s = s.trim();
    // Accept timestamps such as "2000-01-03 00:00:00+01:00" by their date part.
    let head = s.get(..10).unwrap_or(s);
    NaiveDate::parse_from_str(head, "%Y-%m-%d").ok()
}

/// Parses RV CSV text. The date column is `date` (case-insensitive) or the
/// first column. Rows whose RV is empty, non-numeric, non-finite or negative
/// are dropped and counted; an unparseable date is an error.
pub fn parse_rv(text: &str, column: &str, source: &str) -> Result<RvSeries> {
    let body: String = text
        .lines()
        .filter(|l| !l.trim_start().starts_with('#'))
        .map(|l| format!("{l}\n"))
        .collect();
    let mut rdr = csv::ReaderBuilder::new()
        .trim(csv::Trim::All)
        .flexible(true)
        .from_reader(body.as_bytes());
    let headers = rdr.headers().map_err(|e| Error::Data(e.to_string()))?.clone();
    let names: Vec<&str> = headers.iter().collect();
    let col = names.iter().position(|h| *h == column).ok_or_else(|| {
        Error::Data(format!("column '{column}' not found; available: {}", names.join(", ")))
    })?;
    let date_col = names
        .iter()
        .position(|h| h.eq_ignore_ascii_case("date"))
        .unwrap_or(0);
    if date_col == col {
        return Err(Error::Data(format!("column '{column}' is the date column")));
    }
    let mut rows: Vec<(NaiveDate, f64)> = Vec::new();
    let mut dropped = 0;
    for (i, rec) in rdr.records().enumerate() {
        let rec = rec.map_err(|e| Error::Data(e.to_string()))?;
        let raw = rec.get(date_col).unwrap_or("");
        let date = parse_date(raw)
            .ok_or_else(|| Error::Data(format!("row {}: unparseable date '{raw}'", i + 1)))?;
        match rec.get(col).and_then(|f| f.parse::<f64>().ok()) {
            Some(v) if v.is_finite() && v >= 0.0 => rows.push((date, v)),
            _ => dropped += 1,
        }
    }
    if rows.is_empty() {
        return Err(Error::Data("no valid realized-variance rows".into()));
    }
    rows.sort_by_key(|r| r.0);
    if let Some(w) = rows.windows(2).find(|w| w[0].0 == w[1].0) {
        return Err(Error::Data(format!("duplicate date {}", w[0].0)));
    }
    let (dates, rv) = rows.into_iter().unzip();
    let mut out = RvSeries::new(dates, rv, source)?;
    out.dropped = dropped;
    Ok(out)
}

/// Reads and validates an RV file.
pub fn load_rv(path: &Path, column: &str) -> Result<RvSeries> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_rv(&text, column, &path.display().to_string())
}

/// Coarse model groups used when pooling inclusion across windows.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ModelGroup {
    /// FI and ARFIMA specifications.
    LongMemory,
    /// ARMA, AR and HAR specifications.
    ShortMemory,
    /// The no-change forecast.
    NoChange,
}

impl ModelGroup {
    pub fn of(spec: &ModelSpec) -> Self {
        match spec.family {
            Family::Fi | Family::Arfima => ModelGroup::LongMemory,
            Family::Arma | Family::Ar | Family::Har => ModelGroup::ShortMemory,
            Family::RandomWalk => ModelGroup::NoChange,
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ModelGroup::LongMemory => "ARFIMA",
            ModelGroup::ShortMemory => "ARMA",
            ModelGroup::NoChange => "I(1)",
        }
    }

    pub const ALL: [ModelGroup; 3] = [ModelGroup::LongMemory, ModelGroup::ShortMemory, ModelGroup::NoChange];
}

/// The default RV model set: the full simulation set without ARFIMA(2,d,1).
pub fn rv_model_set() -> Vec<ModelSpec> {
    default_model_set()
        .into_iter()
        .filter(|m| !(m.family == Family::Arfima && m.p == 2 && m.q == 1))
        .collect()
}

#[derive(Debug, Clone, PartialEq)]
pub struct WindowStudyConfig {
    /// Last date of the first estimation sample.
    pub first_window_end: NaiveDate,
    /// Last date of the final estimation sample; windows advance one trading
    /// day at a time between the two.
    pub last_window_end: NaiveDate,
    pub horizons: Vec<usize>,
    pub model_set: Vec<ModelSpec>,
    pub loss_kind: LossKind,
    pub statistic: Statistic,
    pub alpha: f64,
    /// Model log RV instead of levels.
    pub log: bool,
    pub boot_replications: usize,
    pub block_length: Option<usize>,
    pub seed: u64,
    /// 0 runs on the calling thread.
    pub workers: usize,
}

impl WindowStudyConfig {
    pub fn new(first_window_end: NaiveDate, last_window_end: NaiveDate) -> Self {
        Self {
            first_window_end,
            last_window_end,
            horizons: RV_HORIZONS.to_vec(),
            model_set: rv_model_set(),
            loss_kind: LossKind::Ad,
            statistic: Statistic::Range,
            alpha: 0.05,
            log: false,
            boot_replications: DEFAULT_REPLICATIONS,
            block_length: None,
            seed: 0,
            workers: 0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.last_window_end < self.first_window_end {
            return Err(Error::Config("last window end precedes the first".into()));
        }
        if self.horizons.is_empty() || self.horizons[0] == 0 {
            return Err(Error::Config("horizons must be non-empty and positive".into()));
        }
        if self.horizons.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::Config("horizons must be strictly increasing".into()));
        }
        if self.model_set.is_empty() {
            return Err(Error::Config("empty model set".into()));
        }
        for m in &self.model_set {
            m.validate()?;
        }
        if !(self.alpha > 0.0 && self.alpha < 1.0) {
            return Err(Error::Config(format!("alpha must lie in (0,1), got {}", self.alpha)));
        }
        Ok(())
    }

    /// Parses a TOML config. Keys: `first_window_end`, `last_window_end`
    /// (ISO dates, required), `horizons`, `models`, `loss`, `statistic`,
    /// `alpha`, `log`, `boot_replications`, `block_length`, `seed`, `workers`.
    pub fn from_toml(text: &str) -> Result<Self> {
        let raw: RawWindowConfig = toml::from_str(text).map_err(|e| Error::Config(e.to_string()))?;
        let date = |s: &str| {
            parse_date(s).ok_or_else(|| Error::Config(format!("cannot parse date '{s}'")))
        };
        let mut cfg = WindowStudyConfig::new(date(&raw.first_window_end)?, date(&raw.last_window_end)?);
        if let Some(h) = raw.horizons {
            cfg.horizons = h;
        }
        if let Some(models) = raw.models {
            cfg.model_set = models
                .iter()
                .map(|s| s.parse::<ModelSpec>())
                .collect::<Result<Vec<_>>>()?;
        }
        if let Some(l) = raw.loss {
            cfg.loss_kind = l.parse()?;
        }
        if let Some(s) = raw.statistic {
            cfg.statistic = s.parse()?;
        }
        if let Some(a) = raw.alpha {
            cfg.alpha = a;
        }
        if let Some(l) = raw.log {
            cfg.log = l;
        }
        if let Some(b) = raw.boot_replications {
            cfg.boot_replications = b;
        }
        cfg.block_length = raw.block_length.or(cfg.block_length);
        if let Some(s) = raw.seed {
            cfg.seed = s;
        }
        if let Some(w) = raw.workers {
            cfg.workers = w;
        }
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn to_toml(&self) -> String {
        let models: Vec<String> = self.model_set.iter().map(|m| format!("\"{m}\"")).collect();
        let horizons: Vec<String> = self.horizons.iter().map(|h| h.to_string()).collect();
        let mut s = format!(
            "first_window_end = \"{}\"\nlast_window_end = \"{}\"\nhorizons = [{}]\nmodels = [{}]\n\
             loss = \"{}\"\nstatistic = \"{}\"\nalpha = {}\nlog = {}\nboot_replications = {}\nseed = {}\nworkers = {}\n",
            self.first_window_end,
            self.last_window_end,
            horizons.join(", "),
            models.join(", "),
            self.loss_kind,
            self.statistic,
            self.alpha,
            self.log,
            self.boot_replications,
            self.seed,
            self.workers
        );
        if let Some(b) = self.block_length {
            s.push_str(&format!("block_length = {b}\n"));
        }
        s
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawWindowConfig {
    first_window_end: String,
    last_window_end: String,
    horizons: Option<Vec<usize>>,
    models: Option<Vec<String>>,
    loss: Option<String>,
    statistic: Option<String>,
    alpha: Option<f64>,
    log: Option<bool>,
    boot_replications: Option<usize>,
    block_length: Option<usize>,
    seed: Option<u64>,
    workers: Option<usize>,
}

/// Per-window outcome.
#[derive(Debug, Clone, PartialEq)]
pub struct WindowDetail {
    pub window_end: NaiveDate,
    /// Observations in the estimation sample.
    pub n_obs: usize,
    /// `[model][horizon]`; `None` when the model failed in this window.
    pub rmad: Vec<Vec<Option<f64>>>,
    pub rmse: Vec<Vec<Option<f64>>>,
    /// `[model][horizon]`
    pub included: Vec<Vec<bool>>,
    /// `[model]` forecast path to the longest horizon, in the modelled
    /// scale; `None` when the model failed.
    pub forecasts: Vec<Option<Vec<f64>>>,
}

#[derive(Debug, Clone)]
pub struct WindowStudyResult {
    pub config: WindowStudyConfig,
    pub models: Vec<String>,
    pub horizons: Vec<usize>,
    pub n_windows: usize,
    /// `[model][horizon]` share of windows in which the model is in the MCS.
    pub inclusion: Vec<Vec<f64>>,
    /// `[group][horizon]` in [`ModelGroup::ALL`] order: per window, the
    /// fraction of MCS members that belong to the group, averaged over
    /// windows. Columns sum to one.
    pub group_inclusion: Vec<Vec<f64>>,
    pub mean_rmad: Vec<Vec<f64>>,
    pub mean_rmse: Vec<Vec<f64>>,
    /// Every window in order; the first is the single-window detail.
    pub windows: Vec<WindowDetail>,
    /// `replication` holds the window index.
    pub failures: Vec<FailureRecord>,
}

impl WindowStudyResult {
    pub fn first_window(&self) -> &WindowDetail {
        &self.windows[0]
    }

    pub fn group_inclusion_of(&self, group: ModelGroup, h: usize) -> Option<f64> {
        let g = ModelGroup::ALL.iter().position(|&x| x == group)?;
        let k = self.horizons.iter().position(|&x| x == h)?;
        Some(self.group_inclusion[g][k])
    }

    /// CSV: `group,h_5,h_10,...` with group inclusion shares.
    pub fn render_groups(&self) -> String {
        let mut s = String::from("group");
        for h in &self.horizons {
            s.push_str(&format!(",h_{h}"));
        }
        s.push('\n');
        for (g, row) in ModelGroup::ALL.iter().zip(&self.group_inclusion) {
            s.push_str(g.label());
            for v in row {
                s.push_str(&format!(",{v:.3}"));
            }
            s.push('\n');
        }
        s
    }

    /// CSV of the first window: `model,RMAD_h5,MCS_h5,...`.
    pub fn render_first_window(&self) -> String {
        let mut s = String::from("model");
        for h in &self.horizons {
            s.push_str(&format!(",RMAD_h{h},MCS_h{h}"));
        }
        s.push('\n');
        let w = self.first_window();
        for (i, label) in self.models.iter().enumerate() {
            s.push_str(&format!("\"{label}\""));
            for k in 0..self.horizons.len() {
                match w.rmad[i][k] {
                    Some(v) => s.push_str(&format!(",{v:.4}")),
                    None => s.push_str(",NA"),
                }
                s.push_str(if w.included[i][k] { ",1" } else { ",0" });
            }
            s.push('\n');
        }
        s
    }
}

/// Runs the expanding-window study. Window `w` estimates on observations
/// `0..=end_w` and is scored on `end_w+1 ..= end_w+h`; nothing after `end_w`
/// reaches the fit.
pub fn run_window_study(series: &RvSeries, config: &WindowStudyConfig) -> Result<WindowStudyResult> {
    config.validate()?;
    let first = series.index_on_or_before(config.first_window_end).ok_or_else(|| {
        Error::Config(format!("first window end {} precedes the sample", config.first_window_end))
    })?;
    let last = series
        .index_on_or_before(config.last_window_end)
        .expect("last end is not before first end");
    let h_max = *config.horizons.last().expect("validated");
    if last + h_max >= series.len() {
        return Err(Error::Config(format!(
            "the last window ending {} needs {h_max} further observations, only {} available",
            series.dates[last],
            series.len() - 1 - last
        )));
    }
    let full = series.to_series(config.log)?;
    let labels: Vec<String> = config.model_set.iter().map(|m| m.to_string()).collect();
    let groups: Vec<ModelGroup> = config.model_set.iter().map(ModelGroup::of).collect();
    let ends: Vec<usize> = (first..=last).collect();

    let run_window = |w: usize, end: usize| -> (WindowDetail, Vec<FailureRecord>) {
        let estimation = full.head(end + 1);
        let actuals = &full.values()[end + 1..=end + h_max];
        let forecasts = fit_and_forecast(&estimation, &config.model_set, h_max);
        let mut failures: Vec<FailureRecord> = forecasts
            .iter()
            .zip(&labels)
            .filter_map(|(f, l)| {
                f.as_ref().err().map(|msg| FailureRecord {
                    replication: w,
                    model: l.clone(),
                    message: msg.clone(),
                })
            })
            .collect();
        let window_seed = derive_seed(config.seed, w as u64);
        let boot = |k: usize| BootstrapConfig {
            replications: config.boot_replications,
            block_length: config.block_length,
            seed: derive_seed(window_seed, k as u64),
        };
        let score = score_origin(
            &labels,
            &forecasts,
            actuals,
            &config.horizons,
            config.loss_kind,
            config.statistic,
            config.alpha,
            &boot,
        );
        failures.extend(score.mcs_errors.iter().map(|e| FailureRecord {
            replication: w,
            model: "MCS".into(),
            message: e.clone(),
        }));
        let detail = WindowDetail {
            window_end: series.dates[end],
            n_obs: end + 1,
            rmad: score.rmad,
            rmse: score.rmse,
            included: score.included,
            forecasts: forecasts.into_iter().map(|f| f.ok()).collect(),
        };
        (detail, failures)
    };

    let windows: Vec<(WindowDetail, Vec<FailureRecord>)> = with_workers(config.workers, || {
        ends.par_iter()
            .enumerate()
            .map(|(w, &end)| run_window(w, end))
            .collect()
    })?;

    let m = labels.len();
    let nh = config.horizons.len();
    let nw = windows.len() as f64;
    let mut inclusion = vec![vec![0.0; nh]; m];
    let mut group_inclusion = vec![vec![0.0; nh]; ModelGroup::ALL.len()];
    let mut sums = [vec![vec![0.0; nh]; m], vec![vec![0.0; nh]; m]];
    let mut counts = vec![vec![0usize; nh]; m];
    let mut failures = Vec::new();
    for (detail, fails) in &windows {
        for k in 0..nh {
            let members: Vec<usize> = (0..m).filter(|&i| detail.included[i][k]).collect();
            for &i in &members {
                inclusion[i][k] += 1.0 / nw;
                let g = ModelGroup::ALL.iter().position(|&x| x == groups[i]).expect("known group");
                group_inclusion[g][k] += 1.0 / (members.len() as f64 * nw);
            }
            for i in 0..m {
                if let (Some(a), Some(s)) = (detail.rmad[i][k], detail.rmse[i][k]) {
                    sums[0][i][k] += a;
                    sums[1][i][k] += s;
                    counts[i][k] += 1;
                }
            }
        }
        failures.extend(fails.iter().cloned());
    }
    let mean = |s: &Vec<Vec<f64>>| -> Vec<Vec<f64>> {
        (0..m)
            .map(|i| {
                (0..nh)
                    .map(|k| if counts[i][k] > 0 { s[i][k] / counts[i][k] as f64 } else { f64::NAN })
                    .collect()
            })
            .collect()
    };
    let [rmad_sum, rmse_sum] = &sums;
    Ok(WindowStudyResult {
        config: config.clone(),
        models: labels,
        horizons: config.horizons.clone(),
        n_windows: windows.len(),
        inclusion,
        group_inclusion,
        mean_rmad: mean(rmad_sum),
        mean_rmse: mean(rmse_sum),
        windows: windows.into_iter().map(|w| w.0).collect(),
        failures,
    })
}
