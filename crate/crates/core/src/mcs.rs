//! Model Confidence Set by sequential elimination.
//!
//! Each step tests equal predictive ability of the surviving models with the
//! range statistic T_R = max |d̄_ij| / sd(d̄_ij) or the semiquadratic statistic
//! T_SQ = Σ_{i≠j} d̄_ij² / sd(d̄_ij), whose null distributions come from a
//! moving-block bootstrap of the loss panel. While the null is rejected
//! (bootstrap p-value below alpha) the model with the largest standardized
//! excess loss over the surviving-set average is removed.
//!
//! Models are processed in label order, so permuting the panel columns
//! permutes the output and changes nothing else. With panels as short as a
//! handful of observations the bootstrap has little resolution; results at
//! such sizes are noisy by construction.

use std::fmt;
use std::str::FromStr;

use rand::Rng;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::forecast::LossKind;
use crate::rng::{derive_seed, rng_from_seed};

/// Per-step losses, n observations by m models, stored by model.
#[derive(Debug, Clone, PartialEq)]
pub struct LossPanel {
    columns: Vec<Vec<f64>>,
    model_ids: Vec<String>,
    loss_kind: LossKind,
}

impl LossPanel {
    /// `columns[i]` holds the losses of model `ids[i]`.
    pub fn from_columns(ids: Vec<String>, columns: Vec<Vec<f64>>, loss_kind: LossKind) -> Result<Self> {
        if ids.len() != columns.len() {
            return Err(Error::Contract(format!(
                "{} labels for {} loss columns",
                ids.len(),
                columns.len()
            )));
        }
        if columns.len() < 2 {
            return Err(Error::domain("a loss panel needs at least two models"));
        }
        let n = columns[0].len();
        if n < 2 {
            return Err(Error::domain("a loss panel needs at least two observations"));
        }
        if columns.iter().any(|c| c.len() != n) {
            return Err(Error::Contract("loss columns differ in length".into()));
        }
        if columns.iter().flatten().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(Error::domain("losses must be finite and non-negative"));
        }
        let mut sorted = ids.clone();
        sorted.sort();
        if sorted.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Contract("model labels must be unique".into()));
        }
        Ok(Self {
            columns,
            model_ids: ids,
            loss_kind,
        })
    }

    /// `rows[t][i]` is the loss of model i at observation t.
    pub fn from_rows(ids: Vec<String>, rows: &[Vec<f64>], loss_kind: LossKind) -> Result<Self> {
        let m = ids.len();
        if rows.iter().any(|r| r.len() != m) {
            return Err(Error::Contract(format!("every row needs {m} losses")));
        }
        let columns = (0..m).map(|i| rows.iter().map(|r| r[i]).collect()).collect();
        Self::from_columns(ids, columns, loss_kind)
    }

    pub fn n_obs(&self) -> usize {
        self.columns[0].len()
    }

    pub fn n_models(&self) -> usize {
        self.columns.len()
    }

    pub fn model_ids(&self) -> &[String] {
        &self.model_ids
    }

    pub fn column(&self, i: usize) -> &[f64] {
        &self.columns[i]
    }

    pub fn loss_kind(&self) -> LossKind {
        self.loss_kind
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Statistic {
    Range,
    SemiQuadratic,
}

impl fmt::Display for Statistic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Statistic::Range => "range",
            Statistic::SemiQuadratic => "sq",
        })
    }
}

impl FromStr for Statistic {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "range" | "r" | "tr" => Ok(Statistic::Range),
            "sq" | "semiquadratic" | "tsq" => Ok(Statistic::SemiQuadratic),
            other => Err(Error::Config(format!("unknown statistic '{other}' (expected range or sq)"))),
        }
    }
}

pub const DEFAULT_REPLICATIONS: usize = 999;
pub const MIN_REPLICATIONS: usize = 500;

/// Moving-block bootstrap settings. `block_length = None` selects
/// ceil(n^{1/3}).
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapConfig {
    pub replications: usize,
    pub block_length: Option<usize>,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn new(seed: u64) -> Self {
        Self {
            replications: DEFAULT_REPLICATIONS,
            block_length: None,
            seed,
        }
    }

    pub fn resolved_block_length(&self, n: usize) -> usize {
        self.block_length
            .unwrap_or_else(|| (n as f64).cbrt().ceil() as usize)
            .clamp(1, n.max(1))
    }
}

/// Bootstrap settings as used, echoed in the result.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BootstrapInfo {
    pub replications: usize,
    pub block_length: usize,
    pub seed: u64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct McsResult {
    /// Surviving labels in panel order.
    pub superior_set: Vec<String>,
    /// Eliminated labels in elimination order with their MCS p-values.
    pub elimination_order: Vec<(String, f64)>,
    /// MCS p-value of every model, in panel order.
    pub p_values: Vec<(String, f64)>,
    pub statistic: Statistic,
    pub alpha: f64,
    pub bootstrap: BootstrapInfo,
}

impl McsResult {
    pub fn contains(&self, label: &str) -> bool {
        self.superior_set.iter().any(|s| s == label)
    }
}

/// Indices of one moving-block resample of length `n`.
pub fn moving_block_indices<R: Rng>(n: usize, block: usize, rng: &mut R) -> Vec<usize> {
    let block = block.clamp(1, n);
    let mut idx = Vec::with_capacity(n);
    while idx.len() < n {
        let start = rng.random_range(0..=n - block);
        let take = block.min(n - idx.len());
        idx.extend(start..start + take);
    }
    idx
}

/// Relative size below which a bootstrap variance counts as zero.
const ZERO_VAR: f64 = 1e-20;

pub fn mcs(panel: &LossPanel, statistic: Statistic, alpha: f64, boot: &BootstrapConfig) -> Result<McsResult> {
    if !(alpha > 0.0 && alpha < 1.0) {
        return Err(Error::domain(format!("alpha = {alpha} outside (0, 1)")));
    }
    if boot.replications < MIN_REPLICATIONS {
        return Err(Error::domain(format!(
            "at least {MIN_REPLICATIONS} bootstrap replications required, got {}",
            boot.replications
        )));
    }
    if boot.block_length == Some(0) {
        return Err(Error::domain("block length must be at least 1"));
    }
    let n = panel.n_obs();
    let m = panel.n_models();
    let block = boot.resolved_block_length(n);
    let means: Vec<f64> = panel.columns.iter().map(|c| c.iter().sum::<f64>() / n as f64).collect();
    // boot_means[b][i]
    let boot_means: Vec<Vec<f64>> = (0..boot.replications)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from_seed(derive_seed(boot.seed, b as u64));
            let idx = moving_block_indices(n, block, &mut rng);
            panel
                .columns
                .iter()
                .map(|c| idx.iter().map(|&t| c[t]).sum::<f64>() / n as f64)
                .collect()
        })
        .collect();
    let scale = means.iter().fold(0.0_f64, |a, v| a.max(v.abs())).max(f64::MIN_POSITIVE);

    let mut order: Vec<usize> = (0..m).collect();
    order.sort_by(|&a, &b| panel.model_ids[a].cmp(&panel.model_ids[b]));
    let mut alive = order;
    let mut running = 0.0_f64;
    let mut eliminated: Vec<(usize, f64)> = Vec::new();
    let mut final_p = 1.0;

    while alive.len() > 1 {
        let step = test_step(&alive, &means, &boot_means, statistic, scale);
        let (p, worst) = match step {
            Step::AllIdentical => (1.0, None),
            Step::Degenerate(worst) => (0.0, Some(worst)),
            Step::Tested(p) if p < alpha => (p, Some(worst_model(&alive, &means, &boot_means, scale))),
            Step::Tested(p) => (p, None),
        };
        running = running.max(p);
        match worst {
            Some(w) => {
                eliminated.push((w, running));
                alive.retain(|&i| i != w);
            }
            None => {
                final_p = running;
                break;
            }
        }
    }
    if alive.len() == 1 && eliminated.len() == m - 1 {
        final_p = 1.0;
    }
    let label = |i: usize| panel.model_ids[i].clone();
    let mut p_of = vec![final_p; m];
    for &(i, p) in &eliminated {
        p_of[i] = p;
    }
    let mut survivors: Vec<usize> = alive;
    survivors.sort_unstable();
    Ok(McsResult {
        superior_set: survivors.iter().map(|&i| label(i)).collect(),
        elimination_order: eliminated.iter().map(|&(i, p)| (label(i), p)).collect(),
        p_values: (0..m).map(|i| (label(i), p_of[i])).collect(),
        statistic,
        alpha,
        bootstrap: BootstrapInfo {
            replications: boot.replications,
            block_length: block,
            seed: boot.seed,
        },
    })
}

enum Step {
    /// Every pair has identical losses.
    AllIdentical,
    /// A pair differs deterministically; the dominated model.
    Degenerate(usize),
    /// Bootstrap p-value of the equal-ability hypothesis.
    Tested(f64),
}

fn bootstrap_sd(
    i: usize,
    j: usize,
    dbar: f64,
    boot_means: &[Vec<f64>],
) -> f64 {
    let b = boot_means.len() as f64;
    let v = boot_means
        .iter()
        .map(|bm| (bm[i] - bm[j] - dbar).powi(2))
        .sum::<f64>()
        / b;
    v.sqrt()
}

fn test_step(alive: &[usize], means: &[f64], boot_means: &[Vec<f64>], statistic: Statistic, scale: f64) -> Step {
    struct Pair {
        i: usize,
        j: usize,
        dbar: f64,
        sd: f64,
    }
    let mut pairs = Vec::new();
    let mut degenerate: Option<(f64, usize)> = None;
    for (a, &i) in alive.iter().enumerate() {
        for &j in &alive[a + 1..] {
            let dbar = means[i] - means[j];
            let sd = bootstrap_sd(i, j, dbar, boot_means);
            if sd * sd <= ZERO_VAR * scale * scale {
                if dbar.abs() > 1e-12 * scale {
                    let worse = if dbar > 0.0 { i } else { j };
                    if degenerate.is_none_or(|(g, _)| dbar.abs() > g) {
                        degenerate = Some((dbar.abs(), worse));
                    }
                }
                continue;
            }
            pairs.push(Pair { i, j, dbar, sd });
        }
    }
    if let Some((_, w)) = degenerate {
        return Step::Degenerate(w);
    }
    if pairs.is_empty() {
        return Step::AllIdentical;
    }
    let stat = |dev: &dyn Fn(&Pair) -> f64| -> f64 {
        match statistic {
            Statistic::Range => pairs.iter().map(|p| dev(p).abs() / p.sd).fold(0.0, f64::max),
            Statistic::SemiQuadratic => pairs.iter().map(|p| 2.0 * dev(p).powi(2) / p.sd).sum(),
        }
    };
    let observed = stat(&|p: &Pair| p.dbar);
    let exceed = boot_means
        .iter()
        .filter(|bm| stat(&|p: &Pair| bm[p.i] - bm[p.j] - p.dbar) >= observed)
        .count();
    Step::Tested(exceed as f64 / boot_means.len() as f64)
}

/// Model with the largest t-statistic of its mean loss against the
/// surviving-set average; ties go to the first label.
fn worst_model(alive: &[usize], means: &[f64], boot_means: &[Vec<f64>], scale: f64) -> usize {
    let k = alive.len() as f64;
    let avg = alive.iter().map(|&i| means[i]).sum::<f64>() / k;
    let boot_avg: Vec<f64> = boot_means
        .iter()
        .map(|bm| alive.iter().map(|&i| bm[i]).sum::<f64>() / k)
        .collect();
    let mut best = alive[0];
    let mut best_t = f64::NEG_INFINITY;
    for &i in alive {
        let d = means[i] - avg;
        let var = boot_means
            .iter()
            .zip(&boot_avg)
            .map(|(bm, ba)| (bm[i] - ba - d).powi(2))
            .sum::<f64>()
            / boot_means.len() as f64;
        let t = if var <= ZERO_VAR * scale * scale {
            if d.abs() <= 1e-12 * scale {
                0.0
            } else {
                d.signum() * f64::INFINITY
            }
        } else {
            d / var.sqrt()
        };
        if t > best_t {
            best_t = t;
            best = i;
        }
    }
    best
}
