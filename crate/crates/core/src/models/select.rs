//! Order selection by the Bayesian information criterion.

use super::{fit_arfima, fit_arma, ModelSpec};
use crate::error::{Error, Result};
use crate::series::TimeSeries;

const MAX_ARFIMA: (usize, usize) = (2, 2);
const MAX_ARMA: (usize, usize) = (4, 4);

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum SelectFamily {
    Arfima,
    Arma,
}

/// One candidate of a BIC search; `bic` is `None` when the fit failed.
#[derive(Debug, Clone, PartialEq)]
pub struct BicEntry {
    pub spec: ModelSpec,
    pub bic: Option<f64>,
    pub error: Option<String>,
}

/// Fits every order pair (p, q) ≤ (max_p, max_q). ARFIMA candidates all use
/// CSS, including ARFIMA(0,d,0), so that the criteria are comparable.
pub fn bic_table(series: &TimeSeries, family: SelectFamily, max_p: usize, max_q: usize) -> Result<Vec<BicEntry>> {
    let limit = match family {
        SelectFamily::Arfima => MAX_ARFIMA,
        SelectFamily::Arma => MAX_ARMA,
    };
    if max_p > limit.0 || max_q > limit.1 {
        return Err(Error::domain(format!(
            "{family:?} orders are limited to ({}, {})",
            limit.0, limit.1
        )));
    }
    let mut out = Vec::new();
    for p in 0..=max_p {
        for q in 0..=max_q {
            let (spec, fitted) = match family {
                SelectFamily::Arfima => {
                    let s = ModelSpec::arfima(p, q);
                    let f = fit_arfima(series, &s);
                    (s, f)
                }
                SelectFamily::Arma => {
                    let s = ModelSpec::arma(p, q);
                    let f = fit_arma(series, &s);
                    (s, f)
                }
            };
            out.push(match fitted {
                Ok(m) => BicEntry {
                    spec,
                    bic: m.bic,
                    error: None,
                },
                Err(e) => BicEntry {
                    spec,
                    bic: None,
                    error: Some(e.to_string()),
                },
            });
        }
    }
    Ok(out)
}

/// Order pair with the smallest BIC; ties go to fewer parameters, then
/// lower p. Failed fits are skipped.
pub fn bic_select(series: &TimeSeries, family: SelectFamily, max_p: usize, max_q: usize) -> Result<ModelSpec> {
    pick(&bic_table(series, family, max_p, max_q)?)
}

fn pick(table: &[BicEntry]) -> Result<ModelSpec> {
    table
        .iter()
        .filter_map(|e| e.bic.filter(|b| b.is_finite()).map(|b| (b, &e.spec)))
        .min_by(|a, b| {
            a.0.total_cmp(&b.0)
                .then(a.1.n_params().cmp(&b.1.n_params()))
                .then(a.1.p.cmp(&b.1.p))
        })
        .map(|(_, s)| s.clone())
        .ok_or_else(|| Error::estimation("every candidate order failed to fit", f64::NAN))
}
