use std::fmt;
use std::str::FromStr;

use crate::error::{Error, Result};

/// Model families in the competing set.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Family {
    Fi,
    Arfima,
    Arma,
    Ar,
    Har,
    RandomWalk,
}

/// A model family with its orders. For `Fi`, `p = q = 0`; for `Ar`, `q = 0`;
/// `har_lags` is used by `Har` only.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ModelSpec {
    pub family: Family,
    pub p: usize,
    pub q: usize,
    pub har_lags: Vec<usize>,
}

pub const HAR3_LAGS: [usize; 3] = [1, 5, 22];
pub const HAR4_LAGS: [usize; 4] = [1, 5, 22, 50];

impl ModelSpec {
    fn new(family: Family, p: usize, q: usize) -> Self {
        Self {
            family,
            p,
            q,
            har_lags: Vec::new(),
        }
    }

    pub fn fi() -> Self {
        Self::new(Family::Fi, 0, 0)
    }

    pub fn arfima(p: usize, q: usize) -> Self {
        Self::new(Family::Arfima, p, q)
    }

    pub fn arma(p: usize, q: usize) -> Self {
        Self::new(Family::Arma, p, q)
    }

    pub fn ar(p: usize) -> Self {
        Self::new(Family::Ar, p, 0)
    }

    pub fn har(lags: &[usize]) -> Self {
        Self {
            har_lags: lags.to_vec(),
            ..Self::new(Family::Har, 0, 0)
        }
    }

    pub fn random_walk() -> Self {
        Self::new(Family::RandomWalk, 0, 0)
    }

    pub fn validate(&self) -> Result<()> {
        match self.family {
            Family::Fi | Family::RandomWalk if self.p != 0 || self.q != 0 => Err(Error::Config(
                format!("{:?} takes no ARMA orders", self.family),
            )),
            Family::Ar if self.q != 0 => Err(Error::Config("AR takes no MA order".into())),
            Family::Har => {
                let w = &self.har_lags;
                if w.first() != Some(&1) {
                    return Err(Error::Config("HAR windows must start at 1".into()));
                }
                if w.windows(2).any(|p| p[1] <= p[0]) {
                    return Err(Error::Config("HAR windows must be strictly increasing".into()));
                }
                Ok(())
            }
            _ => Ok(()),
        }
    }

    /// Free parameters counted by BIC: mean or intercept, d where estimated,
    /// and the ARMA or regression coefficients. The innovation variance is
    /// profiled out and not counted.
    pub fn n_params(&self) -> usize {
        match self.family {
            Family::Fi => 2,
            Family::Arfima => self.p + self.q + 2,
            Family::Arma => self.p + self.q + 1,
            Family::Ar => self.p + 1,
            Family::Har => self.har_lags.len() + 1,
            Family::RandomWalk => 0,
        }
    }

    /// Longest lag window the model needs from the sample.
    pub fn max_lag(&self) -> usize {
        match self.family {
            Family::Har => self.har_lags.last().copied().unwrap_or(0),
            Family::Ar => self.p,
            _ => self.p.max(self.q),
        }
    }

    pub fn is_fractional(&self) -> bool {
        matches!(self.family, Family::Fi | Family::Arfima)
    }
}

impl fmt::Display for ModelSpec {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self.family {
            Family::Fi => f.write_str("FI(d)"),
            Family::Arfima => write!(f, "ARFIMA({},d,{})", self.p, self.q),
            Family::Arma => write!(f, "ARMA({},{})", self.p, self.q),
            Family::Ar => write!(f, "AR({})", self.p),
            Family::Har => {
                if self.har_lags == HAR3_LAGS {
                    f.write_str("HAR(3)")
                } else if self.har_lags == HAR4_LAGS {
                    f.write_str("HAR(4)")
                } else {
                    let w: Vec<String> = self.har_lags.iter().map(|v| v.to_string()).collect();
                    write!(f, "HAR[{}]", w.join(","))
                }
            }
            Family::RandomWalk => f.write_str("I(1)"),
        }
    }
}

fn parse_orders(inner: &str) -> Result<Vec<String>> {
    Ok(inner.split(',').map(|s| s.trim().to_string()).collect())
}

fn parse_count(s: &str, whole: &str) -> Result<usize> {
    s.parse()
        .map_err(|_| Error::Config(format!("bad order '{s}' in model '{whole}'")))
}

/// Accepts the labels produced by `Display` (case-insensitive, spaces
/// ignored) plus `FI`, `RW`, `ARFIMA(p,q)` and `HAR[w1,w2,...]`.
impl FromStr for ModelSpec {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t: String = s
            .chars()
            .filter(|c| !c.is_whitespace())
            .collect::<String>()
            .to_ascii_uppercase();
        let bad = || Error::Config(format!("unrecognized model '{s}'"));
        let spec = match t.as_str() {
            "FI" | "FI(D)" => ModelSpec::fi(),
            "I(1)" | "RW" | "RANDOMWALK" => ModelSpec::random_walk(),
            "HAR(3)" | "HAR3" => ModelSpec::har(&HAR3_LAGS),
            "HAR(4)" | "HAR4" => ModelSpec::har(&HAR4_LAGS),
            _ => {
                let open = t.find(['(', '[']).ok_or_else(bad)?;
                if !(t.ends_with(')') || t.ends_with(']')) {
                    return Err(bad());
                }
                let head = &t[..open];
                let inner = &t[open + 1..t.len() - 1];
                let parts = parse_orders(inner)?;
                match head {
                    "ARFIMA" => match parts.len() {
                        3 if parts[1] == "D" => ModelSpec::arfima(
                            parse_count(&parts[0], s)?,
                            parse_count(&parts[2], s)?,
                        ),
                        2 => ModelSpec::arfima(parse_count(&parts[0], s)?, parse_count(&parts[1], s)?),
                        _ => return Err(bad()),
                    },
                    "ARMA" if parts.len() == 2 => {
                        ModelSpec::arma(parse_count(&parts[0], s)?, parse_count(&parts[1], s)?)
                    }
                    "AR" if parts.len() == 1 => ModelSpec::ar(parse_count(&parts[0], s)?),
                    "HAR" if t.as_bytes()[open] == b'[' => {
                        let lags = parts
                            .iter()
                            .map(|p| parse_count(p, s))
                            .collect::<Result<Vec<_>>>()?;
                        ModelSpec::har(&lags)
                    }
                    _ => return Err(bad()),
                }
            }
        };
        spec.validate()?;
        Ok(spec)
    }
}

/// The fifteen-model starting set, in table order.
pub fn default_model_set() -> Vec<ModelSpec> {
    vec![
        ModelSpec::fi(),
        ModelSpec::arfima(1, 0),
        ModelSpec::arfima(0, 1),
        ModelSpec::arfima(1, 1),
        ModelSpec::arfima(2, 1),
        ModelSpec::arma(1, 1),
        ModelSpec::arma(2, 1),
        ModelSpec::arma(1, 2),
        ModelSpec::arma(3, 3),
        ModelSpec::arma(4, 4),
        ModelSpec::har(&HAR3_LAGS),
        ModelSpec::ar(22),
        ModelSpec::ar(30),
        ModelSpec::ar(50),
        ModelSpec::random_walk(),
    ]
}

/// Constrained-versus-unconstrained comparison set.
pub fn har_comparison_set() -> Vec<ModelSpec> {
    vec![
        ModelSpec::har(&HAR3_LAGS),
        ModelSpec::ar(22),
        ModelSpec::har(&HAR4_LAGS),
        ModelSpec::ar(50),
        ModelSpec::fi(),
        ModelSpec::random_walk(),
    ]
}
