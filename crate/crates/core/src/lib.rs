//! Long-memory time series toolkit: simulation of long-memory generating
//! processes, estimation of fractionally integrated and short-memory
//! competitors, multi-horizon forecasting, and Model Confidence Set
//! comparison of forecast losses.

pub mod dgp;
pub mod error;
pub mod forecast;
pub mod harness;
pub mod linalg;
pub mod mcs;
pub mod models;
pub mod optim;
pub mod poly;
pub mod rng;
pub mod rvdata;
pub mod series;
pub mod specfun;
pub mod spectral;

pub use error::{Error, Result};
pub use series::TimeSeries;
