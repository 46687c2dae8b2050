//! Stationarity tests over the variance-stabilised log-spectra table
//! `W_ij = ln f̂_{t_i}(w_j) − ψ(K) + ln K`, whose entries are approximately
//! `N(0, ψ'(K))` under the null.

mod montecarlo;
mod psr;
mod rank;
mod report;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::evospec::{SpectralEstimate, TFGrid};
use crate::specialfn::{digamma, trigamma};

pub use montecarlo::{clopper_pearson, mc_study, McConfig, McSummary, RateSummary};
pub use psr::{anova, psr_test, AnovaParts, PsrReport};
pub use rank::{column_ranks, rs_test, RsReport};
pub use report::{GridSummary, TestKind, TestReport};

/// Minimum taper count for which the normal approximation of `W_ij` is
/// considered adequate.
pub const MIN_NORMAL_TAPERS: usize = 5;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    #[serde(rename = "stationary")]
    Stationary,
    #[serde(rename = "non-stationary")]
    NonStationary,
}

impl Decision {
    pub fn rejects_stationarity(self) -> bool {
        self == Decision::NonStationary
    }
}

/// The `I×J` table of log-spectra and its null variance.
#[derive(Debug, Clone, PartialEq)]
pub struct LogSpectraTable {
    values: Vec<Vec<f64>>,
    k: usize,
    sigma2: f64,
    grid: Option<TFGrid>,
}

impl LogSpectraTable {
    /// Wraps an already transformed table; `σ² = ψ'(K)`.
    pub fn from_values(values: Vec<Vec<f64>>, k: usize) -> Result<Self> {
        if k == 0 {
            return Err(Error::Table("taper count must be at least 1".into()));
        }
        let sigma2 = trigamma(k as f64)?;
        Self::with_variance(values, k, sigma2)
    }

    /// Like [`LogSpectraTable::from_values`] but with an explicit null
    /// variance in place of `ψ'(K)`.
    pub fn with_variance(values: Vec<Vec<f64>>, k: usize, sigma2: f64) -> Result<Self> {
        let cols = values.first().map_or(0, Vec::len);
        if values.iter().any(|row| row.len() != cols) {
            return Err(Error::Table("rows have unequal lengths".into()));
        }
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::Table("non-finite table entry".into()));
        }
        if !(sigma2 > 0.0 && sigma2.is_finite()) {
            return Err(Error::Table(format!("null variance must be positive, got {sigma2}")));
        }
        Ok(Self { values, k, sigma2, grid: None })
    }

    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    /// Number of rows (blocks).
    pub fn i(&self) -> usize {
        self.values.len()
    }

    /// Number of columns (frequencies).
    pub fn j(&self) -> usize {
        self.values.first().map_or(0, Vec::len)
    }

    pub fn k(&self) -> usize {
        self.k
    }

    pub fn sigma2(&self) -> f64 {
        self.sigma2
    }

    pub fn grid(&self) -> Option<&TFGrid> {
        self.grid.as_ref()
    }

    fn require_shape(&self, min_rows: usize, min_cols: usize) -> Result<()> {
        if self.i() < min_rows || self.j() < min_cols {
            return Err(Error::Table(format!(
                "table is {}×{}, need at least {min_rows}×{min_cols}",
                self.i(),
                self.j()
            )));
        }
        Ok(())
    }
}

/// `W_ij = ln f̂_ij − ψ(K) + ln K`; every estimate must be positive.
pub fn log_table(est: &SpectralEstimate) -> Result<LogSpectraTable> {
    let k = est.k();
    if k < MIN_NORMAL_TAPERS {
        log::warn!("K = {k} is below {MIN_NORMAL_TAPERS}; the normal approximation of the log-spectra is rough");
    }
    let offset = (k as f64).ln() - digamma(k as f64)?;
    let mut values = Vec::with_capacity(est.values().len());
    for (i, row) in est.values().iter().enumerate() {
        let mut out = Vec::with_capacity(row.len());
        for (j, &v) in row.iter().enumerate() {
            if v <= 0.0 || v.is_nan() {
                return Err(Error::Table(format!("estimate at block {i}, frequency {j} is {v}; log undefined")));
            }
            out.push(v.ln() + offset);
        }
        values.push(out);
    }
    let mut table = LogSpectraTable::from_values(values, k)?;
    table.grid = Some(est.grid().clone());
    Ok(table)
}
