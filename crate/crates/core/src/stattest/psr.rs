//! Two-way ANOVA (Priestley–Subba Rao) stationarity test.

use serde::Serialize;

use super::{Decision, LogSpectraTable};
use crate::error::{Error, Result};
use crate::specialfn::chi2_upper;

/// Means and sums of squares of the two-way decomposition.
#[derive(Debug, Clone, PartialEq)]
pub struct AnovaParts {
    pub grand_mean: f64,
    pub row_means: Vec<f64>,
    pub col_means: Vec<f64>,
    /// Between times, `J Σ_i (W_i. − W_..)²`.
    pub s_t: f64,
    /// Between frequencies, `I Σ_j (W_.j − W_..)²`.
    pub s_f: f64,
    /// Interaction plus residual.
    pub s_ir: f64,
}

pub fn anova(table: &LogSpectraTable) -> AnovaParts {
    let (ni, nj) = (table.i(), table.j());
    let w = table.values();
    let row_means: Vec<f64> = w.iter().map(|r| r.iter().sum::<f64>() / nj as f64).collect();
    let col_means: Vec<f64> = (0..nj).map(|j| w.iter().map(|r| r[j]).sum::<f64>() / ni as f64).collect();
    let grand_mean = row_means.iter().sum::<f64>() / ni as f64;
    let s_t = nj as f64 * row_means.iter().map(|m| (m - grand_mean).powi(2)).sum::<f64>();
    let s_f = ni as f64 * col_means.iter().map(|m| (m - grand_mean).powi(2)).sum::<f64>();
    let mut s_ir = 0.0;
    for (row, rm) in w.iter().zip(&row_means) {
        for (v, cm) in row.iter().zip(&col_means) {
            s_ir += (v - rm - cm + grand_mean).powi(2);
        }
    }
    AnovaParts { grand_mean, row_means, col_means, s_t, s_f, s_ir }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PsrReport {
    pub s_t: f64,
    pub s_f: f64,
    pub s_ir: f64,
    pub sigma2: f64,
    pub df_t: u32,
    pub df_f: u32,
    pub df_ir: u32,
    pub alpha: f64,
    /// χ²_{I−1}(1 − α)
    pub threshold_t: f64,
    /// χ²_{(I−1)(J−1)}(1 − α)
    pub threshold_ir: f64,
    pub decision: Decision,
    /// Set when the interaction was not significant and the between-times
    /// stage was reached.
    pub um_flag: bool,
}

impl PsrReport {
    pub fn s_t_normalized(&self) -> f64 {
        self.s_t / self.sigma2
    }

    pub fn s_ir_normalized(&self) -> f64 {
        self.s_ir / self.sigma2
    }
}

pub(super) fn check_alpha(alpha: f64) -> Result<()> {
    if alpha > 0.0 && alpha < 1.0 {
        Ok(())
    } else {
        Err(Error::Domain(format!("significance level {alpha} outside (0, 1)")))
    }
}

/// Interaction first: a significant `S_{I+R}/σ²` means non-stationary.
/// Otherwise the process is treated as uniformly modulated and
/// `S_T/σ²` decides. `S_F` is reported but never gates.
pub fn psr_test(table: &LogSpectraTable, alpha: f64) -> Result<PsrReport> {
    check_alpha(alpha)?;
    table.require_shape(2, 2)?;
    let parts = anova(table);
    let (ni, nj) = (table.i() as u32, table.j() as u32);
    let df_t = ni - 1;
    let df_f = nj - 1;
    let df_ir = df_t * df_f;
    let threshold_t = chi2_upper(alpha, df_t)?;
    let threshold_ir = chi2_upper(alpha, df_ir)?;
    let sigma2 = table.sigma2();

    let (decision, um_flag) = if parts.s_ir / sigma2 > threshold_ir {
        (Decision::NonStationary, false)
    } else if parts.s_t / sigma2 > threshold_t {
        (Decision::NonStationary, true)
    } else {
        (Decision::Stationary, true)
    };
    Ok(PsrReport {
        s_t: parts.s_t,
        s_f: parts.s_f,
        s_ir: parts.s_ir,
        sigma2,
        df_t,
        df_f,
        df_ir,
        alpha,
        threshold_t,
        threshold_ir,
        decision,
        um_flag,
    })
}
