//! Rank-based (Friedman) stationarity test: entries are ranked within each
//! frequency column and the row mean ranks are compared.

use serde::Serialize;

use super::psr::check_alpha;
use super::{Decision, LogSpectraTable};
use crate::error::Result;
use crate::specialfn::chi2_upper;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RsReport {
    pub t_r: f64,
    pub ss_r: f64,
    pub df: u32,
    pub alpha: f64,
    pub threshold: f64,
    pub decision: Decision,
    /// `R_i.` for every row.
    pub row_mean_ranks: Vec<f64>,
}

/// Ranks (1 = smallest) within each column; ties share their mean rank.
pub fn column_ranks(values: &[Vec<f64>]) -> Vec<Vec<f64>> {
    let rows = values.len();
    let cols = values.first().map_or(0, Vec::len);
    let mut ranks = vec![vec![0.0; cols]; rows];
    let mut order: Vec<usize> = (0..rows).collect();
    for j in 0..cols {
        order.sort_by(|&a, &b| values[a][j].total_cmp(&values[b][j]));
        let mut start = 0;
        while start < rows {
            let mut end = start + 1;
            while end < rows && values[order[end]][j] == values[order[start]][j] {
                end += 1;
            }
            // positions start..end hold ranks start+1..=end
            let mean_rank = (start + 1 + end) as f64 / 2.0;
            for &r in &order[start..end] {
                ranks[r][j] = mean_rank;
            }
            start = end;
        }
    }
    ranks
}

/// `t_R = J Σ_i (R_i. − R_..)² / (I(I+1)/12)` against `χ²_{I−1}(1 − α)`.
pub fn rs_test(table: &LogSpectraTable, alpha: f64) -> Result<RsReport> {
    check_alpha(alpha)?;
    table.require_shape(2, 1)?;
    let (ni, nj) = (table.i(), table.j());
    let ranks = column_ranks(table.values());
    let row_mean_ranks: Vec<f64> = ranks.iter().map(|r| r.iter().sum::<f64>() / nj as f64).collect();
    let grand = (ni as f64 + 1.0) / 2.0;
    let ss_r = nj as f64 * row_mean_ranks.iter().map(|r| (r - grand).powi(2)).sum::<f64>();
    let t_r = ss_r / (ni * (ni + 1)) as f64 * 12.0;
    let df = (ni - 1) as u32;
    let threshold = chi2_upper(alpha, df)?;
    let decision = if t_r > threshold { Decision::NonStationary } else { Decision::Stationary };
    Ok(RsReport { t_r, ss_r, df, alpha, threshold, decision, row_mean_ranks })
}
