//! Machine-readable test reports.

use std::collections::BTreeMap;

use serde::Serialize;

use super::{Decision, LogSpectraTable, PsrReport, RsReport};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum TestKind {
    Psr,
    Rs,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct GridSummary {
    #[serde(rename = "I")]
    pub i: usize,
    #[serde(rename = "J")]
    pub j: usize,
    #[serde(rename = "N")]
    pub n: Option<usize>,
    #[serde(rename = "K")]
    pub k: usize,
    #[serde(rename = "B")]
    pub b: Option<f64>,
    pub buffer: Option<f64>,
}

impl GridSummary {
    pub fn of(table: &LogSpectraTable) -> Self {
        let grid = table.grid();
        Self {
            i: table.i(),
            j: table.j(),
            n: grid.map(|g| g.n()),
            k: table.k(),
            b: grid.map(|g| g.spacing()),
            buffer: grid.map(|g| g.buffer()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TestReport {
    pub test: TestKind,
    pub statistics: BTreeMap<&'static str, f64>,
    pub df: BTreeMap<&'static str, u32>,
    pub thresholds: BTreeMap<&'static str, f64>,
    pub alpha: f64,
    pub decision: Decision,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub um_flag: Option<bool>,
    pub grid: GridSummary,
}

impl TestReport {
    pub fn psr(r: &PsrReport, table: &LogSpectraTable) -> Self {
        Self {
            test: TestKind::Psr,
            statistics: BTreeMap::from([
                ("S_T", r.s_t),
                ("S_F", r.s_f),
                ("S_IR", r.s_ir),
                ("S_T/sigma2", r.s_t_normalized()),
                ("S_IR/sigma2", r.s_ir_normalized()),
                ("sigma2", r.sigma2),
            ]),
            df: BTreeMap::from([("T", r.df_t), ("F", r.df_f), ("IR", r.df_ir)]),
            thresholds: BTreeMap::from([("T", r.threshold_t), ("IR", r.threshold_ir)]),
            alpha: r.alpha,
            decision: r.decision,
            um_flag: Some(r.um_flag),
            grid: GridSummary::of(table),
        }
    }

    pub fn rs(r: &RsReport, table: &LogSpectraTable) -> Self {
        Self {
            test: TestKind::Rs,
            statistics: BTreeMap::from([("t_R", r.t_r), ("SS_R", r.ss_r)]),
            df: BTreeMap::from([("R", r.df)]),
            thresholds: BTreeMap::from([("R", r.threshold)]),
            alpha: r.alpha,
            decision: r.decision,
            um_flag: None,
            grid: GridSummary::of(table),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::stattest::{psr_test, rs_test};

    #[test]
    fn json_layout() {
        let t = LogSpectraTable::from_values(vec![vec![0.0, 0.1], vec![0.2, -0.1], vec![0.0, 0.3]], 5).unwrap();
        let v = serde_json::to_value(TestReport::psr(&psr_test(&t, 0.05).unwrap(), &t)).unwrap();
        assert_eq!(v["test"], "psr");
        assert_eq!(v["decision"], "stationary");
        assert_eq!(v["df"]["IR"], 2);
        assert_eq!(v["grid"]["I"], 3);
        assert!(v["grid"]["N"].is_null());
        assert!(v["thresholds"]["T"].as_f64().unwrap() > 5.99);

        let v = serde_json::to_value(TestReport::rs(&rs_test(&t, 0.05).unwrap(), &t)).unwrap();
        assert_eq!(v["test"], "rs");
        assert!(v.get("um_flag").is_none());
        assert_eq!(v["grid"]["K"], 5);
    }
}
