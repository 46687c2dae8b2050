//! Bias/variance trade-off surrogates for the taper count `K`.
//!
//! For window length `N` and `K` tapers at resolution `W`, the surrogate
//! MSE is the sum of
//!
//! ```text
//! term1 = (log₂ N / K)²      window leakage
//! term2 = W⁴                 smoothing bias
//! term3 = 1 / K              variance
//! term4 = B_g^{(K)} / B_FY   non-stationarity bias
//! ```
//!
//! The *reduced* surrogate drops `term4`; the *full* surrogate keeps it.
//! `B_FY` is the characteristic width of the process, `a√(π/2)` for a
//! Gaussian modulation of width `a`.

use std::f64::consts::PI;
use std::io::Write;

use rayon::prelude::*;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::taper::{compute_dpss, dpss_taper, slepian_tridiag, taper_width, unit_dpss, width_bg, TaperSpec};

/// Order of the taper that is usually the widest among `K`.
fn likely_widest(k: usize) -> usize {
    ((k - 1) as f64 * 0.9).round() as usize
}

/// `B_FY = a√(π/2)`.
pub fn characteristic_width(a: f64) -> Result<f64> {
    if !(a > 0.0 && a.is_finite()) {
        return Err(Error::Domain(format!("modulation width must be positive, got {a}")));
    }
    Ok(a * (PI / 2.0).sqrt())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Formula {
    /// All four terms.
    Full,
    /// Without the non-stationarity term.
    Reduced,
}

impl std::str::FromStr for Formula {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "full" => Ok(Formula::Full),
            "reduced" => Ok(Formula::Reduced),
            other => Err(Error::Parse(format!("unknown formula `{other}`, expected full or reduced"))),
        }
    }
}

/// How the resolution follows from `(N, K)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Coupling {
    /// `W = Kπ/N`, the smallest resolution admitting `K` tapers.
    #[default]
    Minimal,
    /// `W = (K + 1)π/N`, as used by the estimator.
    Shifted,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum LogBase {
    #[default]
    Two,
    Natural,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct TradeoffPoint {
    pub n: usize,
    pub k: usize,
    pub w: f64,
    pub term1: f64,
    pub term2: f64,
    pub term3: f64,
    /// Absent on points that were only optimized for the reduced surrogate.
    pub term4: Option<f64>,
    pub mse_full: Option<f64>,
    pub mse_reduced: f64,
    pub penalty: f64,
}

impl TradeoffPoint {
    pub fn mse(&self, formula: Formula) -> Option<f64> {
        match formula {
            Formula::Full => self.mse_full,
            Formula::Reduced => Some(self.mse_reduced),
        }
    }
}

/// Surrogate parameters. `b_fy = None` stands for `B_FY = ∞`, under which
/// the full and reduced surrogates coincide.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Tradeoff {
    b_fy: Option<f64>,
    coupling: Coupling,
    log_base: LogBase,
}

impl Tradeoff {
    pub fn new(b_fy: Option<f64>) -> Result<Self> {
        if let Some(b) = b_fy {
            if !(b > 0.0 && b.is_finite()) {
                return Err(Error::Domain(format!("B_FY must be positive, got {b}")));
            }
        }
        Ok(Self { b_fy, coupling: Coupling::default(), log_base: LogBase::default() })
    }

    pub fn with_coupling(mut self, coupling: Coupling) -> Self {
        self.coupling = coupling;
        self
    }

    pub fn with_log_base(mut self, log_base: LogBase) -> Self {
        self.log_base = log_base;
        self
    }

    pub fn b_fy(&self) -> Option<f64> {
        self.b_fy
    }

    pub fn resolution(&self, n: usize, k: usize) -> f64 {
        let steps = match self.coupling {
            Coupling::Minimal => k,
            Coupling::Shifted => k + 1,
        };
        steps as f64 * PI / n as f64
    }

    /// Feasible taper counts: `2 ≤ K ≤ N − 1` with `W < π`.
    pub fn feasible(&self, n: usize) -> std::ops::RangeInclusive<usize> {
        let top = match self.coupling {
            Coupling::Minimal => n.saturating_sub(1),
            Coupling::Shifted => n.saturating_sub(2),
        };
        2..=top
    }

    fn check(&self, n: usize, k: usize) -> Result<()> {
        if n < 5 || n.is_multiple_of(2) {
            return Err(Error::TaperSpec(format!("window length must be odd and at least 5, got {n}")));
        }
        if !self.feasible(n).contains(&k) {
            return Err(Error::TaperSpec(format!("K = {k} is infeasible for N = {n}")));
        }
        Ok(())
    }

    fn closed_terms(&self, n: usize, k: usize) -> (f64, f64, f64, f64) {
        let w = self.resolution(n, k);
        let log_n = match self.log_base {
            LogBase::Two => (n as f64).log2(),
            LogBase::Natural => (n as f64).ln(),
        };
        let kf = k as f64;
        (w, (log_n / kf).powi(2), w.powi(4), 1.0 / kf)
    }

    /// Reduced surrogate, closed form.
    pub fn mse_reduced(&self, n: usize, k: usize) -> Result<f64> {
        self.check(n, k)?;
        let (_, t1, t2, t3) = self.closed_terms(n, k);
        Ok(t1 + t2 + t3)
    }

    /// Full surrogate; computes the `K` tapers for `(N, W)`.
    pub fn mse_full(&self, n: usize, k: usize) -> Result<f64> {
        Ok(self.point(n, k, 0.0)?.mse_full.expect("point computes every term"))
    }

    /// All terms at `(N, K)` with the given penalty.
    pub fn point(&self, n: usize, k: usize, penalty: f64) -> Result<TradeoffPoint> {
        self.check(n, k)?;
        let (w, term1, term2, term3) = self.closed_terms(n, k);
        let term4 = match self.b_fy {
            Some(b) => width_bg(&compute_dpss(TaperSpec::new(n, w, k)?)) / b,
            None => 0.0,
        };
        let mse_reduced = term1 + term2 + term3;
        Ok(TradeoffPoint {
            n,
            k,
            w,
            term1,
            term2,
            term3,
            term4: Some(term4),
            mse_full: Some(mse_reduced + term4),
            mse_reduced,
            penalty,
        })
    }

    /// Lower bound of the full surrogate from the single taper of order
    /// `≈ 0.9 K`, where the widest taper usually sits.
    fn full_lower_bound(&self, n: usize, k: usize, b: f64) -> f64 {
        let (w, t1, t2, t3) = self.closed_terms(n, k);
        t1 + t2 + t3 + taper_width(&dpss_taper(n, w, likely_widest(k))) / b
    }

    /// Exact full surrogate at `(N, K)`, or `None` once the tapers computed
    /// so far already push it above `cutoff`.
    fn full_below(&self, n: usize, k: usize, b: f64, cutoff: f64) -> Option<TradeoffPoint> {
        let (w, term1, term2, term3) = self.closed_terms(n, k);
        let reduced = term1 + term2 + term3;
        let tri = slepian_tridiag(n, w);
        let scale = (2.0 * PI).sqrt().recip();
        let centre = likely_widest(k) as f64;
        let mut orders: Vec<usize> = (0..k).collect();
        orders.sort_by(|&x, &y| (x as f64 - centre).abs().total_cmp(&(y as f64 - centre).abs()));
        let mut widest = 0.0_f64;
        for order in orders {
            widest = widest.max(taper_width(&unit_dpss(&tri, order)) * scale);
            if reduced + widest / b > cutoff {
                return None;
            }
        }
        let term4 = widest / b;
        Some(TradeoffPoint {
            n,
            k,
            w,
            term1,
            term2,
            term3,
            term4: Some(term4),
            mse_full: Some(reduced + term4),
            mse_reduced: reduced,
            penalty: 0.0,
        })
    }

    /// Minimizes `formula + weight·K` over feasible `K`; ties go to the
    /// smaller `K`. Exact: candidates are visited in order of a lower bound
    /// and abandoned as soon as they provably cannot win.
    fn minimize(&self, n: usize, formula: Formula, weight: f64) -> Result<TradeoffPoint> {
        if n < 5 || n.is_multiple_of(2) {
            return Err(Error::TaperSpec(format!("window length must be odd and at least 5, got {n}")));
        }
        if !(weight >= 0.0 && weight.is_finite()) {
            return Err(Error::Domain(format!("penalty weight must be non-negative, got {weight}")));
        }
        let ks: Vec<usize> = self.feasible(n).collect();
        if ks.is_empty() {
            return Err(Error::TaperSpec(format!("no feasible K for N = {n}")));
        }

        let b = match (formula, self.b_fy) {
            (Formula::Full, Some(b)) => b,
            _ => {
                let mut best: Option<(f64, usize)> = None;
                for &k in &ks {
                    let v = self.mse_reduced(n, k)? + weight * k as f64;
                    if best.is_none_or(|(b, _)| v < b) {
                        best = Some((v, k));
                    }
                }
                let k = best.map(|(_, k)| k).unwrap_or(2);
                if formula == Formula::Full {
                    return self.point(n, k, weight * k as f64);
                }
                let (w, term1, term2, term3) = self.closed_terms(n, k);
                return Ok(TradeoffPoint {
                    n,
                    k,
                    w,
                    term1,
                    term2,
                    term3,
                    term4: None,
                    mse_full: None,
                    mse_reduced: term1 + term2 + term3,
                    penalty: weight * k as f64,
                });
            }
        };

        let mut bounds: Vec<(f64, usize)> =
            ks.par_iter().map(|&k| (self.full_lower_bound(n, k, b) + weight * k as f64, k)).collect();
        bounds.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
        let mut best: Option<(f64, TradeoffPoint)> = None;
        for (bound, k) in bounds {
            let penalty = weight * k as f64;
            let cutoff = match best {
                Some((value, ref p)) => {
                    if bound > value || (bound == value && k > p.k) {
                        break;
                    }
                    value - penalty
                }
                None => f64::INFINITY,
            };
            if let Some(mut p) = self.full_below(n, k, b, cutoff) {
                p.penalty = penalty;
                let v = p.mse_full.expect("full point") + penalty;
                let better = match best {
                    None => true,
                    Some((value, ref q)) => v < value || (v == value && k < q.k),
                };
                if better {
                    best = Some((v, p));
                }
            }
        }
        Ok(best.map(|(_, p)| p).expect("at least one feasible K"))
    }

    /// The `K` minimizing the chosen surrogate at window length `N`.
    pub fn optimal_k(&self, n: usize, formula: Formula) -> Result<TradeoffPoint> {
        self.minimize(n, formula, 0.0)
    }

    /// The `K` minimizing `full + weight·K`.
    pub fn penalized_k(&self, n: usize, weight: f64) -> Result<TradeoffPoint> {
        self.minimize(n, Formula::Full, weight)
    }

    /// Optimal points for each window length.
    pub fn curve(&self, ns: &[usize], formula: Formula) -> Result<Vec<TradeoffPoint>> {
        ns.iter().map(|&n| self.optimal_k(n, formula)).collect()
    }

    /// Every feasible `K` at a fixed `N`, each with penalty `weight·K`.
    pub fn k_profile(&self, n: usize, weight: f64) -> Result<Vec<TradeoffPoint>> {
        self.check(n, 2)?;
        self.feasible(n).collect::<Vec<_>>().par_iter().map(|&k| self.point(n, k, weight * k as f64)).collect()
    }
}

/// Odd window lengths in `[lo, hi]` with the given stride (rounded to even
/// so parity is kept).
pub fn odd_lengths(lo: usize, hi: usize, step: usize) -> Result<Vec<usize>> {
    if lo > hi || step == 0 {
        return Err(Error::Domain(format!("invalid range {lo}:{hi}:{step}")));
    }
    let start = (lo | 1).max(5);
    let stride = step + step % 2;
    Ok((start..=hi).step_by(stride).collect())
}

fn cell(v: Option<f64>) -> String {
    v.map(|x| format!("{x:e}")).unwrap_or_default()
}

/// Curve CSV: `N,K_opt,mse,term1,term2,term3,term4,penalty`. Terms that were
/// not computed are left empty.
pub fn write_curve_csv<W: Write>(points: &[TradeoffPoint], formula: Formula, mut out: W) -> Result<()> {
    writeln!(out, "N,K_opt,mse,term1,term2,term3,term4,penalty")?;
    for p in points {
        writeln!(
            out,
            "{},{},{},{:e},{:e},{:e},{},{:e}",
            p.n,
            p.k,
            cell(p.mse(formula)),
            p.term1,
            p.term2,
            p.term3,
            cell(p.term4),
            p.penalty
        )?;
    }
    Ok(())
}

/// Per-`K` CSV: `N,K,W,mse_full,mse_reduced,term1,term2,term3,term4,penalty`.
pub fn write_profile_csv<W: Write>(points: &[TradeoffPoint], mut out: W) -> Result<()> {
    writeln!(out, "N,K,W,mse_full,mse_reduced,term1,term2,term3,term4,penalty")?;
    for p in points {
        writeln!(
            out,
            "{},{},{:e},{},{:e},{:e},{:e},{:e},{},{:e}",
            p.n,
            p.k,
            p.w,
            cell(p.mse_full),
            p.mse_reduced,
            p.term1,
            p.term2,
            p.term3,
            cell(p.term4),
            p.penalty
        )?;
    }
    Ok(())
}
