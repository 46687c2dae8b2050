//! Monte Carlo rejection rates of both tests over simulated replicates.

use rayon::prelude::*;
use serde::Serialize;

use super::{log_table, psr_test, rs_test};
use crate::error::{Error, Result};
use crate::evospec::{GridEstimator, DEFAULT_BUFFER_FRAC, DEFAULT_TAPERS};
use crate::simulate::{simulate, ModelSpec};
use crate::specialfn::ln_gamma;

/// Replicates that fail are excluded; above this fraction the study aborts.
pub const MAX_EXCLUDED_FRACTION: f64 = 0.01;

#[derive(Debug, Clone, PartialEq)]
pub struct McConfig {
    pub replicates: usize,
    pub len: usize,
    pub alpha: f64,
    pub seed: u64,
    pub k: usize,
    pub blocks: Option<usize>,
    pub buffer_frac: f64,
}

impl Default for McConfig {
    fn default() -> Self {
        Self {
            replicates: 1000,
            len: 512,
            alpha: 0.05,
            seed: 0,
            k: DEFAULT_TAPERS,
            blocks: None,
            buffer_frac: DEFAULT_BUFFER_FRAC,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSummary {
    pub rejections: usize,
    pub rate: f64,
    /// Clopper–Pearson 95% interval.
    pub ci_low: f64,
    pub ci_high: f64,
}

impl RateSummary {
    fn new(rejections: usize, trials: usize) -> Result<Self> {
        let (ci_low, ci_high) = clopper_pearson(rejections, trials, 0.95)?;
        Ok(Self { rejections, rate: rejections as f64 / trials as f64, ci_low, ci_high })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct McSummary {
    pub model: String,
    pub replicates: usize,
    pub excluded: usize,
    pub len: usize,
    pub alpha: f64,
    pub seed: u64,
    pub k: usize,
    pub psr: RateSummary,
    pub rs: RateSummary,
}

/// Runs `cfg.replicates` independent replicates; replicate `r` uses the
/// seed `cfg.seed ^ r`, so results do not depend on scheduling.
pub fn mc_study(model: &ModelSpec, label: &str, cfg: &McConfig) -> Result<McSummary> {
    if cfg.replicates == 0 {
        return Err(Error::Study("at least one replicate is required".into()));
    }
    model.validate()?;
    let estimator = GridEstimator::new(cfg.len, cfg.k, cfg.blocks, cfg.buffer_frac)?;

    let outcomes: Vec<Result<(bool, bool)>> = (0..cfg.replicates as u64)
        .into_par_iter()
        .map(|r| {
            let x = simulate(model, cfg.len, cfg.seed ^ r)?;
            let table = log_table(&estimator.estimate(&x)?)?;
            let psr = psr_test(&table, cfg.alpha)?;
            let rs = rs_test(&table, cfg.alpha)?;
            Ok((psr.decision.rejects_stationarity(), rs.decision.rejects_stationarity()))
        })
        .collect();

    let mut excluded = 0;
    let (mut psr_rej, mut rs_rej) = (0, 0);
    for (r, outcome) in outcomes.into_iter().enumerate() {
        match outcome {
            Ok((p, q)) => {
                psr_rej += p as usize;
                rs_rej += q as usize;
            }
            Err(e) => {
                log::warn!("replicate {r} excluded: {e}");
                excluded += 1;
            }
        }
    }
    if excluded as f64 > MAX_EXCLUDED_FRACTION * cfg.replicates as f64 {
        return Err(Error::Study(format!(
            "{excluded} of {} replicates failed, more than {}%",
            cfg.replicates,
            MAX_EXCLUDED_FRACTION * 100.0
        )));
    }
    let used = cfg.replicates - excluded;
    if used == 0 {
        return Err(Error::Study("no replicate succeeded".into()));
    }
    Ok(McSummary {
        model: label.to_string(),
        replicates: cfg.replicates,
        excluded,
        len: cfg.len,
        alpha: cfg.alpha,
        seed: cfg.seed,
        k: cfg.k,
        psr: RateSummary::new(psr_rej, used)?,
        rs: RateSummary::new(rs_rej, used)?,
    })
}

fn ln_choose(n: usize, k: usize) -> Result<f64> {
    Ok(ln_gamma(n as f64 + 1.0)? - ln_gamma(k as f64 + 1.0)? - ln_gamma((n - k) as f64 + 1.0)?)
}

/// `P(X ≤ x)` for `X ~ Binomial(n, p)`.
fn binomial_cdf(x: usize, n: usize, p: f64, coeffs: &[f64]) -> f64 {
    if p <= 0.0 {
        return 1.0;
    }
    if p >= 1.0 {
        return if x >= n { 1.0 } else { 0.0 };
    }
    let (lp, lq) = (p.ln(), (-p).ln_1p());
    (0..=x).map(|i| (coeffs[i] + i as f64 * lp + (n - i) as f64 * lq).exp()).sum::<f64>().min(1.0)
}

/// Exact (Clopper–Pearson) binomial confidence interval.
pub fn clopper_pearson(successes: usize, trials: usize, level: f64) -> Result<(f64, f64)> {
    if trials == 0 || successes > trials {
        return Err(Error::Domain(format!("{successes} successes out of {trials} trials")));
    }
    if !(level > 0.0 && level < 1.0) {
        return Err(Error::Domain(format!("confidence level {level} outside (0, 1)")));
    }
    let tail = 0.5 * (1.0 - level);
    let coeffs = (0..=trials).map(|i| ln_choose(trials, i)).collect::<Result<Vec<_>>>()?;
    // P(X ≤ x | p) decreases in p
    let solve = |x: usize, target: f64| {
        let (mut lo, mut hi) = (0.0_f64, 1.0_f64);
        for _ in 0..100 {
            let mid = 0.5 * (lo + hi);
            if binomial_cdf(x, trials, mid, &coeffs) > target {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        0.5 * (lo + hi)
    };
    let low = if successes == 0 { 0.0 } else { solve(successes - 1, 1.0 - tail) };
    let high = if successes == trials { 1.0 } else { solve(successes, tail) };
    Ok((low, high))
}
