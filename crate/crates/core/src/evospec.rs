//! Multitaper estimate of the evolutionary spectral density on a
//! time-frequency grid:
//!
//! ```text
//! f̂_t(w) = (1/K) Σ_k | Σ_{u=t−(N−1)/2}^{t+(N−1)/2} g_k(u − t) X(u) e^{−iwu} |²
//! ```
//!
//! Blocks are non-overlapping and frequencies are spaced
//! `B = 2π(K+1)/(N+1)` apart, which keeps grid cells approximately
//! independent for the stationarity tests.

use std::f64::consts::PI;
use std::io::Write;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::simulate::TimeSeries;
use crate::taper::{compute_dpss, TaperSet, TaperSpec};

pub const DEFAULT_TAPERS: usize = 5;
pub const DEFAULT_BUFFER_FRAC: f64 = 0.7;
pub const MIN_SERIES_LEN: usize = 32;

/// Block centres, frequencies and the sampling parameters behind them.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct TFGrid {
    block_centers: Vec<usize>,
    freqs: Vec<f64>,
    n: usize,
    k: usize,
    spacing: f64,
    buffer: f64,
}

impl TFGrid {
    pub fn block_centers(&self) -> &[usize] {
        &self.block_centers
    }

    pub fn freqs(&self) -> &[f64] {
        &self.freqs
    }

    /// Block length `N`.
    pub fn n(&self) -> usize {
        self.n
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// Number of blocks `I`.
    pub fn i(&self) -> usize {
        self.block_centers.len()
    }

    /// Number of frequencies `J`.
    pub fn j(&self) -> usize {
        self.freqs.len()
    }

    /// Frequency spacing `B` in radians.
    pub fn spacing(&self) -> f64 {
        self.spacing
    }

    pub fn buffer(&self) -> f64 {
        self.buffer
    }

    /// Number of samples the grid reads, `I·N`.
    pub fn span(&self) -> usize {
        self.i() * self.n
    }

    /// Taper spec paired with this grid, `W = (K+1)π/N`.
    pub fn taper_spec(&self) -> Result<TaperSpec> {
        TaperSpec::for_estimator(self.n, self.k)
    }
}

/// Default block count `max(2, ⌊log₂ T⌋)`.
pub fn default_blocks(len: usize) -> usize {
    let log2 = (usize::BITS - 1 - len.max(1).leading_zeros()) as usize;
    log2.max(2)
}

/// Lays out `I` disjoint blocks of odd length `N ≤ ⌊T/I⌋` starting at
/// sample 0, and frequencies `buffer, buffer + B, …` up to `π − buffer`.
pub fn build_grid(len: usize, k: usize, blocks: Option<usize>, buffer_frac: f64) -> Result<TFGrid> {
    if len < MIN_SERIES_LEN {
        return Err(Error::Grid(format!("series length {len} is below the minimum of {MIN_SERIES_LEN}")));
    }
    if k == 0 {
        return Err(Error::Grid("taper count K must be at least 1".into()));
    }
    if !(0.5..=1.0).contains(&buffer_frac) {
        return Err(Error::Grid(format!("buffer fraction {buffer_frac} outside [0.5, 1.0]")));
    }
    let i = blocks.unwrap_or_else(|| default_blocks(len));
    if i < 2 {
        return Err(Error::Grid(format!("block count I = {i} must be at least 2")));
    }
    let mut n = len / i;
    if n.is_multiple_of(2) {
        n = n.saturating_sub(1);
    }
    if n < 2 * k + 1 {
        return Err(Error::Grid(format!(
            "block length N = {n} is below 2K+1 = {} (T = {len}, I = {i}, K = {k})",
            2 * k + 1
        )));
    }
    let spacing = 2.0 * PI * (k + 1) as f64 / (n + 1) as f64;
    let buffer = buffer_frac * spacing;
    let top = PI - buffer;
    let mut freqs = Vec::new();
    let mut w = buffer;
    while w <= top + 1e-12 {
        freqs.push(w);
        w = buffer + freqs.len() as f64 * spacing;
    }
    if freqs.len() < 2 {
        return Err(Error::Grid(format!(
            "only J = {} frequencies fit between buffers of {buffer:.4} rad with spacing B = {spacing:.4} rad; need J ≥ 2",
            freqs.len()
        )));
    }
    let half = (n - 1) / 2;
    let block_centers = (0..i).map(|b| b * n + half).collect();
    Ok(TFGrid { block_centers, freqs, n, k, spacing, buffer })
}

fn check_block(x: &TimeSeries, t: usize, half: usize) -> Result<()> {
    if t < half || t + half >= x.len() {
        return Err(Error::Series(format!(
            "block [{}, {}] around t = {t} is outside the series of length {}",
            t as i64 - half as i64,
            t + half,
            x.len()
        )));
    }
    Ok(())
}

/// `(1/K) Σ_k |U_t^{(k)}(w)|²` with the global phase `e^{−iwt}` dropped.
///
/// `t` indexes into `x.values()`; the block `t ± (N−1)/2` must lie inside.
pub fn estimate_at(x: &TimeSeries, t: usize, w: f64, ts: &TaperSet) -> Result<f64> {
    let half = ts.spec().half_len();
    check_block(x, t, half)?;
    let (sin, cos) = phases(w, half);
    Ok(block_estimate(&x.values()[t - half..=t + half], &sin, &cos, ts))
}

fn phases(w: f64, half: usize) -> (Vec<f64>, Vec<f64>) {
    (0..2 * half + 1).map(|i| (w * (i as f64 - half as f64)).sin_cos()).unzip()
}

fn block_estimate(block: &[f64], sin: &[f64], cos: &[f64], ts: &TaperSet) -> f64 {
    let mut total = 0.0;
    for g in ts.tapers() {
        let mut re = 0.0;
        let mut im = 0.0;
        for ((&gv, &xv), (&s, &c)) in g.iter().zip(block).zip(sin.iter().zip(cos)) {
            let v = gv * xv;
            re += v * c;
            im -= v * s;
        }
        total += re * re + im * im;
    }
    total / ts.k() as f64
}

/// The estimates `f̂_{t_i}(w_j)` on a grid.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SpectralEstimate {
    grid: TFGrid,
    values: Vec<Vec<f64>>,
}

impl SpectralEstimate {
    pub fn grid(&self) -> &TFGrid {
        &self.grid
    }

    /// Row `i` holds block `i`, column `j` frequency `j`.
    pub fn values(&self) -> &[Vec<f64>] {
        &self.values
    }

    pub fn k(&self) -> usize {
        self.grid.k
    }

    /// CSV with a header row of frequencies and a leading column of block
    /// centres.
    pub fn write_csv<W: Write>(&self, mut out: W) -> Result<()> {
        let header: Vec<String> = self.grid.freqs.iter().map(|w| format!("{w:e}")).collect();
        writeln!(out, "t,{}", header.join(","))?;
        for (t, row) in self.grid.block_centers.iter().zip(&self.values) {
            let cells: Vec<String> = row.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{t},{}", cells.join(","))?;
        }
        Ok(())
    }
}

/// Evaluates the estimator on every grid cell.
pub fn estimate_grid(x: &TimeSeries, grid: &TFGrid, ts: &TaperSet) -> Result<SpectralEstimate> {
    if ts.n() != grid.n || ts.k() != grid.k {
        return Err(Error::Grid(format!(
            "grid expects N = {}, K = {} but tapers have N = {}, K = {}",
            grid.n,
            grid.k,
            ts.n(),
            ts.k()
        )));
    }
    if x.len() < grid.span() {
        return Err(Error::Series(format!(
            "series of length {} is shorter than the grid span {}",
            x.len(),
            grid.span()
        )));
    }
    let half = ts.spec().half_len();
    let tables: Vec<(Vec<f64>, Vec<f64>)> = grid.freqs.iter().map(|&w| phases(w, half)).collect();
    let values = grid
        .block_centers
        .iter()
        .map(|&t| {
            let block = &x.values()[t - half..=t + half];
            tables.iter().map(|(s, c)| block_estimate(block, s, c, ts)).collect()
        })
        .collect();
    Ok(SpectralEstimate { grid: grid.clone(), values })
}

/// A grid with its matching tapers, reusable across series of one length.
#[derive(Debug, Clone)]
pub struct GridEstimator {
    grid: TFGrid,
    tapers: TaperSet,
}

impl GridEstimator {
    pub fn new(len: usize, k: usize, blocks: Option<usize>, buffer_frac: f64) -> Result<Self> {
        let grid = build_grid(len, k, blocks, buffer_frac)?;
        let tapers = compute_dpss(grid.taper_spec()?);
        Ok(Self { grid, tapers })
    }

    pub fn grid(&self) -> &TFGrid {
        &self.grid
    }

    pub fn tapers(&self) -> &TaperSet {
        &self.tapers
    }

    pub fn estimate(&self, x: &TimeSeries) -> Result<SpectralEstimate> {
        estimate_grid(x, &self.grid, &self.tapers)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{model_catalog, simulate, ModelId};

    fn series(values: Vec<f64>) -> TimeSeries {
        TimeSeries::new(values, 0, "test").unwrap()
    }

    #[test]
    fn default_grid_for_512() {
        let g = build_grid(512, 5, None, 0.7).unwrap();
        assert_eq!(g.i(), 9);
        assert_eq!(g.n(), 55);
        assert!((g.spacing() - 12.0 * PI / 56.0).abs() < 1e-12);
        assert!((g.spacing() - 0.6732).abs() < 1e-4);
        assert!((g.freqs()[0] - 0.4712).abs() < 1e-4);
        assert_eq!(g.j(), 4);
        assert_eq!(g.block_centers()[0], 27);
        assert_eq!(*g.block_centers().last().unwrap(), 8 * 55 + 27);
        for pair in g.freqs().windows(2) {
            assert!((pair[1] - pair[0] - g.spacing()).abs() < 1e-12);
        }
        assert!(*g.freqs().last().unwrap() <= PI - g.buffer() + 1e-12);
    }

    #[test]
    fn minimal_override_grid() {
        let g = build_grid(64, 1, Some(2), 0.7).unwrap();
        assert_eq!(g.i(), 2);
        assert_eq!(g.n(), 31);
        assert_eq!(g.block_centers(), &[15, 46]);
        assert!(g.span() <= 64);
    }

    #[test]
    fn grid_rejections_name_the_constraint() {
        assert!(build_grid(31, 5, None, 0.7).unwrap_err().to_string().contains("minimum"));
        assert!(build_grid(512, 5, None, 0.4).unwrap_err().to_string().contains("buffer"));
        assert!(build_grid(64, 20, Some(2), 0.7).unwrap_err().to_string().contains("2K+1"));
        assert!(build_grid(64, 6, Some(2), 1.0).unwrap_err().to_string().contains("J = 1"));
        assert!(build_grid(512, 5, Some(1), 0.7).is_err());
        assert!(build_grid(512, 0, None, 0.7).is_err());
    }

    #[test]
    fn zero_series_gives_zero() {
        let est = GridEstimator::new(512, 5, None, 0.7).unwrap();
        let x = series(vec![0.0; 512]);
        assert_eq!(estimate_at(&x, 100, 1.0, est.tapers()).unwrap(), 0.0);
    }

    #[test]
    fn out_of_range_block_rejected() {
        let est = GridEstimator::new(512, 5, None, 0.7).unwrap();
        let x = series(vec![1.0; 512]);
        assert!(estimate_at(&x, 26, 1.0, est.tapers()).is_err());
        assert!(estimate_at(&x, 27, 1.0, est.tapers()).is_ok());
        assert!(estimate_at(&x, 484, 1.0, est.tapers()).is_ok());
        assert!(estimate_at(&x, 485, 1.0, est.tapers()).is_err());
    }

    #[test]
    fn sinusoid_leakage_is_suppressed() {
        let est = GridEstimator::new(512, 5, None, 0.7).unwrap();
        let w0 = est.grid().freqs()[0];
        let b = est.grid().spacing();
        let x = series((0..512).map(|u| (w0 * u as f64).cos()).collect());
        let on = estimate_at(&x, 200, w0, est.tapers()).unwrap();
        let off = estimate_at(&x, 200, w0 + 4.0 * b, est.tapers()).unwrap();
        assert!(on > 10.0 * off, "{on} vs {off}");
    }

    #[test]
    fn white_noise_mean_is_calibrated() {
        let est = GridEstimator::new(512, 5, None, 0.7).unwrap();
        let t = est.grid().block_centers()[4];
        let mean: f64 = (0..500)
            .map(|seed| {
                let x = simulate(&model_catalog(ModelId::A), 512, seed).unwrap();
                estimate_at(&x, t, PI / 2.0, est.tapers()).unwrap()
            })
            .sum::<f64>()
            / 500.0;
        assert!((0.14..=0.18).contains(&mean), "{mean}");
    }

    #[test]
    fn scaling_and_sign_flip() {
        let est = GridEstimator::new(512, 5, None, 0.7).unwrap();
        let x = simulate(&model_catalog(ModelId::B), 512, 3).unwrap();
        let base = est.estimate(&x).unwrap();
        let scaled = est.estimate(&x.scaled(3.0).unwrap()).unwrap();
        let flipped = est.estimate(&x.scaled(-1.0).unwrap()).unwrap();
        for ((a, b), c) in
            base.values().iter().flatten().zip(scaled.values().iter().flatten()).zip(flipped.values().iter().flatten())
        {
            assert!((b - 9.0 * a).abs() <= 1e-12 * b.abs());
            assert!((c - a).abs() <= 1e-12 * a.abs());
        }
    }

    #[test]
    fn time_shift_consistency() {
        let est = GridEstimator::new(512, 5, None, 0.7).unwrap();
        let x = simulate(&model_catalog(ModelId::D), 512, 8).unwrap();
        let mut padded = vec![0.25; 37];
        padded.extend_from_slice(x.values());
        let y = series(padded);
        for &t in est.grid().block_centers() {
            for &w in est.grid().freqs() {
                let a = estimate_at(&x, t, w, est.tapers()).unwrap();
                let b = estimate_at(&y, t + 37, w, est.tapers()).unwrap();
                assert!((a - b).abs() < 1e-10);
            }
        }
    }

    #[test]
    fn ar1_column_means_decrease() {
        let est = GridEstimator::new(512, 5, None, 0.7).unwrap();
        let j = est.grid().j();
        let mut sums = vec![0.0; j];
        for seed in 0..50 {
            let x = simulate(&model_catalog(ModelId::B), 512, seed).unwrap();
            let e = est.estimate(&x).unwrap();
            for row in e.values() {
                for (s, v) in sums.iter_mut().zip(row) {
                    *s += v;
                }
            }
        }
        for pair in sums.windows(2) {
            assert!(pair[0] > pair[1], "{sums:?}");
        }
    }

    #[test]
    fn mismatched_tapers_rejected() {
        let grid = build_grid(512, 5, None, 0.7).unwrap();
        let other = compute_dpss(TaperSpec::for_estimator(55, 4).unwrap());
        let x = series(vec![1.0; 512]);
        assert!(estimate_grid(&x, &grid, &other).is_err());
        let short = series(vec![1.0; 400]);
        let ts = compute_dpss(grid.taper_spec().unwrap());
        assert!(estimate_grid(&short, &grid, &ts).is_err());
    }

    #[test]
    fn csv_layout() {
        let est = GridEstimator::new(64, 1, Some(2), 0.7).unwrap();
        let x = series((0..64).map(|v| (v as f64).sin()).collect());
        let e = est.estimate(&x).unwrap();
        let mut buf = Vec::new();
        e.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let lines: Vec<&str> = text.lines().collect();
        assert_eq!(lines.len(), 3);
        assert!(lines[0].starts_with("t,"));
        assert_eq!(lines[0].split(',').count(), e.grid().j() + 1);
        assert!(lines[1].starts_with("15,"));
        let v: f64 = lines[1].split(',').nth(1).unwrap().parse().unwrap();
        assert_eq!(v, e.values()[0][0]);
    }
}
