//! Discrete prolate spheroidal sequences (Slepian tapers).
//!
//! Tapers are the eigenvectors of the classical symmetric tridiagonal matrix
//! that commutes with the index-limited sinc concentration operator
//!
//! ```text
//! S[u, u'] = sin(W (u − u')) / (π (u − u')),   S[u, u] = W / π
//! ```
//!
//! and their concentration eigenvalues are recovered afterwards as the
//! quadratic forms `vᵀ S v`. Tapers are indexed by the centred lag
//! `u ∈ [−(N−1)/2, (N−1)/2]` and scaled so that `2π Σ_u g(u)² = 1`.
//!
//! Frequencies are angular, in radians on `[−π, π]`.

use std::f64::consts::PI;
use std::io::{BufRead, Write};

use crate::error::{Error, Result};
use crate::tridiag::SymTridiag;

/// Slack used when counting how many tapers a resolution admits, so that
/// `W = Kπ/N` is not lost to rounding in `⌊NW/π⌋`.
const COUNT_SLACK: f64 = 1e-9;

/// Largest `K` with `K ≤ NW/π`.
pub fn shannon_count(n: usize, half_bandwidth: f64) -> usize {
    (n as f64 * half_bandwidth / PI + COUNT_SLACK).floor() as usize
}

/// Taper length, angular half-bandwidth and taper count.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaperSpec {
    n: usize,
    half_bandwidth: f64,
    k: usize,
}

impl TaperSpec {
    /// Validates `N` odd and at least 3, `2π/N ≤ W < π` and
    /// `1 ≤ K ≤ ⌊NW/π⌋`.
    pub fn new(n: usize, half_bandwidth: f64, k: usize) -> Result<Self> {
        if n < 3 || n.is_multiple_of(2) {
            return Err(Error::TaperSpec(format!("taper length must be odd and at least 3, got {n}")));
        }
        let lower = 2.0 * PI / n as f64;
        if !(half_bandwidth.is_finite() && half_bandwidth >= lower * (1.0 - 1e-12) && half_bandwidth < PI) {
            return Err(Error::TaperSpec(format!(
                "half-bandwidth {half_bandwidth} outside [2π/N, π) = [{lower}, {PI})"
            )));
        }
        if k == 0 {
            return Err(Error::TaperSpec("at least one taper is required".into()));
        }
        let max_k = shannon_count(n, half_bandwidth);
        if k > max_k {
            return Err(Error::TaperSpec(format!(
                "K = {k} exceeds ⌊NW/π⌋ = {max_k} for N = {n}, W = {half_bandwidth}"
            )));
        }
        Ok(Self { n, half_bandwidth, k })
    }

    /// `W = (K + 1)π/N`, the resolution the estimator pairs with `K` tapers.
    pub fn for_estimator(n: usize, k: usize) -> Result<Self> {
        Self::new(n, (k + 1) as f64 * PI / n as f64, k)
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn half_bandwidth(&self) -> f64 {
        self.half_bandwidth
    }

    pub fn k(&self) -> usize {
        self.k
    }

    /// `(N − 1) / 2`
    pub fn half_len(&self) -> usize {
        (self.n - 1) / 2
    }
}

/// `K` normalized Slepian tapers with their concentration eigenvalues.
#[derive(Debug, Clone, PartialEq)]
pub struct TaperSet {
    spec: TaperSpec,
    tapers: Vec<Vec<f64>>,
    eigenvalues: Vec<f64>,
}

impl TaperSet {
    /// Builds a taper set from externally supplied sequences.
    ///
    /// Each taper must have length `N` and satisfy `2π Σ g² = 1` to 1e-9.
    pub fn from_parts(spec: TaperSpec, tapers: Vec<Vec<f64>>, eigenvalues: Vec<f64>) -> Result<Self> {
        if tapers.len() != spec.k || eigenvalues.len() != spec.k {
            return Err(Error::TaperSpec(format!(
                "expected {} tapers and eigenvalues, got {} and {}",
                spec.k,
                tapers.len(),
                eigenvalues.len()
            )));
        }
        for (i, g) in tapers.iter().enumerate() {
            if g.len() != spec.n {
                return Err(Error::TaperSpec(format!("taper {i} has length {}, expected {}", g.len(), spec.n)));
            }
            let energy = 2.0 * PI * g.iter().map(|v| v * v).sum::<f64>();
            if (energy - 1.0).abs() > 1e-9 {
                return Err(Error::TaperSpec(format!("taper {i} has 2πΣg² = {energy}, expected 1")));
            }
        }
        Ok(Self { spec, tapers, eigenvalues })
    }

    pub fn spec(&self) -> &TaperSpec {
        &self.spec
    }

    pub fn n(&self) -> usize {
        self.spec.n
    }

    pub fn k(&self) -> usize {
        self.spec.k
    }

    pub fn half_bandwidth(&self) -> f64 {
        self.spec.half_bandwidth
    }

    /// Taper `k` sampled at `u = −(N−1)/2, …, (N−1)/2`.
    pub fn taper(&self, k: usize) -> &[f64] {
        &self.tapers[k]
    }

    pub fn tapers(&self) -> &[Vec<f64>] {
        &self.tapers
    }

    pub fn eigenvalues(&self) -> &[f64] {
        &self.eigenvalues
    }

    /// `B_{g_k}` for every taper.
    pub fn widths(&self) -> Vec<f64> {
        self.tapers.iter().map(|g| taper_width(g)).collect()
    }

    /// Writes the taper cache format: a `N,W,K` line, then one line of `N`
    /// comma-separated values per taper.
    pub fn write_cache<W: Write>(&self, mut out: W) -> Result<()> {
        writeln!(out, "{},{:e},{}", self.spec.n, self.spec.half_bandwidth, self.spec.k)?;
        for g in &self.tapers {
            let row: Vec<String> = g.iter().map(|v| format!("{v:e}")).collect();
            writeln!(out, "{}", row.join(","))?;
        }
        Ok(())
    }

    /// Reads a cache written by [`TaperSet::write_cache`]; eigenvalues are
    /// recomputed from the stored tapers.
    pub fn read_cache<R: BufRead>(input: R) -> Result<Self> {
        let mut lines = input.lines();
        let header = lines.next().ok_or_else(|| Error::Parse("empty taper cache".into()))??;
        let fields: Vec<&str> = header.trim().split(',').collect();
        if fields.len() != 3 {
            return Err(Error::Parse(format!("taper cache header `{header}` is not N,W,K")));
        }
        let parse_err = |what: &str| Error::Parse(format!("taper cache header: bad {what}"));
        let n: usize = fields[0].trim().parse().map_err(|_| parse_err("N"))?;
        let w: f64 = fields[1].trim().parse().map_err(|_| parse_err("W"))?;
        let k: usize = fields[2].trim().parse().map_err(|_| parse_err("K"))?;
        let spec = TaperSpec::new(n, w, k)?;
        let mut tapers = Vec::with_capacity(k);
        for (row, line) in lines.enumerate() {
            let line = line?;
            if line.trim().is_empty() {
                continue;
            }
            let values = line
                .split(',')
                .map(|s| s.trim().parse::<f64>())
                .collect::<std::result::Result<Vec<_>, _>>()
                .map_err(|e| Error::Parse(format!("taper cache row {}: {e}", row + 1)))?;
            tapers.push(values);
        }
        let eigenvalues = tapers.iter().map(|g| concentration(g, w)).collect();
        Self::from_parts(spec, tapers, eigenvalues)
    }
}

pub(crate) fn slepian_tridiag(n: usize, half_bandwidth: f64) -> SymTridiag {
    let c = half_bandwidth.cos();
    let mid = (n as f64 - 1.0) / 2.0;
    let diag = (0..n).map(|i| (mid - i as f64).powi(2) * c).collect();
    let off = (1..n).map(|i| 0.5 * (i * (n - i)) as f64).collect();
    SymTridiag::new(diag, off)
}

/// Sign convention: even tapers have positive sum, odd tapers are positive
/// over the first half of the window.
fn fix_sign(v: &mut [f64], order: usize) {
    let reference: f64 = if order.is_multiple_of(2) { v.iter().sum() } else { v[..v.len() / 2].iter().sum() };
    if reference < 0.0 {
        v.iter_mut().for_each(|x| *x = -*x);
    }
}

/// Unit-norm DPSS of the given order, without computing its eigenvalue.
pub(crate) fn unit_dpss(tri: &SymTridiag, order: usize) -> Vec<f64> {
    let n = tri.dim();
    let mu = tri.eigenvalue_ascending(n - 1 - order);
    let mut v = tri.eigenvector(mu);
    fix_sign(&mut v, order);
    v
}

/// Taper of the given order scaled to `2π Σ g² = 1`.
pub(crate) fn dpss_taper(n: usize, half_bandwidth: f64, order: usize) -> Vec<f64> {
    let tri = slepian_tridiag(n, half_bandwidth);
    let scale = (2.0 * PI).sqrt().recip();
    unit_dpss(&tri, order).into_iter().map(|v| v * scale).collect()
}

/// `vᵀ S v / vᵀ v` for the sinc concentration matrix.
fn concentration(v: &[f64], half_bandwidth: f64) -> f64 {
    let n = v.len();
    let norm: f64 = v.iter().map(|x| x * x).sum();
    let mut total = half_bandwidth / PI * norm;
    for lag in 1..n {
        let r: f64 = v[..n - lag].iter().zip(&v[lag..]).map(|(a, b)| a * b).sum();
        total += 2.0 * (half_bandwidth * lag as f64).sin() / (PI * lag as f64) * r;
    }
    total / norm
}

/// The `K` leading Slepian tapers for `spec`.
pub fn compute_dpss(spec: TaperSpec) -> TaperSet {
    let tri = slepian_tridiag(spec.n, spec.half_bandwidth);
    let scale = (2.0 * PI).sqrt().recip();
    let mut tapers = Vec::with_capacity(spec.k);
    let mut eigenvalues = Vec::with_capacity(spec.k);
    for order in 0..spec.k {
        let v = unit_dpss(&tri, order);
        eigenvalues.push(concentration(&v, spec.half_bandwidth));
        tapers.push(v.into_iter().map(|x| x * scale).collect());
    }
    TaperSet { spec, tapers, eigenvalues }
}

/// `Σ_u |u| |g(u)|` over centred lags.
pub fn taper_width(g: &[f64]) -> f64 {
    let mid = (g.len() as f64 - 1.0) / 2.0;
    g.iter().enumerate().map(|(i, v)| (i as f64 - mid).abs() * v.abs()).sum()
}

/// `B_g^{(K)} = max_k B_{g_k}`.
pub fn width_bg(ts: &TaperSet) -> f64 {
    ts.tapers.iter().map(|g| taper_width(g)).fold(0.0, f64::max)
}

struct WindowEval<'a> {
    ts: &'a TaperSet,
    lags: Vec<f64>,
}

impl<'a> WindowEval<'a> {
    fn new(ts: &'a TaperSet) -> Self {
        let mid = ts.spec.half_len() as f64;
        Self { ts, lags: (0..ts.n()).map(|i| i as f64 - mid).collect() }
    }

    fn at(&self, lambda: f64) -> f64 {
        let (sin, cos): (Vec<f64>, Vec<f64>) = self.lags.iter().map(|u| (lambda * u).sin_cos()).unzip();
        let total: f64 = self
            .ts
            .tapers
            .iter()
            .map(|g| {
                let re: f64 = g.iter().zip(&cos).map(|(a, c)| a * c).sum();
                let im: f64 = g.iter().zip(&sin).map(|(a, s)| a * s).sum();
                re * re + im * im
            })
            .sum();
        total / self.ts.k() as f64
    }
}

/// The averaged spectral window `ρ_K(λ) = (1/K) Σ_k |G_k(λ)|²`.
pub fn spectral_window(ts: &TaperSet, lambdas: &[f64]) -> Vec<f64> {
    let eval = WindowEval::new(ts);
    lambdas.iter().map(|&l| eval.at(l)).collect()
}

/// `‖ρ_K − (1/2W)·1_{[−W, W]}‖₁` over `[−π, π]`.
pub fn l1_concentration(ts: &TaperSet) -> f64 {
    let eval = WindowEval::new(ts);
    let w = ts.half_bandwidth();
    let height = 0.5 / w;
    let inside = |x: f64| (eval.at(x) - height).abs();
    let outside = |x: f64| eval.at(x);

    // sidelobes repeat every 2π/N; panels of half that width resolve them
    let panel = PI / ts.n() as f64;
    let abs_tol = 1e-7;
    // ρ_K is even, so integrate over [0, π] and double
    let half = integrate_panels(&inside, 0.0, w, panel, abs_tol * w / PI)
        + integrate_panels(&outside, w, PI, panel, abs_tol * (PI - w) / PI);
    2.0 * half
}

// 7-point Gauss / 15-point Kronrod pair on [−1, 1]
const XGK: [f64; 8] = [
    0.991_455_371_120_812_6,
    0.949_107_912_342_758_5,
    0.864_864_423_359_769_1,
    0.741_531_185_599_394_4,
    0.586_087_235_467_691_1,
    0.405_845_151_377_397_2,
    0.207_784_955_007_898_5,
    0.0,
];
const WGK: [f64; 8] = [
    0.022_935_322_010_529_22,
    0.063_092_092_629_978_55,
    0.104_790_010_322_250_18,
    0.140_653_259_715_525_92,
    0.169_004_726_639_267_9,
    0.190_350_578_064_785_4,
    0.204_432_940_075_298_9,
    0.209_482_141_084_727_83,
];
const WG: [f64; 4] =
    [0.129_484_966_168_869_7, 0.279_705_391_489_276_7, 0.381_830_050_505_118_9, 0.417_959_183_673_469_4];

fn gauss_kronrod<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64) -> (f64, f64) {
    let center = 0.5 * (a + b);
    let half = 0.5 * (b - a);
    let fc = f(center);
    let mut kronrod = WGK[7] * fc;
    let mut gauss = WG[3] * fc;
    for j in 0..7 {
        let dx = half * XGK[j];
        let sum = f(center - dx) + f(center + dx);
        kronrod += WGK[j] * sum;
        if j % 2 == 1 {
            gauss += WG[j / 2] * sum;
        }
    }
    (kronrod * half, ((kronrod - gauss) * half).abs())
}

fn adaptive<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, tol: f64, depth: u32) -> f64 {
    let (value, err) = gauss_kronrod(f, a, b);
    if err <= tol || depth == 0 {
        return value;
    }
    let mid = 0.5 * (a + b);
    adaptive(f, a, mid, 0.5 * tol, depth - 1) + adaptive(f, mid, b, 0.5 * tol, depth - 1)
}

fn integrate_panels<F: Fn(f64) -> f64>(f: &F, a: f64, b: f64, panel: f64, tol: f64) -> f64 {
    if b <= a {
        return 0.0;
    }
    let count = ((b - a) / panel).ceil().max(1.0) as usize;
    let step = (b - a) / count as f64;
    (0..count)
        .map(|i| {
            let lo = a + i as f64 * step;
            let hi = if i + 1 == count { b } else { lo + step };
            adaptive(f, lo, hi, tol / count as f64, 30)
        })
        .sum()
}
