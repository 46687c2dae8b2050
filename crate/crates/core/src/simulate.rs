//! Sample paths of stationary ARMA processes and of uniformly modulated
//! processes `X(t) = c(t) Y(t)`.

use std::fmt;
use std::str::FromStr;

use nalgebra::DMatrix;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Distribution, StandardNormal};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Minimum burn-in length discarded before the returned samples.
pub const MIN_BURN_IN: usize = 1000;

/// Modulation width used by the power-study models.
pub const POWER_BUMP_WIDTH: f64 = 200.0;

/// Sign of the exponent in the Gaussian modulation `exp(±(t − T/2)² / 2a²)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum BumpSign {
    /// `exp(+(t − T/2)²/(2a²))`, growing toward the edges.
    Plus,
    /// `exp(−(t − T/2)²/(2a²))`, a bump peaking at the centre.
    Minus,
}

impl BumpSign {
    fn factor(self) -> f64 {
        match self {
            BumpSign::Plus => 1.0,
            BumpSign::Minus => -1.0,
        }
    }
}

impl FromStr for BumpSign {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "+" | "+1" | "1" | "plus" => Ok(BumpSign::Plus),
            "-" | "-1" | "minus" => Ok(BumpSign::Minus),
            other => Err(Error::Parse(format!("envelope sign `{other}` is not one of +1, -1"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Envelope {
    None,
    GaussianBump { a: f64, sign: BumpSign },
}

impl Envelope {
    /// `c(t)` for a series of length `len`; centred at `len / 2`.
    pub fn factor(&self, t: usize, len: usize) -> f64 {
        match *self {
            Envelope::None => 1.0,
            Envelope::GaussianBump { a, sign } => {
                let d = t as f64 - len as f64 / 2.0;
                (sign.factor() * d * d / (2.0 * a * a)).exp()
            }
        }
    }
}

/// ARMA(p, q) base process with an optional modulation envelope:
///
/// ```text
/// Y(t) = Σ ar[i] Y(t−1−i) + Z(t) + Σ ma[j] Z(t−1−j),   Z ~ N(0, noise_sd²)
/// X(t) = c(t) Y(t)
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModelSpec {
    pub ar: Vec<f64>,
    pub ma: Vec<f64>,
    pub noise_sd: f64,
    pub envelope: Envelope,
}

impl ModelSpec {
    pub fn new(ar: Vec<f64>, ma: Vec<f64>, noise_sd: f64, envelope: Envelope) -> Result<Self> {
        let model = Self { ar, ma, noise_sd, envelope };
        model.validate()?;
        Ok(model)
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.noise_sd > 0.0 && self.noise_sd.is_finite()) {
            return Err(Error::Model(format!("noise sd must be positive, got {}", self.noise_sd)));
        }
        if self.ar.iter().chain(&self.ma).any(|c| !c.is_finite()) {
            return Err(Error::Model("non-finite ARMA coefficient".into()));
        }
        if let Envelope::GaussianBump { a, .. } = self.envelope {
            if !(a > 0.0 && a.is_finite()) {
                return Err(Error::Model(format!("envelope width must be positive, got {a}")));
            }
        }
        let margin = self.stationarity_margin();
        if margin <= 0.0 {
            return Err(Error::Model(format!(
                "AR polynomial has a root on or inside the unit circle (min |root| − 1 = {margin:.3e})"
            )));
        }
        Ok(())
    }

    /// `min |root| − 1` over the roots of `1 − Σ ar[i] z^{i+1}`;
    /// infinite for a pure MA model.
    pub fn stationarity_margin(&self) -> f64 {
        let p = self.ar.len();
        if p == 0 {
            return f64::INFINITY;
        }
        // companion matrix of z^p − ar[0] z^{p−1} − … − ar[p−1]; its
        // eigenvalues are the reciprocals of the AR polynomial roots
        let mut companion = DMatrix::<f64>::zeros(p, p);
        for (j, &c) in self.ar.iter().enumerate() {
            companion[(0, j)] = c;
        }
        for i in 1..p {
            companion[(i, i - 1)] = 1.0;
        }
        let spectral_radius = companion.complex_eigenvalues().iter().map(|z| z.norm()).fold(0.0_f64, f64::max);
        if spectral_radius == 0.0 {
            f64::INFINITY
        } else {
            1.0 / spectral_radius - 1.0
        }
    }

    pub fn burn_in(&self) -> usize {
        MIN_BURN_IN.max(50 * (self.ar.len() + self.ma.len()))
    }

    pub fn with_envelope(mut self, envelope: Envelope) -> Self {
        self.envelope = envelope;
        self
    }
}

/// Real-valued samples at unit spacing.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    values: Vec<f64>,
    origin: i64,
    meta: String,
}

impl TimeSeries {
    pub fn new(values: Vec<f64>, origin: i64, meta: impl Into<String>) -> Result<Self> {
        if let Some(i) = values.iter().position(|v| !v.is_finite()) {
            return Err(Error::Series(format!("non-finite value {} at index {i}", values[i])));
        }
        Ok(Self { values, origin, meta: meta.into() })
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn origin(&self) -> i64 {
        self.origin
    }

    pub fn meta(&self) -> &str {
        &self.meta
    }

    /// Same series with every sample multiplied by `c`.
    pub fn scaled(&self, c: f64) -> Result<Self> {
        Self::new(self.values.iter().map(|v| v * c).collect(), self.origin, self.meta.clone())
    }
}

/// Draws `len` samples of `model` using a ChaCha8 stream seeded by `seed`.
pub fn simulate(model: &ModelSpec, len: usize, seed: u64) -> Result<TimeSeries> {
    if len == 0 {
        return Err(Error::Model("series length must be at least 1".into()));
    }
    model.validate()?;
    let burn = model.burn_in();
    let total = burn + len;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let noise: Vec<f64> = (0..total)
        .map(|_| {
            let z: f64 = StandardNormal.sample(&mut rng);
            model.noise_sd * z
        })
        .collect();

    let mut y = vec![0.0; total];
    for t in 0..total {
        let mut v = noise[t];
        for (i, &phi) in model.ar.iter().enumerate() {
            if t > i {
                v += phi * y[t - 1 - i];
            }
        }
        for (j, &theta) in model.ma.iter().enumerate() {
            if t > j {
                v += theta * noise[t - 1 - j];
            }
        }
        y[t] = v;
    }

    let values = y[burn..].iter().enumerate().map(|(t, v)| model.envelope.factor(t, len) * v).collect();
    TimeSeries::new(values, 0, format!("simulated seed={seed}"))
}

/// Catalogue models (a)–(h).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ModelId {
    A,
    B,
    C,
    D,
    E,
    F,
    G,
    H,
}

impl ModelId {
    pub const ALL: [ModelId; 8] =
        [ModelId::A, ModelId::B, ModelId::C, ModelId::D, ModelId::E, ModelId::F, ModelId::G, ModelId::H];

    /// Models with a stationary (unmodulated) catalogue entry.
    pub const STATIONARY: [ModelId; 7] =
        [ModelId::A, ModelId::B, ModelId::C, ModelId::D, ModelId::E, ModelId::F, ModelId::G];

    pub fn letter(self) -> char {
        match self {
            ModelId::A => 'a',
            ModelId::B => 'b',
            ModelId::C => 'c',
            ModelId::D => 'd',
            ModelId::E => 'e',
            ModelId::F => 'f',
            ModelId::G => 'g',
            ModelId::H => 'h',
        }
    }
}

impl fmt::Display for ModelId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.letter())
    }
}

impl FromStr for ModelId {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        let t = s.trim().trim_start_matches('(').trim_end_matches(')').to_ascii_lowercase();
        ModelId::ALL
            .into_iter()
            .find(|id| t.len() == 1 && t.starts_with(id.letter()))
            .ok_or_else(|| Error::Model(format!("unknown model id `{s}` (expected a..h)")))
    }
}

fn power_bump(sign: BumpSign) -> Envelope {
    Envelope::GaussianBump { a: POWER_BUMP_WIDTH, sign }
}

/// The catalogue model for `id`: (a)–(g) unmodulated, (h) the modulated
/// AR(2) `Y_t = 0.8 Y_{t−1} − 0.4 Y_{t−2} + Z_t`, `Z ~ N(0, 100²)`.
pub fn model_catalog(id: ModelId) -> ModelSpec {
    let (ar, ma, sd, envelope) = match id {
        ModelId::A => (vec![], vec![], 1.0, Envelope::None),
        ModelId::B => (vec![0.9], vec![], 1.0, Envelope::None),
        ModelId::C => (vec![-0.9], vec![], 1.0, Envelope::None),
        ModelId::D => (vec![], vec![0.8], 1.0, Envelope::None),
        ModelId::E => (vec![], vec![-0.8], 1.0, Envelope::None),
        // printed as X(t) = −0.4X(t) + …; read as a lag-one AR term
        ModelId::F => (vec![-0.4], vec![-0.8], 1.0, Envelope::None),
        ModelId::G => (vec![1.385929, -0.9604], vec![], 1.0, Envelope::None),
        ModelId::H => (vec![0.8, -0.4], vec![], 100.0, power_bump(BumpSign::Plus)),
    };
    ModelSpec { ar, ma, noise_sd: sd, envelope }
}

/// Power-study variant: the catalogue model multiplied by the Gaussian
/// modulation of width 200 with the given exponent sign.
pub fn power_variant(id: ModelId, sign: BumpSign) -> ModelSpec {
    model_catalog(id).with_envelope(power_bump(sign))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn sample_variance(x: &[f64]) -> f64 {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        x.iter().map(|v| (v - m).powi(2)).sum::<f64>() / (x.len() - 1) as f64
    }

    fn lag1_autocorrelation(x: &[f64]) -> f64 {
        let m = x.iter().sum::<f64>() / x.len() as f64;
        let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
        let c1: f64 = x.windows(2).map(|w| (w[0] - m) * (w[1] - m)).sum();
        c1 / c0
    }

    #[test]
    fn ma1_variance() {
        let model = model_catalog(ModelId::D);
        let x = simulate(&model, 200_000, 11).unwrap();
        let v = sample_variance(x.values());
        assert!((v / 1.64 - 1.0).abs() < 0.02, "{v}");
    }

    #[test]
    fn ar1_autocorrelation() {
        let x = simulate(&model_catalog(ModelId::B), 200_000, 5).unwrap();
        assert!((lag1_autocorrelation(x.values()) - 0.9).abs() < 0.02);
    }

    #[test]
    fn catalogue_entries() {
        let a = model_catalog(ModelId::A);
        assert!(a.ar.is_empty() && a.ma.is_empty());
        assert_eq!(a.noise_sd, 1.0);
        assert_eq!(a.envelope, Envelope::None);
        assert_eq!(model_catalog(ModelId::G).ar, vec![1.385929, -0.9604]);
        let h = model_catalog(ModelId::H);
        assert_eq!(h.ar, vec![0.8, -0.4]);
        assert_eq!(h.noise_sd, 100.0);
        assert_eq!(h.envelope, Envelope::GaussianBump { a: 200.0, sign: BumpSign::Plus });
        assert_eq!(model_catalog(ModelId::E).ma, vec![-0.8]);
        assert_eq!(model_catalog(ModelId::F).ar, vec![-0.4]);
        assert_eq!(model_catalog(ModelId::F).ma, vec![-0.8]);
    }

    #[test]
    fn catalogue_is_comfortably_stationary() {
        for id in ModelId::STATIONARY {
            let m = model_catalog(id);
            assert!(m.stationarity_margin() > 0.01, "{id}: {}", m.stationarity_margin());
        }
        let g = model_catalog(ModelId::G).stationarity_margin();
        assert!((g - (1.0 / 0.9604_f64.sqrt() - 1.0)).abs() < 1e-9);
    }

    #[test]
    fn rejects_bad_models() {
        assert!(ModelSpec::new(vec![1.0], vec![], 1.0, Envelope::None).is_err());
        assert!(ModelSpec::new(vec![0.5, 0.6], vec![], 1.0, Envelope::None).is_err());
        assert!(ModelSpec::new(vec![0.5], vec![], 0.0, Envelope::None).is_err());
        assert!(simulate(&model_catalog(ModelId::A), 0, 1).is_err());
        assert!("z".parse::<ModelId>().is_err());
        assert_eq!("(g)".parse::<ModelId>().unwrap(), ModelId::G);
        assert_eq!("H".parse::<ModelId>().unwrap(), ModelId::H);
    }

    #[test]
    fn deterministic_per_seed() {
        let m = model_catalog(ModelId::G);
        let a = simulate(&m, 512, 42).unwrap();
        let b = simulate(&m, 512, 42).unwrap();
        let c = simulate(&m, 512, 43).unwrap();
        assert!(a.values().iter().zip(b.values()).all(|(x, y)| x.to_bits() == y.to_bits()));
        assert_ne!(a.values(), c.values());
    }

    #[test]
    fn envelope_multiplies_base_path() {
        for sign in [BumpSign::Plus, BumpSign::Minus] {
            let base = simulate(&model_catalog(ModelId::B), 512, 9).unwrap();
            let modulated = simulate(&power_variant(ModelId::B, sign), 512, 9).unwrap();
            let env = power_bump(sign);
            for (t, (b, m)) in base.values().iter().zip(modulated.values()).enumerate() {
                assert_eq!(env.factor(t, 512) * b, *m);
            }
        }
    }

    #[test]
    fn bump_is_one_at_centre() {
        for sign in [BumpSign::Plus, BumpSign::Minus] {
            let env = Envelope::GaussianBump { a: 200.0, sign };
            assert_eq!(env.factor(256, 512), 1.0);
        }
        let plus = Envelope::GaussianBump { a: 200.0, sign: BumpSign::Plus };
        assert!((plus.factor(0, 512) - (256.0_f64.powi(2) / 80_000.0).exp()).abs() < 1e-12);
    }

    #[test]
    fn time_series_rejects_non_finite() {
        assert!(TimeSeries::new(vec![1.0, f64::NAN], 0, "").is_err());
        assert!(TimeSeries::new(vec![1.0, f64::INFINITY], 0, "").is_err());
    }
}
