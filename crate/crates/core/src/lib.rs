//! Multitaper estimation of evolutionary (time-varying) spectra and the
//! stationarity tests built on top of it.
//!
//! The crate is organised bottom-up:
//!
//! - [`specialfn`]: digamma, trigamma and χ² quantiles.
//! - [`taper`]: discrete prolate spheroidal sequences and their spectral window.
//! - [`simulate`]: ARMA and uniformly modulated sample paths.
//! - [`evospec`]: the time-frequency grid and the multitaper estimator.
//! - [`stattest`]: the two-way ANOVA (PSR) and rank-based (RS) tests and the
//!   Monte Carlo size/power harness.
//! - [`tradeoff`]: MSE bound surrogates and taper-count selection.

pub mod error;
pub mod evospec;
pub mod simulate;
pub mod specialfn;
pub mod stattest;
pub mod taper;
pub mod tradeoff;

mod tridiag;

pub use error::{Error, Result};
pub use evospec::{build_grid, estimate_at, estimate_grid, GridEstimator, SpectralEstimate, TFGrid};
pub use simulate::{model_catalog, simulate, Envelope, ModelId, ModelSpec, TimeSeries};
pub use specialfn::{chi2_quantile, digamma, trigamma, QuantileQuery};
pub use stattest::{log_table, psr_test, rs_test, Decision, LogSpectraTable, PsrReport, RsReport};
pub use taper::{compute_dpss, l1_concentration, spectral_window, width_bg, TaperSet, TaperSpec};
pub use tradeoff::{characteristic_width, Formula, Tradeoff, TradeoffPoint};
