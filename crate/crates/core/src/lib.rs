//! Streaming forecaster for high-variability grid flow time series.
//!
//! The engine predicts up to one hour ahead at 5-minute resolution by
//! composing exponentially smoothed daily and weekly recurrent fluctuations,
//! with an adaptive blend between the two seasonal components, a persistence
//! safety gate, a mean-reversion correction, and saturation damping of large
//! changes. Data quality incidents (outliers, gaps, zero runs, NaNs) freeze
//! the affected moving averages instead of corrupting them.
//!
//! Module map:
//! - [`series`]: the 5-minute time grid, samples, and dense windows
//! - [`quality`]: validity indicators and the global RMS statistics behind them
//! - [`baselines`]: persistence and fixed-weight seasonal reference predictors
//! - [`recurrent`]: batch N-day recurrent-fluctuations forecaster
//! - [`adaptive`]: the deployed streaming forecaster and its state snapshots
//! - [`synth`]: seeded synthetic series generator for fixtures and tuning
//! - [`harness`]: evaluation, stress scenarios, parameter sweeps, rank scoring
//! - [`wire`]: the CSV interchange format

pub mod adaptive;
pub mod baselines;
mod error;
pub mod harness;
pub mod quality;
pub mod recurrent;
mod rng;
pub mod series;
pub mod synth;
pub mod wire;

pub use error::{Error, Result};
