//! Batch recurrent-fluctuations forecaster.
//!
//! The expected one-step fluctuation at a given clock time is the
//! indicator-weighted average of the same-clock increments over the N
//! preceding days. A forecast composes those expected fluctuations over the
//! horizon on top of the current value. Increments rejected by the validity
//! indicator simply drop out of the average; when no increment survives, the
//! step contributes nothing and the forecast degrades toward persistence.

use crate::quality::{increment_validity_bounded, point_validity_bounded, ValidityStats};
use crate::series::SeriesWindow;
use crate::{Error, Result};

/// Parameters of the N-day average.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct RecurrentConfig {
    /// Number of preceding days per average.
    pub n_days: usize,
    pub steps_per_day: usize,
    pub horizon: usize,
}

impl RecurrentConfig {
    pub fn new(n_days: usize, steps_per_day: usize, horizon: usize) -> Result<Self> {
        let cfg = Self {
            n_days,
            steps_per_day,
            horizon,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_days < 1 {
            return Err(Error::Config("n_days must be at least 1".into()));
        }
        if self.steps_per_day < 2 {
            return Err(Error::Config("steps_per_day must be at least 2".into()));
        }
        if self.horizon < 1 || self.horizon > self.steps_per_day {
            return Err(Error::Config(
                "horizon must lie in [1, steps_per_day] so every composed step stays in the past"
                    .into(),
            ));
        }
        Ok(())
    }
}

/// Whether increments pass through the validity indicator or are taken raw.
/// Raw mode still skips increments whose endpoints do not exist as numbers.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum IncrementFilter {
    Filtered,
    Raw,
}

/// Expected fluctuation from `t - 1` to `t`: the masked average of the
/// same-clock increments over the preceding `n_days` days, together with the
/// number of increments that survived the mask. Returns `(0.0, 0)` when none
/// survive.
pub fn expected_fluctuation(
    window: &SeriesWindow,
    t: usize,
    cfg: &RecurrentConfig,
    stats: &ValidityStats,
    filter: IncrementFilter,
) -> Result<(f64, usize)> {
    expected_fluctuation_bounded(
        window,
        t,
        cfg,
        stats,
        filter,
        t.min(window.len().saturating_sub(1)),
    )
}

fn expected_fluctuation_bounded(
    window: &SeriesWindow,
    t: usize,
    cfg: &RecurrentConfig,
    stats: &ValidityStats,
    filter: IncrementFilter,
    visible_end: usize,
) -> Result<(f64, usize)> {
    cfg.validate()?;
    let depth = cfg.n_days * cfg.steps_per_day;
    if t < depth + 1 {
        return Err(Error::InsufficientHistory(format!(
            "need {} past steps before position {t}",
            depth + 1
        )));
    }
    let mut sum = 0.0;
    let mut count = 0usize;
    for n in 1..=cfg.n_days {
        let k = t - n * cfg.steps_per_day;
        let included = match filter {
            IncrementFilter::Filtered => {
                increment_validity_bounded(window, k, k - 1, stats, visible_end)
            }
            IncrementFilter::Raw => {
                window.value_at(k).is_some() && window.value_at(k - 1).is_some()
            }
        };
        if included {
            sum += window.value_at(k).unwrap() - window.value_at(k - 1).unwrap();
            count += 1;
        }
    }
    if count == 0 {
        Ok((0.0, 0))
    } else {
        Ok((sum / count as f64, count))
    }
}

/// Forecast at `t + horizon` from origin `t`: the anchored sum of expected
/// fluctuations for each step of the horizon. Every seasonal lag it touches
/// lies at or before `t`, and the anchor is the last point-valid value at or
/// before `t` (zero when none exists).
pub fn compose_recurrent_forecast(
    window: &SeriesWindow,
    t: usize,
    cfg: &RecurrentConfig,
    stats: &ValidityStats,
    filter: IncrementFilter,
) -> Result<f64> {
    cfg.validate()?;
    if t >= window.len() {
        return Err(Error::InsufficientHistory(format!(
            "origin {t} is outside the window"
        )));
    }
    if t < cfg.n_days * cfg.steps_per_day {
        return Err(Error::InsufficientHistory(format!(
            "need {} past steps before origin {t}",
            cfg.n_days * cfg.steps_per_day
        )));
    }
    let anchor = repaired_anchor(window, t, stats);
    let mut total = anchor;
    for j in 1..=cfg.horizon {
        let (delta, _count) = expected_fluctuation_bounded(window, t + j, cfg, stats, filter, t)?;
        total += delta;
    }
    Ok(total)
}

/// Last point-valid value at or before `t`, falling back to zero.
fn repaired_anchor(window: &SeriesWindow, t: usize, stats: &ValidityStats) -> f64 {
    for k in (0..=t).rev() {
        if point_validity_bounded(window, k, stats, t).is_valid() {
            return window.value_at(k).expect("valid implies present");
        }
    }
    0.0
}
