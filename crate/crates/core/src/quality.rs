//! Point and increment validity indicators.
//!
//! The point indicator rejects gaps, non-numeric payloads, runs of exact
//! zeros, and point-level outliers. The increment indicator is strictly more
//! stringent: both endpoints must be point-valid and the change must stay
//! within a multiple of the global RMS computed over the training pass. Every
//! verdict is a pure function of the window contents and the frozen
//! statistics, so filtering never feeds back into the statistic that defines
//! it; recomputing the RMS is an explicit retrain step.

use crate::series::{SampleValue, SeriesWindow};
use crate::{Error, Result};

/// Global statistics backing the validity indicators.
///
/// `global_rms` pools every present sample across all lines of the training
/// pass. Fields are fixed after construction.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ValidityStats {
    pub global_rms: f64,
    /// Increments larger than `increment_threshold_factor * global_rms` are invalid.
    pub increment_threshold_factor: f64,
    /// Minimum length of a run of exact zeros that invalidates its members.
    pub zero_run_min: usize,
    /// Points with `|value| > outlier_factor * global_rms` are invalid.
    pub outlier_factor: f64,
}

impl ValidityStats {
    pub fn new(global_rms: f64) -> Self {
        Self {
            global_rms,
            increment_threshold_factor: 2.0,
            zero_run_min: 2,
            outlier_factor: 10.0,
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.global_rms.is_nan() || self.global_rms < 0.0 {
            return Err(Error::Config("global_rms must be non-negative".into()));
        }
        if self.increment_threshold_factor.is_nan() || self.increment_threshold_factor <= 0.0 {
            return Err(Error::Config(
                "increment_threshold_factor must be positive".into(),
            ));
        }
        if self.zero_run_min < 2 {
            return Err(Error::Config("zero_run_min must be at least 2".into()));
        }
        if self.outlier_factor.is_nan() || self.outlier_factor <= 0.0 {
            return Err(Error::Config("outlier_factor must be positive".into()));
        }
        Ok(())
    }

    /// Largest increment magnitude considered valid (inclusive bound).
    pub fn increment_threshold(&self) -> f64 {
        self.increment_threshold_factor * self.global_rms
    }

    /// Largest point magnitude considered valid (inclusive bound).
    pub fn outlier_threshold(&self) -> f64 {
        self.outlier_factor * self.global_rms
    }
}

/// Why a point is invalid, if it is.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ValidityReason {
    Ok,
    Missing,
    NonNumeric,
    ZeroRun,
    Outlier,
}

/// Point-validity verdict; valid exactly when the reason is `Ok`.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ValidityVerdict {
    pub reason: ValidityReason,
}

impl ValidityVerdict {
    pub fn ok() -> Self {
        Self {
            reason: ValidityReason::Ok,
        }
    }

    pub fn invalid(reason: ValidityReason) -> Self {
        Self { reason }
    }

    pub fn is_valid(&self) -> bool {
        self.reason == ValidityReason::Ok
    }
}

/// Pools the RMS of all present values across the given training windows.
pub fn compute_global_rms(windows: &[SeriesWindow]) -> Result<ValidityStats> {
    let mut sum_sq = 0.0f64;
    let mut count = 0usize;
    for w in windows {
        for s in &w.samples {
            if let Some(v) = s.value() {
                sum_sq += v * v;
                count += 1;
            }
        }
    }
    if count == 0 {
        return Err(Error::NoData);
    }
    Ok(ValidityStats::new((sum_sq / count as f64).sqrt()))
}

/// Point validity of position `k`: the indicator over single values.
pub fn point_validity(window: &SeriesWindow, k: usize, stats: &ValidityStats) -> ValidityVerdict {
    point_validity_bounded(window, k, stats, window.len().saturating_sub(1))
}

/// Point validity with reads bounded to positions `<= visible_end`, so batch
/// forecasters can apply the indicator without looking past their origin.
/// The zero-run check inspects neighbours only within the visible range.
pub(crate) fn point_validity_bounded(
    window: &SeriesWindow,
    k: usize,
    stats: &ValidityStats,
    visible_end: usize,
) -> ValidityVerdict {
    let v = match window.get(k) {
        SampleValue::Missing => return ValidityVerdict::invalid(ValidityReason::Missing),
        SampleValue::NonNumeric => return ValidityVerdict::invalid(ValidityReason::NonNumeric),
        SampleValue::Present(v) if !v.is_finite() => {
            return ValidityVerdict::invalid(ValidityReason::NonNumeric)
        }
        SampleValue::Present(v) => v,
    };
    if v == 0.0 && zero_run_len(window, k, visible_end) >= stats.zero_run_min {
        return ValidityVerdict::invalid(ValidityReason::ZeroRun);
    }
    if v.abs() > stats.outlier_threshold() {
        return ValidityVerdict::invalid(ValidityReason::Outlier);
    }
    ValidityVerdict::ok()
}

/// Length of the maximal run of exact zeros containing position `k`.
fn zero_run_len(window: &SeriesWindow, k: usize, visible_end: usize) -> usize {
    let is_zero = |p: usize| window.get(p) == SampleValue::Present(0.0);
    debug_assert!(is_zero(k));
    let mut lo = k;
    while lo > 0 && is_zero(lo - 1) {
        lo -= 1;
    }
    let mut hi = k;
    while hi < visible_end && is_zero(hi + 1) {
        hi += 1;
    }
    hi - lo + 1
}

/// Increment validity between positions `k_prev < k`: both endpoints must be
/// point-valid and the change must stay within the increment threshold
/// (inclusive, so an exactly-at-threshold change is still valid).
///
/// Gaps need no extra rule here: dense windows materialize missing steps as
/// `Missing` cells, which already fail the endpoint check, and seasonal-lag
/// increments only require valid endpoints.
pub fn increment_validity(
    window: &SeriesWindow,
    k: usize,
    k_prev: usize,
    stats: &ValidityStats,
) -> bool {
    debug_assert!(k > k_prev);
    increment_validity_bounded(window, k, k_prev, stats, window.len().saturating_sub(1))
}

pub(crate) fn increment_validity_bounded(
    window: &SeriesWindow,
    k: usize,
    k_prev: usize,
    stats: &ValidityStats,
    visible_end: usize,
) -> bool {
    if !point_validity_bounded(window, k, stats, visible_end).is_valid()
        || !point_validity_bounded(window, k_prev, stats, visible_end).is_valid()
    {
        return false;
    }
    let a = window.value_at(k).expect("valid implies present");
    let b = window.value_at(k_prev).expect("valid implies present");
    increment_within_threshold(a, b, stats)
}

/// The magnitude half of the increment indicator, for callers that already
/// hold endpoint verdicts (the streaming engine keeps its own value ring).
pub fn increment_within_threshold(a: f64, b: f64, stats: &ValidityStats) -> bool {
    (a - b).abs() <= stats.increment_threshold()
}

/// Verdict for one streamed sample, plus what its arrival reveals about the
/// previous one.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct GateVerdict {
    pub current: ValidityVerdict,
    /// True when the current sample shows that the previous (then-valid) zero
    /// was actually the start of a zero run.
    pub previous_entered_zero_run: bool,
}

/// Causal point-validity gate for live streams.
///
/// A batch window can look at both neighbours of a zero; a stream cannot see
/// the next sample yet. The gate checks zero runs backward only and reports,
/// one step late, that the previous zero turned out to open a run so callers
/// can amend the flag they stored for it.
#[derive(Debug, Clone)]
pub struct StreamGate {
    stats: ValidityStats,
    prev_present_zero: bool,
}

impl StreamGate {
    pub fn new(stats: ValidityStats) -> Self {
        Self {
            stats,
            prev_present_zero: false,
        }
    }

    /// Rebuilds a gate mid-stream, e.g. when resuming from a checkpoint.
    pub fn with_memory(stats: ValidityStats, prev_present_zero: bool) -> Self {
        Self {
            stats,
            prev_present_zero,
        }
    }

    /// True when the last assessed sample was an exact present zero.
    pub fn remembers_zero(&self) -> bool {
        self.prev_present_zero
    }

    pub fn stats(&self) -> &ValidityStats {
        &self.stats
    }

    pub fn assess(&mut self, value: &SampleValue) -> GateVerdict {
        let is_zero = *value == SampleValue::Present(0.0);
        let current = match value.value() {
            Some(_) if is_zero && self.prev_present_zero => {
                ValidityVerdict::invalid(ValidityReason::ZeroRun)
            }
            Some(v) if v.abs() > self.stats.outlier_threshold() => {
                ValidityVerdict::invalid(ValidityReason::Outlier)
            }
            Some(_) => ValidityVerdict::ok(),
            None => match value {
                SampleValue::Missing => ValidityVerdict::invalid(ValidityReason::Missing),
                _ => ValidityVerdict::invalid(ValidityReason::NonNumeric),
            },
        };
        let verdict = GateVerdict {
            current,
            previous_entered_zero_run: is_zero && self.prev_present_zero,
        };
        self.prev_present_zero = is_zero;
        verdict
    }
}
