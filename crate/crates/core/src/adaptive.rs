//! The deployed streaming forecaster.
//!
//! One state per line. Each arriving sample drives a fixed cascade of
//! exponential-smoothing recursions:
//!
//! 1. the terminal value is repaired (hold the last valid value, else zero);
//! 2. the daily ring smooths the one-step increment against the value one
//!    day earlier, the weekly ring against one week earlier;
//! 3. a blend weight between the two seasonal sums is fit online by
//!    minimizing the moving squared error of monitor-lag-ahead predictions;
//! 4. moving squared errors of the model and of persistence are tracked at
//!    the monitor lag, and forecasts fall back to persistence whenever the
//!    model's error is larger;
//! 5. a mean-reversion coefficient is fit online against the residual of the
//!    blended prediction;
//! 6. forecasts damp large changes through a saturation curve bounded by a
//!    per-line limit.
//!
//! Invalid data never corrupts the state: every recursion is gated by a
//! validity indicator and keeps its previous value exactly when the gate is
//! closed. Any non-finite intermediate trips a fault that reinitializes the
//! moving averages; forecasts then emit persistence until the warmup
//! completes again. Memory per line is a fixed function of the weekly lag,
//! independent of stream length.

use crate::quality::{GateVerdict, ValidityStats};
use crate::series::{SampleValue, SeriesWindow};
use crate::{Error, Result};

/// Denominators at or below this are treated as zero; the corresponding
/// correction degrades to the uncorrected predictor.
const DIV_EPS: f64 = 1e-12;

/// Smoothing rates, lags, and the saturation limit.
///
/// The rate defaults come from the tuning sweep in the harness (see the
/// repository README) and are all configurable.
#[derive(Debug, Clone, PartialEq)]
pub struct SmoothingParams {
    /// Smoothing rate of the daily recurrent fluctuation.
    pub rate_daily: f64,
    /// Smoothing rate of the weekly recurrent fluctuation.
    pub rate_weekly: f64,
    /// Smoothing rate of the blend-weight accumulators.
    pub rate_blend: f64,
    /// Smoothing rate of the error monitors.
    pub rate_error: f64,
    /// Smoothing rate of the running mean.
    pub rate_mean: f64,
    /// Smoothing rate of the mean-reversion accumulators.
    pub rate_reversion: f64,
    /// Maximum forecast horizon in steps (12 = one hour at 5 minutes).
    pub horizon: usize,
    /// Lag at which past predictions are scored (11 steps = 55 minutes).
    pub monitor_lag: usize,
    /// Steps per day.
    pub steps_per_day: usize,
    /// Steps per week.
    pub steps_per_week: usize,
    /// Saturation limit: the largest change a forecast may announce.
    /// `INFINITY` leaves forecasts undamped until training calibrates it.
    pub saturation_limit: f64,
}

impl Default for SmoothingParams {
    fn default() -> Self {
        Self {
            rate_daily: 0.15,
            rate_weekly: 0.15,
            rate_blend: 0.02,
            rate_error: 0.02,
            rate_mean: 0.01,
            rate_reversion: 0.02,
            horizon: 12,
            monitor_lag: 11,
            steps_per_day: 288,
            steps_per_week: 2016,
            saturation_limit: f64::INFINITY,
        }
    }
}

impl SmoothingParams {
    pub fn validate(&self) -> Result<()> {
        for (name, r) in [
            ("rate_daily", self.rate_daily),
            ("rate_weekly", self.rate_weekly),
            ("rate_blend", self.rate_blend),
            ("rate_error", self.rate_error),
            ("rate_mean", self.rate_mean),
            ("rate_reversion", self.rate_reversion),
        ] {
            if !(r > 0.0 && r <= 1.0) {
                return Err(Error::Config(format!("{name} must lie in (0, 1], got {r}")));
            }
        }
        if self.steps_per_day < 2 {
            return Err(Error::Config("steps_per_day must be at least 2".into()));
        }
        if self.steps_per_week < self.steps_per_day {
            return Err(Error::Config(
                "steps_per_week must be at least steps_per_day".into(),
            ));
        }
        if self.monitor_lag < 1 || self.monitor_lag > self.horizon {
            return Err(Error::Config("monitor_lag must lie in [1, horizon]".into()));
        }
        if self.horizon > self.steps_per_day {
            return Err(Error::Config(
                "horizon must not exceed steps_per_day: seasonal sums only reach one day back"
                    .into(),
            ));
        }
        if self.saturation_limit.is_nan() || self.saturation_limit <= 0.0 {
            return Err(Error::Config("saturation_limit must be positive".into()));
        }
        Ok(())
    }

    /// Assigns one field by config key; unknown keys are an error.
    pub fn set_key(&mut self, key: &str, value: f64) -> Result<()> {
        match key {
            "rate_daily" => self.rate_daily = value,
            "rate_weekly" => self.rate_weekly = value,
            "rate_blend" => self.rate_blend = value,
            "rate_error" => self.rate_error = value,
            "rate_mean" => self.rate_mean = value,
            "rate_reversion" => self.rate_reversion = value,
            "horizon" => self.horizon = value as usize,
            "monitor_lag" => self.monitor_lag = value as usize,
            "steps_per_day" => self.steps_per_day = value as usize,
            "steps_per_week" => self.steps_per_week = value as usize,
            "saturation_limit" => self.saturation_limit = value,
            other => {
                return Err(Error::Config(format!(
                    "unknown smoothing parameter `{other}`"
                )))
            }
        }
        Ok(())
    }
}

/// Fixed-capacity ring with an implicit infinite zero/default history, so
/// reads at any lag inside the capacity are always defined.
#[derive(Debug, Clone)]
struct Ring<T: Copy> {
    buf: Vec<T>,
    head: usize,
}

impl<T: Copy> Ring<T> {
    fn new(capacity: usize, fill: T) -> Self {
        debug_assert!(capacity > 0);
        Self {
            buf: vec![fill; capacity],
            head: capacity - 1,
        }
    }

    fn capacity(&self) -> usize {
        self.buf.len()
    }

    fn push(&mut self, v: T) {
        self.head = (self.head + 1) % self.buf.len();
        self.buf[self.head] = v;
    }

    /// Value pushed `k` steps ago; `lag(0)` is the most recent.
    fn lag(&self, k: usize) -> T {
        debug_assert!(k < self.buf.len());
        let n = self.buf.len();
        self.buf[(self.head + n - k) % n]
    }

    fn latest_mut(&mut self) -> &mut T {
        &mut self.buf[self.head]
    }

    /// Iterates lags `hi` down to `lo`, i.e. in ascending time order.
    fn iter_time_asc(&self, hi: usize, lo: usize) -> impl Iterator<Item = T> + '_ {
        (lo..=hi).rev().map(move |k| self.lag(k))
    }
}

impl Ring<f64> {
    /// Sum over lags `hi ..= lo` accumulated in ascending time order.
    fn sum_lags(&self, hi: usize, lo: usize) -> f64 {
        self.iter_time_asc(hi, lo).sum()
    }
}

/// Repaired value plus its point-validity flag at arrival (amendable).
#[derive(Debug, Clone, Copy, PartialEq)]
struct RecentEntry {
    value: f64,
    valid: bool,
}

/// What a monitor-lag-ahead prediction looked like when it was made: the
/// prediction itself and the two seasonal sums behind it. Reading the entry
/// back after `monitor_lag` steps reproduces those sums without keeping
/// extra ring depth.
#[derive(Debug, Clone, Copy, PartialEq)]
struct MonitorEntry {
    pred: f64,
    sum_daily: f64,
    sum_weekly: f64,
}

/// Decomposition of one forecast, for diagnostics and tests.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ForecastTrace {
    /// Repaired terminal value at the origin.
    pub origin: f64,
    /// Seasonal-blend prediction before any safeguard.
    pub preliminary: f64,
    /// After the persistence gate.
    pub gated: f64,
    /// After the mean-reversion correction.
    pub corrected: f64,
    /// Final published forecast, after saturation.
    pub value: f64,
    /// True when the gate replaced the preliminary prediction.
    pub gate_active: bool,
    pub blend: f64,
    pub reversion: f64,
}

/// Streaming per-line forecaster state.
#[derive(Debug, Clone)]
pub struct AdaptiveState {
    params: SmoothingParams,
    /// Largest valid increment magnitude, frozen from the training statistics.
    increment_limit: f64,
    daily: Ring<f64>,
    weekly: Ring<f64>,
    recent: Ring<RecentEntry>,
    monitor: Ring<MonitorEntry>,
    blend_num: f64,
    blend_den: f64,
    model_err: f64,
    persist_err: f64,
    running_mean: f64,
    reversion_num: f64,
    reversion_den: f64,
    last_valid: Option<f64>,
    prior_valid: Option<f64>,
    last_valid_is_latest: bool,
    steps_seen: u64,
    fault: bool,
    recoveries: u64,
}

impl AdaptiveState {
    pub fn new(params: SmoothingParams, stats: &ValidityStats) -> Result<Self> {
        params.validate()?;
        stats.validate()?;
        let daily = Ring::new(params.steps_per_day, 0.0);
        let weekly = Ring::new(params.steps_per_week, 0.0);
        let recent = Ring::new(
            params.monitor_lag + 1,
            RecentEntry {
                value: 0.0,
                valid: false,
            },
        );
        let monitor = Ring::new(
            params.monitor_lag,
            MonitorEntry {
                pred: 0.0,
                sum_daily: 0.0,
                sum_weekly: 0.0,
            },
        );
        Ok(Self {
            increment_limit: stats.increment_threshold(),
            params,
            daily,
            weekly,
            recent,
            monitor,
            blend_num: 0.0,
            blend_den: 0.0,
            model_err: 0.0,
            persist_err: 0.0,
            running_mean: 0.0,
            reversion_num: 0.0,
            reversion_den: 0.0,
            last_valid: None,
            prior_valid: None,
            last_valid_is_latest: false,
            steps_seen: 0,
            fault: false,
            recoveries: 0,
        })
    }

    pub fn params(&self) -> &SmoothingParams {
        &self.params
    }

    /// Overrides the saturation limit, typically after training calibration.
    pub fn set_saturation_limit(&mut self, limit: f64) -> Result<()> {
        if limit.is_nan() || limit <= 0.0 {
            return Err(Error::Config("saturation_limit must be positive".into()));
        }
        self.params.saturation_limit = limit;
        Ok(())
    }

    /// Repairs the terminal value: a valid sample passes through and becomes
    /// the new hold value; otherwise the last valid value is held, or zero
    /// when none has been seen yet.
    pub fn repair_terminal_value(&mut self, value: &SampleValue, point_valid: bool) -> f64 {
        if point_valid {
            if let Some(v) = value.value() {
                self.prior_valid = self.last_valid;
                self.last_valid = Some(v);
                self.last_valid_is_latest = true;
                return v;
            }
        }
        self.last_valid_is_latest = false;
        self.last_valid.unwrap_or(0.0)
    }

    /// Consumes the next sample of the stream. The caller densifies: missing
    /// steps still arrive (as `Missing`) and drive the update with closed
    /// indicator gates. Total: faults reinitialize instead of propagating.
    pub fn update(&mut self, value: &SampleValue, verdict: GateVerdict) {
        self.steps_seen += 1;
        let lag = self.params.monitor_lag;

        // The previous sample may just have been revealed as the start of a
        // zero run: amend its stored flag and roll back the hold value it set.
        if verdict.previous_entered_zero_run && self.steps_seen > 1 {
            self.recent.latest_mut().valid = false;
            if self.last_valid_is_latest {
                self.last_valid = self.prior_valid;
            }
        }

        let point_valid = verdict.current.is_valid() && value.is_present();
        let repaired = self.repair_terminal_value(value, point_valid);

        // Raw validity drives the indicators; repaired values drive the
        // arithmetic. Both coincide whenever the gates are open.
        let prev = self.recent.lag(0);
        let prev_mon = self.recent.lag(lag - 1);
        let inc_ok =
            point_valid && prev.valid && (repaired - prev.value).abs() <= self.increment_limit;
        let mon_ok = point_valid
            && prev_mon.valid
            && (repaired - prev_mon.value).abs() <= self.increment_limit;
        self.recent.push(RecentEntry {
            value: repaired,
            valid: point_valid,
        });

        // Daily and weekly recurrent fluctuations. A closed gate copies the
        // seasonal-lag value forward unchanged.
        let day = self.params.steps_per_day;
        let week = self.params.steps_per_week;
        let d_prev = self.daily.lag(day - 1);
        let w_prev = self.weekly.lag(week - 1);
        let (d_new, w_new) = if inc_ok {
            let inc = repaired - prev.value;
            (
                self.params.rate_daily * inc + (1.0 - self.params.rate_daily) * d_prev,
                self.params.rate_weekly * inc + (1.0 - self.params.rate_weekly) * w_prev,
            )
        } else {
            (d_prev, w_prev)
        };
        self.daily.push(d_new);
        self.weekly.push(w_new);

        // The monitor entry written `lag` steps ago carries the seasonal sums
        // of the prediction now coming due.
        let due = self.monitor.lag(lag - 1);

        if mon_ok {
            let target = repaired - prev_mon.value - due.sum_daily;
            let x = due.sum_weekly - due.sum_daily;
            self.blend_num = self.params.rate_blend * (target * x)
                + (1.0 - self.params.rate_blend) * self.blend_num;
            self.blend_den =
                self.params.rate_blend * (x * x) + (1.0 - self.params.rate_blend) * self.blend_den;
        }
        let g = self.effective_blend();

        if mon_ok {
            let model_res = repaired - due.pred;
            let persist_res = repaired - prev_mon.value;
            self.model_err = self.params.rate_error * (model_res * model_res)
                + (1.0 - self.params.rate_error) * self.model_err;
            self.persist_err = self.params.rate_error * (persist_res * persist_res)
                + (1.0 - self.params.rate_error) * self.persist_err;
        }

        if point_valid {
            self.running_mean = self.params.rate_mean * repaired
                + (1.0 - self.params.rate_mean) * self.running_mean;
        }

        if mon_ok {
            let resid = repaired - prev_mon.value - (1.0 - g) * due.sum_daily - g * due.sum_weekly;
            let dev = self.running_mean - repaired;
            self.reversion_num = self.params.rate_reversion * (resid * dev) / lag as f64
                + (1.0 - self.params.rate_reversion) * self.reversion_num;
            self.reversion_den = self.params.rate_reversion * (dev * dev)
                + (1.0 - self.params.rate_reversion) * self.reversion_den;
        }

        // Publish the monitor-lag-ahead prediction that will be scored
        // `lag` steps from now.
        let sum_daily = self.daily.sum_lags(day - 1, day - lag);
        let sum_weekly = self.weekly.sum_lags(week - 1, week - lag);
        let pred = repaired + (1.0 - g) * sum_daily + g * sum_weekly;
        self.monitor.push(MonitorEntry {
            pred,
            sum_daily,
            sum_weekly,
        });

        if !self.all_finite() {
            self.fault = true;
            self.recoveries += 1;
            self.recover();
        }
    }

    fn all_finite(&self) -> bool {
        self.daily.lag(0).is_finite()
            && self.weekly.lag(0).is_finite()
            && self.blend_num.is_finite()
            && self.blend_den.is_finite()
            && self.model_err.is_finite()
            && self.persist_err.is_finite()
            && self.running_mean.is_finite()
            && self.reversion_num.is_finite()
            && self.reversion_den.is_finite()
            && self.monitor.lag(0).pred.is_finite()
    }

    /// Reinitializes every ring and accumulator while keeping the hold value,
    /// so the line keeps emitting persistence forecasts through the fresh
    /// warmup. Idempotent.
    pub fn recover(&mut self) {
        let day = self.params.steps_per_day;
        let week = self.params.steps_per_week;
        let lag = self.params.monitor_lag;
        self.daily = Ring::new(day, 0.0);
        self.weekly = Ring::new(week, 0.0);
        self.recent = Ring::new(
            lag + 1,
            RecentEntry {
                value: 0.0,
                valid: false,
            },
        );
        self.monitor = Ring::new(
            lag,
            MonitorEntry {
                pred: 0.0,
                sum_daily: 0.0,
                sum_weekly: 0.0,
            },
        );
        self.blend_num = 0.0;
        self.blend_den = 0.0;
        self.model_err = 0.0;
        self.persist_err = 0.0;
        self.running_mean = 0.0;
        self.reversion_num = 0.0;
        self.reversion_den = 0.0;
        self.last_valid_is_latest = false;
        self.steps_seen = 0;
        self.fault = false;
    }

    /// Repaired value at the stream head (zero before any valid data).
    pub fn terminal(&self) -> f64 {
        if self.steps_seen > 0 {
            self.recent.lag(0).value
        } else {
            self.last_valid.unwrap_or(0.0)
        }
    }

    /// Blend weight as used by forecasts: the accumulator ratio clamped to
    /// [0, 1], zero while the denominator is negligible or the weekly ring
    /// has not seen a full week yet.
    pub fn effective_blend(&self) -> f64 {
        if self.steps_seen < self.params.steps_per_week as u64 {
            return 0.0;
        }
        match self.blend_ratio() {
            Some(g) => g.clamp(0.0, 1.0),
            None => 0.0,
        }
    }

    /// Raw blend accumulator ratio, if the denominator is usable.
    pub fn blend_ratio(&self) -> Option<f64> {
        (self.blend_den > DIV_EPS).then(|| self.blend_num / self.blend_den)
    }

    /// Raw blend accumulators (numerator, denominator).
    pub fn blend_components(&self) -> (f64, f64) {
        (self.blend_num, self.blend_den)
    }

    /// Raw reversion accumulators (numerator, denominator).
    pub fn reversion_components(&self) -> (f64, f64) {
        (self.reversion_num, self.reversion_den)
    }

    /// Largest valid increment magnitude, frozen at construction.
    pub fn increment_limit(&self) -> f64 {
        self.increment_limit
    }

    /// Mean-reversion coefficient as used by forecasts.
    pub fn effective_reversion(&self) -> f64 {
        self.reversion_ratio().unwrap_or(0.0)
    }

    /// Raw reversion accumulator ratio, if the denominator is usable.
    pub fn reversion_ratio(&self) -> Option<f64> {
        (self.reversion_den > DIV_EPS).then(|| self.reversion_num / self.reversion_den)
    }

    pub fn model_error(&self) -> f64 {
        self.model_err
    }

    pub fn persistence_error(&self) -> f64 {
        self.persist_err
    }

    pub fn running_mean(&self) -> f64 {
        self.running_mean
    }

    pub fn steps_seen(&self) -> u64 {
        self.steps_seen
    }

    pub fn faulted(&self) -> bool {
        self.fault
    }

    /// Number of fault-triggered reinitializations so far.
    pub fn recoveries(&self) -> u64 {
        self.recoveries
    }

    /// Daily-ring value pushed `k` steps ago (diagnostics).
    pub fn daily_lag(&self, k: usize) -> f64 {
        self.daily.lag(k)
    }

    /// Weekly-ring value pushed `k` steps ago (diagnostics).
    pub fn weekly_lag(&self, k: usize) -> f64 {
        self.weekly.lag(k)
    }

    /// Forecast `steps` ahead of the last consumed sample. Total: out-of-range
    /// horizons are clamped into `[1, horizon]`, and a faulted or warming-up
    /// state answers with persistence.
    pub fn forecast(&self, steps: usize) -> f64 {
        self.forecast_trace(steps).value
    }

    /// Forecast with its full decomposition.
    pub fn forecast_trace(&self, steps: usize) -> ForecastTrace {
        let i = steps.clamp(1, self.params.horizon);
        let y = self.terminal();
        if self.fault || self.steps_seen < self.params.steps_per_day as u64 {
            return ForecastTrace {
                origin: y,
                preliminary: y,
                gated: y,
                corrected: y,
                value: y,
                gate_active: false,
                blend: 0.0,
                reversion: 0.0,
            };
        }
        let day = self.params.steps_per_day;
        let week = self.params.steps_per_week;
        let g = self.effective_blend();
        let preliminary = y
            + (1.0 - g) * self.daily.sum_lags(day - 1, day - i)
            + g * self.weekly.sum_lags(week - 1, week - i);
        let gate_active = self.model_err > self.persist_err;
        let gated = if gate_active { y } else { preliminary };
        let o = self.effective_reversion();
        let corrected = gated + o * (self.running_mean - y) * i as f64;
        let value = apply_saturation(y, corrected, self.params.saturation_limit);
        ForecastTrace {
            origin: y,
            preliminary,
            gated,
            corrected,
            value,
            gate_active,
            blend: g,
            reversion: o,
        }
    }
}

/// Damps a change through `delta / (1 + |delta| / limit)`, which maps the
/// real line onto `(-limit, limit)`, is strictly increasing and odd, and
/// leaves small changes nearly untouched. The bound is kept strict even when
/// rounding pins the ratio to the asymptote.
pub fn saturate(delta: f64, limit: f64) -> f64 {
    if delta.is_nan() {
        return delta;
    }
    let out = delta / (1.0 + delta.abs() / limit);
    if out.abs() < limit {
        out
    } else {
        f64::from_bits(limit.to_bits() - 1).copysign(delta)
    }
}

/// The published forecast value: origin plus the saturated change. Adding
/// the damped change to a large origin rounds onto the origin's ULP lattice,
/// which can land exactly on (or just past) the bound, so the sum is stepped
/// back toward the origin until the realized change is strictly inside it.
pub fn apply_saturation(origin: f64, corrected: f64, limit: f64) -> f64 {
    let mut value = origin + saturate(corrected - origin, limit);
    if !value.is_finite() {
        return origin;
    }
    while (value - origin).abs() >= limit && value != origin {
        value = if value > origin {
            value.next_down()
        } else {
            value.next_up()
        };
    }
    value
}

/// Per-line saturation limit from training data: the 99.5th percentile of
/// monitor-horizon absolute changes between point-valid pairs. Falls back to
/// four times the global RMS when fewer than 100 pairs exist, and to 1.0 when
/// even that is degenerate (an all-zero line).
pub fn saturation_limit_from_training(
    window: &SeriesWindow,
    train_len: usize,
    horizon: usize,
    stats: &ValidityStats,
) -> f64 {
    const MIN_PAIRS: usize = 100;
    const PERCENTILE: f64 = 0.995;
    let end = train_len.min(window.len());
    let mut changes: Vec<f64> = Vec::new();
    if end > horizon {
        for t in 0..(end - horizon) {
            let a = crate::quality::point_validity_bounded(window, t, stats, end - 1);
            let b = crate::quality::point_validity_bounded(window, t + horizon, stats, end - 1);
            if a.is_valid() && b.is_valid() {
                let change =
                    (window.value_at(t + horizon).unwrap() - window.value_at(t).unwrap()).abs();
                changes.push(change);
            }
        }
    }
    let limit = if changes.len() >= MIN_PAIRS {
        changes.sort_by(|a, b| a.partial_cmp(b).expect("finite changes"));
        let rank = ((changes.len() as f64 * PERCENTILE).ceil() as usize).clamp(1, changes.len());
        changes[rank - 1]
    } else {
        4.0 * stats.global_rms
    };
    if limit > 0.0 {
        limit
    } else {
        1.0
    }
}

// ---------------------------------------------------------------------------
// State snapshots
// ---------------------------------------------------------------------------
//
// Versioned little-endian binary layout, bit-exact across save/load:
//
//   magic   8 bytes  b"GFSNAP\0\0"
//   version u32      1
//   params  6 x f64  rates (daily, weekly, blend, error, mean, reversion)
//           4 x u64  horizon, monitor_lag, steps_per_day, steps_per_week
//           f64      saturation_limit
//   f64              increment_limit
//   ring    u64 len + len x f64          daily, ascending time order
//   ring    u64 len + len x f64          weekly
//   ring    u64 len + len x (f64, u8)    recent (value, valid)
//   ring    u64 len + len x (3 x f64)    monitor (pred, sum_daily, sum_weekly)
//   7 x f64          blend_num, blend_den, model_err, persist_err,
//                    running_mean, reversion_num, reversion_den
//   2 x (u8 + f64)   last_valid, prior_valid (tag 0 = absent)
//   u8               last_valid_is_latest
//   u64              steps_seen
//   u8               fault
//   u64              recoveries
//
// Floats are stored as raw IEEE 754 bits, so round-trips are exact for every
// value including infinities. Rings are serialized in logical (time) order;
// re-encoding a decoded state reproduces the byte stream exactly.

const SNAPSHOT_MAGIC: &[u8; 8] = b"GFSNAP\0\0";
const SNAPSHOT_VERSION: u32 = 1;

struct SnapshotWriter {
    buf: Vec<u8>,
}

impl SnapshotWriter {
    fn f64(&mut self, v: f64) {
        self.buf.extend_from_slice(&v.to_bits().to_le_bytes());
    }
    fn u64(&mut self, v: u64) {
        self.buf.extend_from_slice(&v.to_le_bytes());
    }
    fn u8(&mut self, v: u8) {
        self.buf.push(v);
    }
    fn opt(&mut self, v: Option<f64>) {
        self.u8(v.is_some() as u8);
        self.f64(v.unwrap_or(0.0));
    }
}

struct SnapshotReader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> SnapshotReader<'a> {
    fn take(&mut self, n: usize) -> Result<&'a [u8]> {
        if self.pos + n > self.buf.len() {
            return Err(Error::Snapshot("truncated".into()));
        }
        let out = &self.buf[self.pos..self.pos + n];
        self.pos += n;
        Ok(out)
    }
    fn f64(&mut self) -> Result<f64> {
        Ok(f64::from_bits(u64::from_le_bytes(
            self.take(8)?.try_into().unwrap(),
        )))
    }
    fn u64(&mut self) -> Result<u64> {
        Ok(u64::from_le_bytes(self.take(8)?.try_into().unwrap()))
    }
    fn u8(&mut self) -> Result<u8> {
        Ok(self.take(1)?[0])
    }
    fn opt(&mut self) -> Result<Option<f64>> {
        let tag = self.u8()?;
        let v = self.f64()?;
        Ok((tag != 0).then_some(v))
    }
    fn len_checked(&mut self, expected: usize, what: &str) -> Result<usize> {
        let n = self.u64()? as usize;
        if n != expected {
            return Err(Error::Snapshot(format!(
                "{what} length {n}, expected {expected}"
            )));
        }
        Ok(n)
    }
}

impl AdaptiveState {
    /// Serializes the full state; see the layout notes above.
    pub fn to_snapshot(&self) -> Vec<u8> {
        let mut w = SnapshotWriter {
            buf: Vec::with_capacity(64 + 8 * self.daily.capacity()),
        };
        w.buf.extend_from_slice(SNAPSHOT_MAGIC);
        w.buf.extend_from_slice(&SNAPSHOT_VERSION.to_le_bytes());
        let p = &self.params;
        for r in [
            p.rate_daily,
            p.rate_weekly,
            p.rate_blend,
            p.rate_error,
            p.rate_mean,
            p.rate_reversion,
        ] {
            w.f64(r);
        }
        for n in [p.horizon, p.monitor_lag, p.steps_per_day, p.steps_per_week] {
            w.u64(n as u64);
        }
        w.f64(p.saturation_limit);
        w.f64(self.increment_limit);

        w.u64(self.daily.capacity() as u64);
        for v in self.daily.iter_time_asc(self.daily.capacity() - 1, 0) {
            w.f64(v);
        }
        w.u64(self.weekly.capacity() as u64);
        for v in self.weekly.iter_time_asc(self.weekly.capacity() - 1, 0) {
            w.f64(v);
        }
        w.u64(self.recent.capacity() as u64);
        for e in self.recent.iter_time_asc(self.recent.capacity() - 1, 0) {
            w.f64(e.value);
            w.u8(e.valid as u8);
        }
        w.u64(self.monitor.capacity() as u64);
        for e in self.monitor.iter_time_asc(self.monitor.capacity() - 1, 0) {
            w.f64(e.pred);
            w.f64(e.sum_daily);
            w.f64(e.sum_weekly);
        }

        for v in [
            self.blend_num,
            self.blend_den,
            self.model_err,
            self.persist_err,
            self.running_mean,
            self.reversion_num,
            self.reversion_den,
        ] {
            w.f64(v);
        }
        w.opt(self.last_valid);
        w.opt(self.prior_valid);
        w.u8(self.last_valid_is_latest as u8);
        w.u64(self.steps_seen);
        w.u8(self.fault as u8);
        w.u64(self.recoveries);
        w.buf
    }

    /// Restores a state serialized by [`Self::to_snapshot`].
    pub fn from_snapshot(bytes: &[u8]) -> Result<Self> {
        let mut r = SnapshotReader { buf: bytes, pos: 0 };
        if r.take(8)? != SNAPSHOT_MAGIC {
            return Err(Error::Snapshot("bad magic".into()));
        }
        let version = u32::from_le_bytes(r.take(4)?.try_into().unwrap());
        if version != SNAPSHOT_VERSION {
            return Err(Error::Snapshot(format!("unsupported version {version}")));
        }
        let rates: Vec<f64> = (0..6).map(|_| r.f64()).collect::<Result<_>>()?;
        let counts: Vec<u64> = (0..4).map(|_| r.u64()).collect::<Result<_>>()?;
        let params = SmoothingParams {
            rate_daily: rates[0],
            rate_weekly: rates[1],
            rate_blend: rates[2],
            rate_error: rates[3],
            rate_mean: rates[4],
            rate_reversion: rates[5],
            horizon: counts[0] as usize,
            monitor_lag: counts[1] as usize,
            steps_per_day: counts[2] as usize,
            steps_per_week: counts[3] as usize,
            saturation_limit: r.f64()?,
        };
        params
            .validate()
            .map_err(|e| Error::Snapshot(e.to_string()))?;
        let increment_limit = r.f64()?;

        let n = r.len_checked(params.steps_per_day, "daily ring")?;
        let mut daily = Ring::new(n, 0.0);
        for _ in 0..n {
            daily.push(r.f64()?);
        }
        let n = r.len_checked(params.steps_per_week, "weekly ring")?;
        let mut weekly = Ring::new(n, 0.0);
        for _ in 0..n {
            weekly.push(r.f64()?);
        }
        let n = r.len_checked(params.monitor_lag + 1, "recent ring")?;
        let mut recent = Ring::new(
            n,
            RecentEntry {
                value: 0.0,
                valid: false,
            },
        );
        for _ in 0..n {
            let value = r.f64()?;
            let valid = r.u8()? != 0;
            recent.push(RecentEntry { value, valid });
        }
        let n = r.len_checked(params.monitor_lag, "monitor ring")?;
        let mut monitor = Ring::new(
            n,
            MonitorEntry {
                pred: 0.0,
                sum_daily: 0.0,
                sum_weekly: 0.0,
            },
        );
        for _ in 0..n {
            let pred = r.f64()?;
            let sum_daily = r.f64()?;
            let sum_weekly = r.f64()?;
            monitor.push(MonitorEntry {
                pred,
                sum_daily,
                sum_weekly,
            });
        }

        let scalars: Vec<f64> = (0..7).map(|_| r.f64()).collect::<Result<_>>()?;
        let state = Self {
            params,
            increment_limit,
            daily,
            weekly,
            recent,
            monitor,
            blend_num: scalars[0],
            blend_den: scalars[1],
            model_err: scalars[2],
            persist_err: scalars[3],
            running_mean: scalars[4],
            reversion_num: scalars[5],
            reversion_den: scalars[6],
            last_valid: r.opt()?,
            prior_valid: r.opt()?,
            last_valid_is_latest: r.u8()? != 0,
            steps_seen: r.u64()?,
            fault: r.u8()? != 0,
            recoveries: r.u64()?,
        };
        if r.pos != bytes.len() {
            return Err(Error::Snapshot("trailing bytes".into()));
        }
        Ok(state)
    }
}
