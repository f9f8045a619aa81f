//! Flat key=value run configuration.
//!
//! Every tunable of the engine, the validity rules, the generator, and the
//! harness has a key here with a documented default. Files hold one
//! `key=value` pair per line (`#` starts a comment); unknown keys are a hard
//! error so typos never pass silently. Flags override file values.

use gridflow_core::adaptive::SmoothingParams;
use gridflow_core::quality::ValidityStats;
use gridflow_core::series::TimeGrid;
use gridflow_core::synth::GeneratorConfig;
use gridflow_core::{Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct RunConfig {
    // Grid
    pub origin_epoch_s: i64,
    pub step_s: i64,

    // Smoothing / engine
    pub rate_daily: f64,
    pub rate_weekly: f64,
    pub rate_blend: f64,
    pub rate_error: f64,
    pub rate_mean: f64,
    pub rate_reversion: f64,
    pub horizon: usize,
    pub monitor_lag: usize,
    /// Defaults to one day of steps on the configured grid.
    pub steps_per_day: Option<usize>,
    /// Defaults to seven days of steps.
    pub steps_per_week: Option<usize>,
    /// Absent means: calibrate per line from training data.
    pub saturation_limit: Option<f64>,

    // Validity
    pub increment_threshold_factor: f64,
    pub outlier_factor: f64,
    pub zero_run_min: usize,

    // Generator
    pub seed: u64,
    pub days: usize,
    pub lines: usize,
    pub daily_amp: f64,
    pub weekly_amp: f64,
    pub offset: f64,
    pub noise_scale: f64,
    pub spike_prob: f64,
    pub spike_scale: f64,
    pub outage_prob: f64,
    pub outage_mean_len: usize,
    pub missing_prob: f64,
    pub sign_flip: bool,

    // Harness
    pub split: f64,
    pub n_days: usize,
    pub blend_weight: f64,
    /// 0 means: let the runtime pick the pool size.
    pub workers: usize,
}

impl Default for RunConfig {
    fn default() -> Self {
        let sp = SmoothingParams::default();
        let gen = GeneratorConfig::default();
        Self {
            origin_epoch_s: 0,
            step_s: 300,
            rate_daily: sp.rate_daily,
            rate_weekly: sp.rate_weekly,
            rate_blend: sp.rate_blend,
            rate_error: sp.rate_error,
            rate_mean: sp.rate_mean,
            rate_reversion: sp.rate_reversion,
            horizon: sp.horizon,
            monitor_lag: sp.monitor_lag,
            steps_per_day: None,
            steps_per_week: None,
            saturation_limit: None,
            increment_threshold_factor: 2.0,
            outlier_factor: 10.0,
            zero_run_min: 2,
            seed: gen.seed,
            days: gen.days,
            lines: 1,
            daily_amp: gen.daily_amp,
            weekly_amp: gen.weekly_amp,
            offset: gen.offset,
            noise_scale: gen.noise_scale,
            spike_prob: gen.spike_prob,
            spike_scale: gen.spike_scale,
            outage_prob: gen.outage_prob,
            outage_mean_len: gen.outage_mean_len,
            missing_prob: gen.missing_prob,
            sign_flip: gen.sign_flip,
            split: 0.75,
            n_days: 7,
            blend_weight: 0.5,
            workers: 0,
        }
    }
}

fn parse<T: std::str::FromStr>(key: &str, value: &str) -> Result<T> {
    value
        .parse()
        .map_err(|_| Error::Config(format!("invalid value `{value}` for key `{key}`")))
}

impl RunConfig {
    /// Applies one `key=value` assignment; unknown keys are an error.
    pub fn apply(&mut self, key: &str, value: &str) -> Result<()> {
        match key {
            "origin_epoch_s" => self.origin_epoch_s = parse(key, value)?,
            "step_s" => self.step_s = parse(key, value)?,
            "rate_daily" => self.rate_daily = parse(key, value)?,
            "rate_weekly" => self.rate_weekly = parse(key, value)?,
            "rate_blend" => self.rate_blend = parse(key, value)?,
            "rate_error" => self.rate_error = parse(key, value)?,
            "rate_mean" => self.rate_mean = parse(key, value)?,
            "rate_reversion" => self.rate_reversion = parse(key, value)?,
            "horizon" => self.horizon = parse(key, value)?,
            "monitor_lag" => self.monitor_lag = parse(key, value)?,
            "steps_per_day" => self.steps_per_day = Some(parse(key, value)?),
            "steps_per_week" => self.steps_per_week = Some(parse(key, value)?),
            "saturation_limit" => self.saturation_limit = Some(parse(key, value)?),
            "increment_threshold_factor" => self.increment_threshold_factor = parse(key, value)?,
            "outlier_factor" => self.outlier_factor = parse(key, value)?,
            "zero_run_min" => self.zero_run_min = parse(key, value)?,
            "seed" => self.seed = parse(key, value)?,
            "days" => self.days = parse(key, value)?,
            "lines" => self.lines = parse(key, value)?,
            "daily_amp" => self.daily_amp = parse(key, value)?,
            "weekly_amp" => self.weekly_amp = parse(key, value)?,
            "offset" => self.offset = parse(key, value)?,
            "noise_scale" => self.noise_scale = parse(key, value)?,
            "spike_prob" => self.spike_prob = parse(key, value)?,
            "spike_scale" => self.spike_scale = parse(key, value)?,
            "outage_prob" => self.outage_prob = parse(key, value)?,
            "outage_mean_len" => self.outage_mean_len = parse(key, value)?,
            "missing_prob" => self.missing_prob = parse(key, value)?,
            "sign_flip" => self.sign_flip = parse(key, value)?,
            "split" => self.split = parse(key, value)?,
            "n_days" => self.n_days = parse(key, value)?,
            "blend_weight" => self.blend_weight = parse(key, value)?,
            "workers" => self.workers = parse(key, value)?,
            other => return Err(Error::Config(format!("unknown config key `{other}`"))),
        }
        Ok(())
    }

    /// Parses a config file: `key=value` lines, `#` comments, blank lines.
    pub fn apply_file(&mut self, text: &str, path: &str) -> Result<()> {
        for (n, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (key, value) = line.split_once('=').ok_or_else(|| {
                Error::Config(format!(
                    "{path}:{}: expected key=value, found `{line}`",
                    n + 1
                ))
            })?;
            self.apply(key.trim(), value.trim())
                .map_err(|e| Error::Config(format!("{path}:{}: {e}", n + 1)))?;
        }
        Ok(())
    }

    pub fn grid(&self) -> Result<TimeGrid> {
        TimeGrid::new(self.origin_epoch_s, self.step_s)
    }

    pub fn resolved_steps_per_day(&self) -> Result<usize> {
        match self.steps_per_day {
            Some(n) => Ok(n),
            None => {
                if self.step_s <= 0 || 86_400 % self.step_s != 0 {
                    return Err(Error::Config(format!(
                        "step_s must divide one day to derive steps_per_day, got {}",
                        self.step_s
                    )));
                }
                Ok((86_400 / self.step_s) as usize)
            }
        }
    }

    pub fn resolved_steps_per_week(&self) -> Result<usize> {
        match self.steps_per_week {
            Some(n) => Ok(n),
            None => Ok(7 * self.resolved_steps_per_day()?),
        }
    }

    pub fn smoothing_params(&self) -> Result<SmoothingParams> {
        let params = SmoothingParams {
            rate_daily: self.rate_daily,
            rate_weekly: self.rate_weekly,
            rate_blend: self.rate_blend,
            rate_error: self.rate_error,
            rate_mean: self.rate_mean,
            rate_reversion: self.rate_reversion,
            horizon: self.horizon,
            monitor_lag: self.monitor_lag,
            steps_per_day: self.resolved_steps_per_day()?,
            steps_per_week: self.resolved_steps_per_week()?,
            saturation_limit: self.saturation_limit.unwrap_or(f64::INFINITY),
        };
        params.validate()?;
        Ok(params)
    }

    /// Applies the configured validity factors on top of a computed RMS.
    pub fn validity_stats(&self, global_rms: f64) -> Result<ValidityStats> {
        let mut stats = ValidityStats::new(global_rms);
        stats.increment_threshold_factor = self.increment_threshold_factor;
        stats.outlier_factor = self.outlier_factor;
        stats.zero_run_min = self.zero_run_min;
        stats.validate()?;
        Ok(stats)
    }

    pub fn generator_config(&self) -> GeneratorConfig {
        GeneratorConfig {
            seed: self.seed,
            days: self.days,
            step_s: self.step_s,
            daily_amp: self.daily_amp,
            weekly_amp: self.weekly_amp,
            offset: self.offset,
            noise_scale: self.noise_scale,
            spike_prob: self.spike_prob,
            spike_scale: self.spike_scale,
            outage_prob: self.outage_prob,
            outage_mean_len: self.outage_mean_len,
            missing_prob: self.missing_prob,
            sign_flip: self.sign_flip,
            line_id: "L0000".to_string(),
        }
    }
}
