//! Evaluation, stress scenarios, parameter sweeps, and rank scoring.
//!
//! Evaluation is strictly causal: the harness streams the training portion of
//! each line through a per-line predictor, then walks the test range feeding
//! one sample at a time and requesting a forecast before the next sample is
//! revealed. Targets that fail the point-validity check are skipped rather
//! than imputed, and counted. Lines are evaluated in parallel; all outputs
//! are deterministic functions of the inputs, with wall-clock timing kept in
//! the report (never in emitted CSV, which must be byte-stable).

use std::collections::BTreeMap;
use std::time::Instant;

use rayon::prelude::*;

use crate::adaptive::{saturation_limit_from_training, AdaptiveState, SmoothingParams};
use crate::quality::{point_validity, StreamGate, ValidityStats};
use crate::recurrent::{compose_recurrent_forecast, IncrementFilter, RecurrentConfig};
use crate::series::{Sample, SampleValue, SeriesWindow};
use crate::{Error, Result};

/// Accuracy and timing of one model over a line set.
#[derive(Debug, Clone, PartialEq)]
pub struct EvalReport {
    pub name: String,
    pub per_line_rmse: BTreeMap<String, f64>,
    /// RMSE pooled over every scored point of every line.
    pub aggregate_rmse: f64,
    /// Wall-clock seconds around train + predict (no file I/O).
    pub elapsed_s: f64,
    pub n_predictions: usize,
    pub n_skipped: usize,
}

/// One prediction emitted during evaluation, for plots and pipeline checks.
#[derive(Debug, Clone, PartialEq)]
pub struct PredictionRow {
    pub line_id: String,
    pub origin: usize,
    pub horizon: usize,
    pub prediction: f64,
    pub target: Option<f64>,
}

/// Per-line evaluation context handed to model factories.
pub struct EvalSetup<'a> {
    pub line: &'a SeriesWindow,
    pub train_len: usize,
    pub horizon: usize,
    pub stats: &'a ValidityStats,
}

/// A per-line streaming predictor: observes samples in order and answers
/// forecasts from the last observed position. `None` means the model cannot
/// produce a value there; the harness counts it as skipped.
pub trait LinePredictor {
    fn observe(&mut self, sample: &Sample);
    fn predict(&mut self, horizon: usize) -> Option<f64>;
}

/// A forecasting model that can be instantiated per line.
pub trait ForecastModel: Sync {
    fn name(&self) -> String;
    fn spawn(&self, setup: &EvalSetup) -> Box<dyn LinePredictor>;
}

/// Training-portion length for a line of `len` samples.
pub fn split_train_len(len: usize, split: f64) -> usize {
    if len == 0 {
        return 0;
    }
    ((len as f64 * split).floor() as usize).clamp(1, len)
}

/// Pools validity statistics over the training portion of every line.
pub fn train_stats(lines: &[SeriesWindow], split: f64) -> Result<ValidityStats> {
    let mut sum_sq = 0.0;
    let mut count = 0usize;
    for line in lines {
        let train_len = split_train_len(line.len(), split);
        for s in &line.samples[..train_len] {
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

/// Evaluates a model over the line set. See the module notes for the
/// causality and skipping rules.
pub fn evaluate(
    model: &dyn ForecastModel,
    lines: &[SeriesWindow],
    horizon: usize,
    split: f64,
) -> Result<EvalReport> {
    Ok(evaluate_detailed(model, lines, horizon, split, false)?.0)
}

/// Like [`evaluate`], optionally collecting every emitted prediction.
pub fn evaluate_detailed(
    model: &dyn ForecastModel,
    lines: &[SeriesWindow],
    horizon: usize,
    split: f64,
    collect_predictions: bool,
) -> Result<(EvalReport, Vec<PredictionRow>)> {
    if lines.is_empty() {
        return Err(Error::NoData);
    }
    if horizon == 0 {
        return Err(Error::Config("horizon must be at least 1".into()));
    }
    if !(0.0 < split && split < 1.0) {
        return Err(Error::Config(format!(
            "split must lie in (0, 1), got {split}"
        )));
    }

    struct LineOutcome {
        line_id: String,
        sum_sq: f64,
        n: usize,
        skipped: usize,
        rows: Vec<PredictionRow>,
    }

    let started = Instant::now();
    let stats = train_stats(lines, split)?;

    let outcomes: Vec<LineOutcome> = lines
        .par_iter()
        .map(|line| {
            let train_len = split_train_len(line.len(), split);
            let setup = EvalSetup {
                line,
                train_len,
                horizon,
                stats: &stats,
            };
            let mut predictor = model.spawn(&setup);
            let mut outcome = LineOutcome {
                line_id: line.line_id.clone(),
                sum_sq: 0.0,
                n: 0,
                skipped: 0,
                rows: Vec::new(),
            };
            for t in 0..line.len() {
                predictor.observe(&line.sample_at(t));
                let is_origin = t + 1 >= train_len && t + horizon < line.len();
                if !is_origin {
                    continue;
                }
                let target_pos = t + horizon;
                let target_ok = point_validity(line, target_pos, &stats).is_valid();
                let target = line.value_at(target_pos);
                match predictor.predict(horizon) {
                    Some(pred) if pred.is_finite() => {
                        if target_ok {
                            let err = target.expect("valid implies present") - pred;
                            outcome.sum_sq += err * err;
                            outcome.n += 1;
                        } else {
                            outcome.skipped += 1;
                        }
                        if collect_predictions {
                            outcome.rows.push(PredictionRow {
                                line_id: line.line_id.clone(),
                                origin: line.index_at(t),
                                horizon,
                                prediction: pred,
                                target: if target_ok { target } else { None },
                            });
                        }
                    }
                    _ => outcome.skipped += 1,
                }
            }
            outcome
        })
        .collect();

    let mut per_line_rmse = BTreeMap::new();
    let mut total_sq = 0.0;
    let mut total_n = 0usize;
    let mut skipped = 0usize;
    let mut rows = Vec::new();
    for o in outcomes {
        if o.n > 0 {
            per_line_rmse.insert(o.line_id.clone(), (o.sum_sq / o.n as f64).sqrt());
        }
        total_sq += o.sum_sq;
        total_n += o.n;
        skipped += o.skipped;
        rows.extend(o.rows);
    }
    if total_n == 0 {
        return Err(Error::NoEvaluablePoints);
    }
    let report = EvalReport {
        name: model.name(),
        per_line_rmse,
        aggregate_rmse: (total_sq / total_n as f64).sqrt(),
        elapsed_s: started.elapsed().as_secs_f64(),
        n_predictions: total_n,
        n_skipped: skipped,
    };
    Ok((report, rows))
}

// ---------------------------------------------------------------------------
// Models
// ---------------------------------------------------------------------------

/// The naive baseline: repeat the last present value.
pub struct PersistenceModel;

impl ForecastModel for PersistenceModel {
    fn name(&self) -> String {
        "persistence".into()
    }

    fn spawn(&self, _setup: &EvalSetup) -> Box<dyn LinePredictor> {
        struct P {
            last: SampleValue,
        }
        impl LinePredictor for P {
            fn observe(&mut self, sample: &Sample) {
                self.last = sample.value;
            }
            fn predict(&mut self, _horizon: usize) -> Option<f64> {
                self.last.value()
            }
        }
        Box::new(P {
            last: SampleValue::Missing,
        })
    }
}

/// Shared buffer for window-based batch models.
struct BufferedLine {
    window: SeriesWindow,
}

impl BufferedLine {
    fn new(line_id: &str) -> Self {
        Self {
            window: SeriesWindow::new(line_id, 0, Vec::new()),
        }
    }

    fn push(&mut self, sample: &Sample) {
        if self.window.samples.is_empty() {
            self.window.start_index = sample.index;
        }
        debug_assert_eq!(
            sample.index,
            self.window.start_index + self.window.samples.len()
        );
        self.window.samples.push(sample.value);
    }

    fn origin(&self) -> Option<usize> {
        self.window.samples.len().checked_sub(1)
    }
}

/// Batch N-day recurrent-fluctuations model.
pub struct RecurrentModel {
    pub config: RecurrentConfig,
    pub filter: IncrementFilter,
}

impl ForecastModel for RecurrentModel {
    fn name(&self) -> String {
        match self.filter {
            IncrementFilter::Filtered => format!("recurrent{}d", self.config.n_days),
            IncrementFilter::Raw => format!("recurrent{}d-raw", self.config.n_days),
        }
    }

    fn spawn(&self, setup: &EvalSetup) -> Box<dyn LinePredictor> {
        struct P {
            buf: BufferedLine,
            config: RecurrentConfig,
            filter: IncrementFilter,
            stats: ValidityStats,
        }
        impl LinePredictor for P {
            fn observe(&mut self, sample: &Sample) {
                self.buf.push(sample);
            }
            fn predict(&mut self, horizon: usize) -> Option<f64> {
                let t = self.buf.origin()?;
                let cfg = RecurrentConfig {
                    horizon,
                    ..self.config
                };
                compose_recurrent_forecast(&self.buf.window, t, &cfg, &self.stats, self.filter).ok()
            }
        }
        Box::new(P {
            buf: BufferedLine::new(&setup.line.line_id),
            config: self.config,
            filter: self.filter,
            stats: *setup.stats,
        })
    }
}

/// Daily-seasonal baseline as a streaming model.
pub struct SeasonalDailyModel {
    pub steps_per_day: usize,
}

impl ForecastModel for SeasonalDailyModel {
    fn name(&self) -> String {
        "seasonal-daily".into()
    }

    fn spawn(&self, setup: &EvalSetup) -> Box<dyn LinePredictor> {
        struct P {
            buf: BufferedLine,
            steps_per_day: usize,
        }
        impl LinePredictor for P {
            fn observe(&mut self, sample: &Sample) {
                self.buf.push(sample);
            }
            fn predict(&mut self, horizon: usize) -> Option<f64> {
                let t = self.buf.origin()?;
                crate::baselines::seasonal_daily_forecast(
                    &self.buf.window,
                    t,
                    horizon,
                    self.steps_per_day,
                )
                .ok()
            }
        }
        Box::new(P {
            buf: BufferedLine::new(&setup.line.line_id),
            steps_per_day: self.steps_per_day,
        })
    }
}

/// Fixed-weight daily/weekly blend baseline as a streaming model.
pub struct SeasonalBlendModel {
    pub steps_per_day: usize,
    pub steps_per_week: usize,
    pub weight: crate::baselines::BlendWeight,
}

impl ForecastModel for SeasonalBlendModel {
    fn name(&self) -> String {
        "seasonal-blend".into()
    }

    fn spawn(&self, setup: &EvalSetup) -> Box<dyn LinePredictor> {
        struct P {
            buf: BufferedLine,
            steps_per_day: usize,
            steps_per_week: usize,
            weight: crate::baselines::BlendWeight,
        }
        impl LinePredictor for P {
            fn observe(&mut self, sample: &Sample) {
                self.buf.push(sample);
            }
            fn predict(&mut self, horizon: usize) -> Option<f64> {
                let t = self.buf.origin()?;
                crate::baselines::seasonal_blend_forecast(
                    &self.buf.window,
                    t,
                    horizon,
                    self.steps_per_day,
                    self.steps_per_week,
                    self.weight,
                )
                .ok()
            }
        }
        Box::new(P {
            buf: BufferedLine::new(&setup.line.line_id),
            steps_per_day: self.steps_per_day,
            steps_per_week: self.steps_per_week,
            weight: self.weight,
        })
    }
}

/// The streaming adaptive forecaster. When the configured saturation limit
/// is infinite, each line calibrates its own limit from the training slice.
pub struct AdaptiveModel {
    pub params: SmoothingParams,
}

impl ForecastModel for AdaptiveModel {
    fn name(&self) -> String {
        "adaptive".into()
    }

    fn spawn(&self, setup: &EvalSetup) -> Box<dyn LinePredictor> {
        let mut params = self.params.clone();
        if params.saturation_limit.is_infinite() {
            params.saturation_limit = saturation_limit_from_training(
                setup.line,
                setup.train_len,
                params.horizon,
                setup.stats,
            );
        }
        let state =
            AdaptiveState::new(params, setup.stats).expect("harness params are validated upstream");
        Box::new(AdaptivePredictor {
            state,
            gate: StreamGate::new(*setup.stats),
        })
    }
}

/// Streaming driver pairing an [`AdaptiveState`] with its validity gate.
pub struct AdaptivePredictor {
    pub state: AdaptiveState,
    pub gate: StreamGate,
}

impl LinePredictor for AdaptivePredictor {
    fn observe(&mut self, sample: &Sample) {
        let verdict = self.gate.assess(&sample.value);
        self.state.update(&sample.value, verdict);
    }

    fn predict(&mut self, horizon: usize) -> Option<f64> {
        Some(self.state.forecast(horizon))
    }
}

// ---------------------------------------------------------------------------
// Stress scenarios
// ---------------------------------------------------------------------------

/// Dataset mutations for robustness runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ScenarioKind {
    /// Replace a fraction of points with NaN, huge values, and exact zeros,
    /// in equal thirds.
    InjectOutliers,
    /// Delete a fraction of points, creating gaps.
    DropPoints,
    /// Permute day-sized blocks among themselves.
    ShuffleSegments,
    /// Duplicate or remove whole lines.
    ResizeGrid,
}

impl ScenarioKind {
    pub fn parse(name: &str) -> Result<Self> {
        match name {
            "inject-outliers" => Ok(Self::InjectOutliers),
            "drop-points" => Ok(Self::DropPoints),
            "shuffle-segments" => Ok(Self::ShuffleSegments),
            "resize-grid" => Ok(Self::ResizeGrid),
            other => Err(Error::Config(format!(
                "unknown scenario kind `{other}` (expected inject-outliers, drop-points, \
                 shuffle-segments, or resize-grid)"
            ))),
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            Self::InjectOutliers => "inject-outliers",
            Self::DropPoints => "drop-points",
            Self::ShuffleSegments => "shuffle-segments",
            Self::ResizeGrid => "resize-grid",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StressScenario {
    pub kind: ScenarioKind,
    /// Fraction of points (or blocks, or lines) affected, in [0, 1].
    pub intensity: f64,
    pub seed: u64,
    /// Block size for segment shuffling.
    pub steps_per_day: usize,
}

impl StressScenario {
    pub fn validate(&self) -> Result<()> {
        if !(0.0..=1.0).contains(&self.intensity) {
            return Err(Error::Config(format!(
                "scenario intensity must lie in [0, 1], got {}",
                self.intensity
            )));
        }
        if self.steps_per_day == 0 {
            return Err(Error::Config(
                "scenario steps_per_day must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Picks `k` distinct positions out of `n` by partial Fisher-Yates, returned
/// sorted so downstream assignment is order-independent.
fn pick_positions(rng: &mut crate::rng::SplitMix64, n: usize, k: usize) -> Vec<usize> {
    let mut pool: Vec<usize> = (0..n).collect();
    let k = k.min(n);
    for i in 0..k {
        let j = i + rng.next_below((n - i) as u64) as usize;
        pool.swap(i, j);
    }
    let mut picked = pool[..k].to_vec();
    picked.sort_unstable();
    picked
}

/// Applies a stress scenario. Pure: the output depends only on the inputs.
pub fn apply_scenario(lines: &[SeriesWindow], scenario: &StressScenario) -> Vec<SeriesWindow> {
    scenario.validate().expect("caller validates scenarios");
    match scenario.kind {
        ScenarioKind::InjectOutliers => lines
            .iter()
            .enumerate()
            .map(|(li, line)| {
                let mut rng = crate::rng::SplitMix64::for_stream(scenario.seed, li as u64);
                let mut out = line.clone();
                let k = (scenario.intensity * line.len() as f64).floor() as usize;
                for (j, pos) in pick_positions(&mut rng, line.len(), k)
                    .into_iter()
                    .enumerate()
                {
                    out.samples[pos] = match j % 3 {
                        0 => SampleValue::NonNumeric,
                        1 => {
                            let sign = if rng.next_bool(0.5) { 1.0 } else { -1.0 };
                            SampleValue::Present(sign * 1e9)
                        }
                        _ => SampleValue::Present(0.0),
                    };
                }
                out
            })
            .collect(),
        ScenarioKind::DropPoints => lines
            .iter()
            .enumerate()
            .map(|(li, line)| {
                let mut rng = crate::rng::SplitMix64::for_stream(scenario.seed, li as u64);
                let mut out = line.clone();
                let k = (scenario.intensity * line.len() as f64).floor() as usize;
                for pos in pick_positions(&mut rng, line.len(), k) {
                    out.samples[pos] = SampleValue::Missing;
                }
                out
            })
            .collect(),
        ScenarioKind::ShuffleSegments => lines
            .iter()
            .enumerate()
            .map(|(li, line)| {
                let mut rng = crate::rng::SplitMix64::for_stream(scenario.seed, li as u64);
                let spd = scenario.steps_per_day;
                let n_blocks = line.len() / spd;
                let k = (scenario.intensity * n_blocks as f64).floor() as usize;
                let chosen = pick_positions(&mut rng, n_blocks, k);
                // Permute the chosen blocks among themselves.
                let mut order = chosen.clone();
                for i in (1..order.len()).rev() {
                    let j = rng.next_below((i + 1) as u64) as usize;
                    order.swap(i, j);
                }
                let mut out = line.clone();
                for (slot, src_block) in chosen.iter().zip(order.iter()) {
                    let dst = slot * spd;
                    let src = src_block * spd;
                    out.samples[dst..dst + spd].copy_from_slice(&line.samples[src..src + spd]);
                }
                out
            })
            .collect(),
        ScenarioKind::ResizeGrid => {
            let mut rng = crate::rng::SplitMix64::for_stream(scenario.seed, u64::MAX);
            let k = (scenario.intensity * lines.len() as f64).floor() as usize;
            let chosen = pick_positions(&mut rng, lines.len(), k);
            let mut removed = Vec::new();
            let mut duplicated = Vec::new();
            for idx in chosen {
                if rng.next_bool(0.5) {
                    removed.push(idx);
                } else {
                    duplicated.push(idx);
                }
            }
            let mut out: Vec<SeriesWindow> = lines
                .iter()
                .enumerate()
                .filter(|(i, _)| !removed.contains(i))
                .map(|(_, l)| l.clone())
                .collect();
            for idx in duplicated {
                let mut dup = lines[idx].clone();
                dup.line_id = format!("{}#dup", dup.line_id);
                out.push(dup);
            }
            out
        }
    }
}

// ---------------------------------------------------------------------------
// Rank scoring
// ---------------------------------------------------------------------------

/// One entrant's position in the combined accuracy/speed ranking.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedEntry {
    pub name: String,
    pub accuracy_rank: usize,
    pub speed_rank: usize,
    /// 2 x accuracy rank + 1 x speed rank; lower wins.
    pub score: usize,
    pub rmse: f64,
    pub elapsed_s: f64,
}

/// Competition scoring: the accuracy ranking carries twice the weight of the
/// speed ranking; ties break by lower RMSE, then by name.
pub fn rank_score(reports: &[EvalReport]) -> Vec<RankedEntry> {
    let by_key = |key: fn(&EvalReport) -> f64| -> Vec<usize> {
        let mut order: Vec<usize> = (0..reports.len()).collect();
        order.sort_by(|&a, &b| {
            key(&reports[a])
                .total_cmp(&key(&reports[b]))
                .then_with(|| reports[a].name.cmp(&reports[b].name))
        });
        let mut ranks = vec![0usize; reports.len()];
        for (rank, idx) in order.into_iter().enumerate() {
            ranks[idx] = rank + 1;
        }
        ranks
    };
    let acc = by_key(|r| r.aggregate_rmse);
    let spd = by_key(|r| r.elapsed_s);
    let mut entries: Vec<RankedEntry> = reports
        .iter()
        .enumerate()
        .map(|(i, r)| RankedEntry {
            name: r.name.clone(),
            accuracy_rank: acc[i],
            speed_rank: spd[i],
            score: 2 * acc[i] + spd[i],
            rmse: r.aggregate_rmse,
            elapsed_s: r.elapsed_s,
        })
        .collect();
    entries.sort_by(|a, b| {
        a.score
            .cmp(&b.score)
            .then_with(|| a.rmse.total_cmp(&b.rmse))
            .then_with(|| a.name.cmp(&b.name))
    });
    entries
}

// ---------------------------------------------------------------------------
// Parameter sweeps
// ---------------------------------------------------------------------------

/// One axis of a parameter grid, keyed by [`SmoothingParams::set_key`] names.
#[derive(Debug, Clone, PartialEq)]
pub struct SweepAxis {
    pub key: String,
    pub values: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SweepRow {
    pub assignment: Vec<(String, f64)>,
    pub report: EvalReport,
}

/// Cartesian sweep of the adaptive forecaster over a parameter grid, in
/// lexicographic axis order.
pub fn sweep(
    base: &SmoothingParams,
    axes: &[SweepAxis],
    lines: &[SeriesWindow],
    horizon: usize,
    split: f64,
) -> Result<Vec<SweepRow>> {
    if axes.is_empty() || axes.iter().any(|a| a.values.is_empty()) {
        return Err(Error::Config(
            "sweep needs at least one value per axis".into(),
        ));
    }
    let mut rows = Vec::new();
    let mut indices = vec![0usize; axes.len()];
    loop {
        let mut params = base.clone();
        let mut assignment = Vec::with_capacity(axes.len());
        for (axis, &i) in axes.iter().zip(indices.iter()) {
            params.set_key(&axis.key, axis.values[i])?;
            assignment.push((axis.key.clone(), axis.values[i]));
        }
        params.validate()?;
        let report = evaluate(&AdaptiveModel { params }, lines, horizon, split)?;
        rows.push(SweepRow { assignment, report });

        // Advance the odometer, last axis fastest.
        let mut pos = axes.len();
        loop {
            if pos == 0 {
                return Ok(rows);
            }
            pos -= 1;
            indices[pos] += 1;
            if indices[pos] < axes[pos].values.len() {
                break;
            }
            indices[pos] = 0;
        }
    }
}

// ---------------------------------------------------------------------------
// CSV emission
// ---------------------------------------------------------------------------

/// Formats a float the way the wire format does: shortest representation
/// that parses back to the same bits.
fn fmt_f64(v: f64) -> String {
    format!("{v}")
}

/// Report table: one aggregate row per model (line_id `*`), optionally
/// followed by per-line rows, sorted. Timing is intentionally absent so the
/// bytes are stable.
pub fn report_csv(reports: &[EvalReport], per_line: bool) -> String {
    let mut out = String::from("model,line_id,rmse,n_predictions,n_skipped\n");
    for r in reports {
        out.push_str(&format!(
            "{},*,{},{},{}\n",
            r.name,
            fmt_f64(r.aggregate_rmse),
            r.n_predictions,
            r.n_skipped
        ));
        if per_line {
            for (line, rmse) in &r.per_line_rmse {
                out.push_str(&format!("{},{},{},,\n", r.name, line, fmt_f64(*rmse)));
            }
        }
    }
    out
}

/// Sweep table: one row per grid point with the axis values as columns.
pub fn sweep_csv(rows: &[SweepRow]) -> String {
    let mut out = String::new();
    if rows.is_empty() {
        return out;
    }
    let keys: Vec<&str> = rows[0].assignment.iter().map(|(k, _)| k.as_str()).collect();
    out.push_str(&keys.join(","));
    out.push_str(",rmse,n_predictions,n_skipped\n");
    for row in rows {
        for (_, v) in &row.assignment {
            out.push_str(&fmt_f64(*v));
            out.push(',');
        }
        out.push_str(&format!(
            "{},{},{}\n",
            fmt_f64(row.report.aggregate_rmse),
            row.report.n_predictions,
            row.report.n_skipped
        ));
    }
    out
}

/// Long-format plotting row.
#[derive(Debug, Clone, PartialEq)]
pub struct LongRow {
    pub time_index: usize,
    pub series: String,
    pub value: f64,
}

/// `time_index,series,value` CSV for external plotting tools.
pub fn long_csv(rows: &[LongRow]) -> String {
    let mut out = String::from("time_index,series,value\n");
    for r in rows {
        out.push_str(&format!(
            "{},{},{}\n",
            r.time_index,
            r.series,
            fmt_f64(r.value)
        ));
    }
    out
}

/// Expected one-step fluctuations over a position range, as plot rows.
pub fn fluctuation_rows(
    window: &SeriesWindow,
    cfg: &RecurrentConfig,
    stats: &ValidityStats,
    filter: IncrementFilter,
    series: &str,
    range: std::ops::Range<usize>,
) -> Result<Vec<LongRow>> {
    let mut rows = Vec::new();
    for t in range {
        let (delta, _count) =
            crate::recurrent::expected_fluctuation(window, t, cfg, stats, filter)?;
        rows.push(LongRow {
            time_index: window.index_at(t),
            series: series.to_string(),
            value: delta,
        });
    }
    Ok(rows)
}
