//! `gridflow`: generate fixtures, train per-line forecaster states, stream
//! forecasts, and run evaluations, stress scenarios, and parameter sweeps.
//!
//! Exit codes: 0 success, 1 data error (unreadable or unusable input),
//! 2 usage error (bad flags, bad config, unknown names). Data outputs go to
//! the requested files; diagnostics, skipped-row logs, and timing go to
//! stderr so output files are byte-stable for identical config and seed.

use gridflow_cli::{config, model};

use std::fs;
use std::io::{BufReader, BufWriter, Write};
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand};
use rayon::prelude::*;

use gridflow_core::adaptive::{saturation_limit_from_training, AdaptiveState};
use gridflow_core::harness::{
    self, apply_scenario, evaluate_detailed, AdaptiveModel, ForecastModel, PersistenceModel,
    RecurrentModel, ScenarioKind, SeasonalBlendModel, SeasonalDailyModel, StressScenario,
    SweepAxis,
};
use gridflow_core::quality::{compute_global_rms, StreamGate};
use gridflow_core::recurrent::{IncrementFilter, RecurrentConfig};
use gridflow_core::series::SeriesWindow;
use gridflow_core::synth::generate_lines;
use gridflow_core::wire;
use gridflow_core::{Error, Result};

use config::RunConfig;
use model::{LineModel, ModelBundle};

#[derive(Parser)]
#[command(
    name = "gridflow",
    version,
    about = "Streaming grid-flow forecasting engine"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,

    /// Key=value config file; flags override file values.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,

    /// Override one config key (repeatable), e.g. --set rate_daily=0.1
    #[arg(long = "set", global = true, value_name = "KEY=VALUE")]
    set: Vec<String>,

    /// Worker pool size; 0 picks one thread per core.
    #[arg(long, global = true)]
    workers: Option<usize>,
}

#[derive(Subcommand)]
enum Command {
    /// Generate a synthetic fixture CSV.
    Generate(GenerateArgs),
    /// Train per-line states from a CSV and write a model directory.
    Train(TrainArgs),
    /// Stream new data through a trained model and emit forecasts.
    Forecast(ForecastArgs),
    /// Evaluate one or more models on a fixture.
    Evaluate(EvaluateArgs),
    /// Mutate a fixture with a stress scenario, then evaluate the adaptive model.
    Stress(StressArgs),
    /// Cartesian parameter sweep of the adaptive model.
    Sweep(SweepArgs),
}

#[derive(Args)]
struct GenerateArgs {
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long)]
    seed: Option<u64>,
    #[arg(long)]
    days: Option<usize>,
    #[arg(long)]
    lines: Option<usize>,
    /// Grid step in seconds.
    #[arg(long, value_name = "SECONDS")]
    step: Option<i64>,
}

#[derive(Args)]
struct TrainArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "DIR")]
    out_dir: PathBuf,
}

#[derive(Args)]
struct ForecastArgs {
    #[arg(long, value_name = "DIR")]
    model_dir: PathBuf,
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long)]
    horizon: Option<usize>,
}

#[derive(Args)]
struct EvaluateArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Model name (repeatable): persistence, adaptive, recurrent,
    /// recurrent-raw, seasonal-daily, seasonal-blend.
    #[arg(long = "model", required = true, value_name = "NAME")]
    models: Vec<String>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    split: Option<f64>,
    /// Also write every emitted prediction.
    #[arg(long, value_name = "FILE")]
    predictions: Option<PathBuf>,
    /// Also write a long-format plot CSV (time_index,series,value).
    #[arg(long, value_name = "FILE")]
    plot: Option<PathBuf>,
    /// Include per-line RMSE rows in the report.
    #[arg(long)]
    per_line: bool,
}

#[derive(Args)]
struct StressArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// inject-outliers, drop-points, shuffle-segments, or resize-grid.
    #[arg(long)]
    kind: String,
    #[arg(long)]
    intensity: f64,
    #[arg(long, default_value_t = 1)]
    scenario_seed: u64,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    split: Option<f64>,
}

#[derive(Args)]
struct SweepArgs {
    #[arg(long, value_name = "FILE")]
    input: PathBuf,
    /// Axis spec (repeatable): key=v1,v2,v3
    #[arg(long = "axis", required = true, value_name = "KEY=V1,V2,...")]
    axes: Vec<String>,
    #[arg(long, value_name = "FILE")]
    out: PathBuf,
    #[arg(long)]
    horizon: Option<usize>,
    #[arg(long)]
    split: Option<f64>,
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e}");
            match e {
                Error::Config(_) => ExitCode::from(2),
                _ => ExitCode::from(1),
            }
        }
    }
}

fn run(cli: Cli) -> Result<()> {
    let mut cfg = RunConfig::default();
    if let Some(path) = &cli.config {
        let text = fs::read_to_string(path)?;
        cfg.apply_file(&text, &path.display().to_string())?;
    }
    for pair in &cli.set {
        let (key, value) = pair
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--set expects key=value, got `{pair}`")))?;
        cfg.apply(key.trim(), value.trim())?;
    }
    if let Some(w) = cli.workers {
        cfg.workers = w;
    }
    if cfg.workers > 0 {
        // Ignore the error if a pool already exists (e.g. repeated in-process runs).
        let _ = rayon::ThreadPoolBuilder::new()
            .num_threads(cfg.workers)
            .build_global();
    }

    match cli.command {
        Command::Generate(args) => cmd_generate(cfg, args),
        Command::Train(args) => cmd_train(cfg, args),
        Command::Forecast(args) => cmd_forecast(cfg, args),
        Command::Evaluate(args) => cmd_evaluate(cfg, args),
        Command::Stress(args) => cmd_stress(cfg, args),
        Command::Sweep(args) => cmd_sweep(cfg, args),
    }
}

fn read_input(path: &Path, grid: &gridflow_core::series::TimeGrid) -> Result<Vec<SeriesWindow>> {
    let file = fs::File::open(path)?;
    let (windows, log) = wire::read_csv(BufReader::new(file), grid)?;
    if !log.skipped.is_empty() {
        eprintln!(
            "{}: skipped {} malformed rows",
            path.display(),
            log.skipped.len()
        );
        for (row, reason) in log.skipped.iter().take(5) {
            eprintln!("  row {row}: {reason}");
        }
    }
    if windows.is_empty() {
        return Err(Error::NoData);
    }
    Ok(windows)
}

fn write_file(path: &Path, contents: &str) -> Result<()> {
    let mut out = BufWriter::new(fs::File::create(path)?);
    out.write_all(contents.as_bytes())?;
    Ok(())
}

fn cmd_generate(mut cfg: RunConfig, args: GenerateArgs) -> Result<()> {
    if let Some(seed) = args.seed {
        cfg.seed = seed;
    }
    if let Some(days) = args.days {
        cfg.days = days;
    }
    if let Some(lines) = args.lines {
        cfg.lines = lines;
    }
    if let Some(step) = args.step {
        cfg.step_s = step;
    }
    if cfg.lines == 0 {
        return Err(Error::Config("lines must be at least 1".into()));
    }
    let windows = generate_lines(&cfg.generator_config(), cfg.lines)?;
    let grid = cfg.grid()?;
    let mut out = BufWriter::new(fs::File::create(&args.out)?);
    wire::write_csv(&mut out, &windows, &grid)?;
    out.flush()?;
    eprintln!(
        "generated {} lines x {} steps -> {}",
        cfg.lines,
        windows[0].len(),
        args.out.display()
    );
    Ok(())
}

fn cmd_train(cfg: RunConfig, args: TrainArgs) -> Result<()> {
    let grid = cfg.grid()?;
    let windows = read_input(&args.input, &grid)?;
    let rms = compute_global_rms(&windows)?;
    let stats = cfg.validity_stats(rms.global_rms)?;
    let params = cfg.smoothing_params()?;

    let trained: Vec<(String, LineModel)> = windows
        .par_iter()
        .map(|line| {
            let mut line_params = params.clone();
            if line_params.saturation_limit.is_infinite() {
                line_params.saturation_limit =
                    saturation_limit_from_training(line, line.len(), line_params.horizon, &stats);
            }
            let mut state = AdaptiveState::new(line_params, &stats)?;
            let mut gate = StreamGate::new(stats);
            for sample in &line.samples {
                let verdict = gate.assess(sample);
                state.update(sample, verdict);
            }
            Ok((
                line.line_id.clone(),
                LineModel {
                    state,
                    gate_zero: gate.remembers_zero(),
                },
            ))
        })
        .collect::<Result<_>>()?;

    let bundle = ModelBundle {
        grid,
        stats,
        lines: trained.into_iter().collect(),
    };
    fs::create_dir_all(&args.out_dir)?;
    fs::write(args.out_dir.join("model.gfm"), bundle.to_bytes())?;
    write_file(&args.out_dir.join("stats.kv"), &model::stats_kv(&stats))?;
    eprintln!(
        "trained {} lines -> {}",
        bundle.lines.len(),
        args.out_dir.display()
    );
    Ok(())
}

fn cmd_forecast(cfg: RunConfig, args: ForecastArgs) -> Result<()> {
    let horizon = args.horizon.unwrap_or(cfg.horizon);
    let bundle_bytes = fs::read(args.model_dir.join("model.gfm"))?;
    let mut bundle = ModelBundle::from_bytes(&bundle_bytes)?;
    let windows = read_input(&args.input, &bundle.grid)?;

    let mut out = BufWriter::new(fs::File::create(&args.out)?);
    writeln!(out, "line_id,origin_index,horizon,value")?;
    for line in &windows {
        let Some(trained) = bundle.lines.get_mut(&line.line_id) else {
            eprintln!("no trained state for line `{}`; skipping", line.line_id);
            continue;
        };
        let mut gate = StreamGate::with_memory(bundle.stats, trained.gate_zero);
        for (k, sample) in line.samples.iter().enumerate() {
            let verdict = gate.assess(sample);
            trained.state.update(sample, verdict);
            let value = trained.state.forecast(horizon);
            writeln!(
                out,
                "{},{},{},{}",
                line.line_id,
                line.index_at(k),
                horizon,
                value
            )?;
        }
        trained.gate_zero = gate.remembers_zero();
    }
    out.flush()?;
    Ok(())
}

fn build_model(name: &str, cfg: &RunConfig) -> Result<Box<dyn ForecastModel>> {
    match name {
        "persistence" => Ok(Box::new(PersistenceModel)),
        "adaptive" => Ok(Box::new(AdaptiveModel {
            params: cfg.smoothing_params()?,
        })),
        "recurrent" | "recurrent-raw" => {
            let config = RecurrentConfig::new(
                cfg.n_days,
                cfg.resolved_steps_per_day()?,
                cfg.horizon.min(cfg.resolved_steps_per_day()?),
            )?;
            let filter = if name == "recurrent" {
                IncrementFilter::Filtered
            } else {
                IncrementFilter::Raw
            };
            Ok(Box::new(RecurrentModel { config, filter }))
        }
        "seasonal-daily" => Ok(Box::new(SeasonalDailyModel {
            steps_per_day: cfg.resolved_steps_per_day()?,
        })),
        "seasonal-blend" => Ok(Box::new(SeasonalBlendModel {
            steps_per_day: cfg.resolved_steps_per_day()?,
            steps_per_week: cfg.resolved_steps_per_week()?,
            weight: gridflow_core::baselines::BlendWeight::new(cfg.blend_weight)?,
        })),
        other => Err(Error::Config(format!(
            "unknown model `{other}` (expected persistence, adaptive, recurrent, \
             recurrent-raw, seasonal-daily, or seasonal-blend)"
        ))),
    }
}

fn cmd_evaluate(cfg: RunConfig, args: EvaluateArgs) -> Result<()> {
    // Validate every model name before touching any input.
    let models: Vec<Box<dyn ForecastModel>> = args
        .models
        .iter()
        .map(|name| build_model(name, &cfg))
        .collect::<Result<_>>()?;
    let grid = cfg.grid()?;
    let windows = read_input(&args.input, &grid)?;
    let horizon = args.horizon.unwrap_or(cfg.horizon);
    let split = args.split.unwrap_or(cfg.split);
    let collect = args.predictions.is_some() || args.plot.is_some();

    let mut reports = Vec::new();
    let mut prediction_csv = String::from("line_id,origin,horizon,prediction,target\n");
    let mut plot_rows = Vec::new();
    let mut plotted_actual = false;
    for model in &models {
        let (report, rows) = evaluate_detailed(model.as_ref(), &windows, horizon, split, collect)?;
        eprintln!(
            "{}: rmse {:.6} over {} points ({} skipped), {:.3}s",
            report.name,
            report.aggregate_rmse,
            report.n_predictions,
            report.n_skipped,
            report.elapsed_s
        );
        for row in &rows {
            prediction_csv.push_str(&format!(
                "{},{},{},{},{}\n",
                row.line_id,
                row.origin,
                row.horizon,
                row.prediction,
                row.target.map(|t| t.to_string()).unwrap_or_default()
            ));
            if args.plot.is_some() {
                if !plotted_actual {
                    if let Some(target) = row.target {
                        plot_rows.push(harness::LongRow {
                            time_index: row.origin + row.horizon,
                            series: "actual".into(),
                            value: target,
                        });
                    }
                }
                plot_rows.push(harness::LongRow {
                    time_index: row.origin + row.horizon,
                    series: report.name.clone(),
                    value: row.prediction,
                });
            }
        }
        plotted_actual = args.plot.is_some();
        reports.push(report);
    }

    write_file(&args.out, &harness::report_csv(&reports, args.per_line))?;
    if let Some(path) = &args.predictions {
        write_file(path, &prediction_csv)?;
    }
    if let Some(path) = &args.plot {
        write_file(path, &harness::long_csv(&plot_rows))?;
    }
    Ok(())
}

fn cmd_stress(cfg: RunConfig, args: StressArgs) -> Result<()> {
    let scenario = StressScenario {
        kind: ScenarioKind::parse(&args.kind)?,
        intensity: args.intensity,
        seed: args.scenario_seed,
        steps_per_day: cfg.resolved_steps_per_day()?,
    };
    scenario.validate()?;
    let grid = cfg.grid()?;
    let windows = read_input(&args.input, &grid)?;
    let mutated = apply_scenario(&windows, &scenario);
    let horizon = args.horizon.unwrap_or(cfg.horizon);
    let split = args.split.unwrap_or(cfg.split);
    let model = AdaptiveModel {
        params: cfg.smoothing_params()?,
    };
    let (report, _) = evaluate_detailed(&model, &mutated, horizon, split, false)?;
    eprintln!(
        "{} at intensity {}: rmse {:.6} over {} points ({} skipped), {:.3}s",
        scenario.kind.name(),
        scenario.intensity,
        report.aggregate_rmse,
        report.n_predictions,
        report.n_skipped,
        report.elapsed_s
    );
    write_file(&args.out, &harness::report_csv(&[report], false))?;
    Ok(())
}

fn cmd_sweep(cfg: RunConfig, args: SweepArgs) -> Result<()> {
    let mut axes = Vec::new();
    for spec in &args.axes {
        let (key, values) = spec
            .split_once('=')
            .ok_or_else(|| Error::Config(format!("--axis expects key=v1,v2,..., got `{spec}`")))?;
        let values: Vec<f64> = values
            .split(',')
            .map(|v| {
                v.trim()
                    .parse()
                    .map_err(|_| Error::Config(format!("bad axis value `{v}` in `{spec}`")))
            })
            .collect::<Result<_>>()?;
        axes.push(SweepAxis {
            key: key.trim().to_string(),
            values,
        });
    }
    let grid = cfg.grid()?;
    let windows = read_input(&args.input, &grid)?;
    let horizon = args.horizon.unwrap_or(cfg.horizon);
    let split = args.split.unwrap_or(cfg.split);
    let rows = harness::sweep(&cfg.smoothing_params()?, &axes, &windows, horizon, split)?;
    for row in &rows {
        let assignment: Vec<String> = row
            .assignment
            .iter()
            .map(|(k, v)| format!("{k}={v}"))
            .collect();
        eprintln!(
            "{}: rmse {:.6}, {:.3}s",
            assignment.join(" "),
            row.report.aggregate_rmse,
            row.report.elapsed_s
        );
    }
    write_file(&args.out, &harness::sweep_csv(&rows))?;
    Ok(())
}
