//! Acceptance suite: one test per shipping criterion, each printing a
//! PASS line (run with `--nocapture` to see them). Criterion 11 (CLI byte
//! determinism) lives in the CLI crate's own acceptance tests, since it
//! needs the binary.

use std::time::Instant;

use gridflow_core::adaptive::{
    saturate, saturation_limit_from_training, AdaptiveState, SmoothingParams,
};
use gridflow_core::harness::{
    apply_scenario, evaluate, rank_score, EvalReport, ForecastModel, LinePredictor,
    PersistenceModel, RecurrentModel, ScenarioKind, StressScenario,
};
use gridflow_core::quality::{compute_global_rms, StreamGate, ValidityStats};
use gridflow_core::recurrent::{IncrementFilter, RecurrentConfig};
use gridflow_core::series::{SampleValue, SeriesWindow};
use gridflow_core::synth::{generate, generate_lines, GeneratorConfig};

/// Test-local SplitMix64 for the randomized saturation triples.
struct SplitMix64 {
    state: u64,
}

impl SplitMix64 {
    fn new(seed: u64) -> Self {
        Self { state: seed }
    }
    fn next_u64(&mut self) -> u64 {
        self.state = self.state.wrapping_add(0x9E37_79B9_7F4A_7C15);
        let mut z = self.state;
        z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
        z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
        z ^ (z >> 31)
    }
    fn next_f64(&mut self) -> f64 {
        (self.next_u64() >> 11) as f64 * (1.0 / (1u64 << 53) as f64)
    }
    fn next_bool(&mut self, p: f64) -> bool {
        self.next_f64() < p
    }
}

const PINNED_SEEDS: [u64; 10] = [1, 2, 3, 4, 5, 6, 7, 8, 9, 10];

/// The 8-day, 15-minute demonstration fixture at a given seed.
fn figure_fixture(seed: u64) -> SeriesWindow {
    generate(&GeneratorConfig {
        seed,
        ..GeneratorConfig::default()
    })
    .expect("valid config")
}

fn fixture_params() -> SmoothingParams {
    SmoothingParams {
        steps_per_day: 96,
        steps_per_week: 672,
        ..SmoothingParams::default()
    }
}

fn outperformance(horizon: usize, label: &str) {
    let started = Instant::now();
    let mut wins = 0;
    for seed in PINNED_SEEDS {
        let lines = [figure_fixture(seed)];
        // Train on the first seven days, score over the last day.
        let split = 7.0 / 8.0;
        let recurrent = RecurrentModel {
            config: RecurrentConfig::new(7, 96, horizon).unwrap(),
            filter: IncrementFilter::Filtered,
        };
        let rec = evaluate(&recurrent, &lines, horizon, split).unwrap();
        let per = evaluate(&PersistenceModel, &lines, horizon, split).unwrap();
        if rec.aggregate_rmse < per.aggregate_rmse {
            wins += 1;
        }
    }
    let elapsed = started.elapsed().as_secs_f64();
    assert!(
        wins >= 9,
        "recurrent beat persistence on only {wins}/10 seeds"
    );
    assert!(elapsed < 5.0, "took {elapsed:.2}s");
    println!("ACCEPTANCE {label}: PASS ({wins}/10 seeds, {elapsed:.2}s)");
}

#[test]
fn criterion_01_recurrent_beats_persistence_at_one_hour() {
    outperformance(4, "01 one-hour outperformance");
}

#[test]
fn criterion_02_recurrent_beats_persistence_at_three_hours() {
    outperformance(12, "02 three-hour outperformance");
}

/// Full offline mirror of the streaming recursions on plain unbounded
/// arrays, plus closed-form exponentially weighted least-squares solutions
/// for the blend and reversion coefficients.
#[test]
fn criterion_03_blend_and_reversion_recursions_solve_weighted_least_squares() {
    let started = Instant::now();
    let day = 24usize;
    let week = 168usize;
    let lag = 11usize;
    let params = SmoothingParams {
        steps_per_day: day,
        steps_per_week: week,
        horizon: 12,
        monitor_lag: lag,
        saturation_limit: 1e9,
        ..SmoothingParams::default()
    };
    let cfg = GeneratorConfig {
        seed: 17,
        days: 21, // 3 weeks
        step_s: 3600,
        noise_scale: 1.0,
        spike_prob: 0.0,
        outage_prob: 0.0,
        missing_prob: 0.0,
        ..GeneratorConfig::default()
    };
    let window = generate(&cfg).unwrap();
    let y: Vec<f64> = window
        .samples
        .iter()
        .map(|s| s.value().expect("all present"))
        .collect();
    let n = y.len();
    assert_eq!(n, 3 * week);

    // Large RMS so every point and increment passes the gates.
    let stats = ValidityStats::new(100.0);
    let mut state = AdaptiveState::new(params.clone(), &stats).unwrap();
    let mut gate = StreamGate::new(stats);

    // Offline mirror on plain arrays.
    let d_at = |d: &[f64], t: i64| if t < 0 { 0.0 } else { d[t as usize] };
    let mut d_hist: Vec<f64> = Vec::with_capacity(n);
    let mut w_hist: Vec<f64> = Vec::with_capacity(n);
    let mut sum_d = vec![0.0f64; n];
    let mut sum_w = vec![0.0f64; n];
    let (mut gc, mut gv) = (0.0f64, 0.0f64);
    let (mut oc, mut ov) = (0.0f64, 0.0f64);
    let mut m = 0.0f64;
    let mut blend_samples: Vec<(f64, f64)> = Vec::new(); // (target, x)
    let mut reversion_samples: Vec<(f64, f64)> = Vec::new(); // (resid, dev)

    let mut max_g_dev = 0.0f64;
    let mut max_o_dev = 0.0f64;
    let mut compared = 0usize;

    for t in 0..n {
        let sample = SampleValue::Present(y[t]);
        let verdict = gate.assess(&sample);
        state.update(&sample, verdict);

        // Mirror: daily/weekly recursions at seasonal lags.
        let d_new = if t >= 1 {
            params.rate_daily * (y[t] - y[t - 1])
                + (1.0 - params.rate_daily) * d_at(&d_hist, t as i64 - day as i64)
        } else {
            d_at(&d_hist, t as i64 - day as i64)
        };
        d_hist.push(d_new);
        let w_new = if t >= 1 {
            params.rate_weekly * (y[t] - y[t - 1])
                + (1.0 - params.rate_weekly) * d_at(&w_hist, t as i64 - week as i64)
        } else {
            d_at(&w_hist, t as i64 - week as i64)
        };
        w_hist.push(w_new);
        // Seasonal sums of the lag-step prediction published at t, summed in
        // ascending time order like the engine.
        for j in 1..=lag {
            sum_d[t] += d_at(&d_hist, t as i64 - day as i64 + j as i64);
            sum_w[t] += d_at(&w_hist, t as i64 - week as i64 + j as i64);
        }

        if t >= lag {
            let due_d = sum_d[t - lag];
            let due_w = sum_w[t - lag];
            let target = y[t] - y[t - lag] - due_d;
            let x = due_w - due_d;
            gc = params.rate_blend * (target * x) + (1.0 - params.rate_blend) * gc;
            gv = params.rate_blend * (x * x) + (1.0 - params.rate_blend) * gv;
            blend_samples.push((target, x));

            let g_eff = if (t as u64 + 1) < week as u64 {
                0.0
            } else if gv > 1e-12 {
                (gc / gv).clamp(0.0, 1.0)
            } else {
                0.0
            };
            m = params.rate_mean * y[t] + (1.0 - params.rate_mean) * m;
            let resid = y[t] - y[t - lag] - (1.0 - g_eff) * due_d - g_eff * due_w;
            let dev = m - y[t];
            oc = params.rate_reversion * (resid * dev) / lag as f64
                + (1.0 - params.rate_reversion) * oc;
            ov = params.rate_reversion * (dev * dev) + (1.0 - params.rate_reversion) * ov;
            reversion_samples.push((resid, dev));
        } else {
            m = params.rate_mean * y[t] + (1.0 - params.rate_mean) * m;
        }

        // The engine's ring bookkeeping must agree with the unbounded mirror
        // bit for bit.
        let (eng_gc, eng_gv) = state.blend_components();
        assert_eq!(
            eng_gc.to_bits(),
            gc.to_bits(),
            "blend numerator diverged at t = {t}"
        );
        assert_eq!(
            eng_gv.to_bits(),
            gv.to_bits(),
            "blend denominator diverged at t = {t}"
        );
        let (eng_oc, eng_ov) = state.reversion_components();
        assert_eq!(
            eng_oc.to_bits(),
            oc.to_bits(),
            "reversion numerator diverged at t = {t}"
        );
        assert_eq!(
            eng_ov.to_bits(),
            ov.to_bits(),
            "reversion denominator diverged at t = {t}"
        );

        // Closed-form weighted least squares over the recorded samples:
        // decay (1 - rate) per later valid update, solved by direct sums.
        if t >= week {
            let decay_g = 1.0 - params.rate_blend;
            let (mut num, mut den) = (0.0f64, 0.0f64);
            let count = blend_samples.len();
            for (k, (target, x)) in blend_samples.iter().enumerate() {
                let w = decay_g.powi((count - 1 - k) as i32);
                num += w * target * x;
                den += w * x * x;
            }
            let oracle_g = num / den;
            let engine_g = state.blend_ratio().expect("denominator is live");
            max_g_dev = max_g_dev.max((oracle_g - engine_g).abs());

            let decay_o = 1.0 - params.rate_reversion;
            let (mut num, mut den) = (0.0f64, 0.0f64);
            let count = reversion_samples.len();
            for (k, (resid, dev)) in reversion_samples.iter().enumerate() {
                let w = decay_o.powi((count - 1 - k) as i32);
                num += w * resid * dev / lag as f64;
                den += w * dev * dev;
            }
            let oracle_o = num / den;
            let engine_o = state.reversion_ratio().expect("denominator is live");
            max_o_dev = max_o_dev.max((oracle_o - engine_o).abs());
            compared += 1;
        }
    }

    let elapsed = started.elapsed().as_secs_f64();
    assert!(compared > 300, "compared only {compared} steps");
    assert!(max_g_dev <= 1e-9, "blend deviation {max_g_dev:e}");
    assert!(max_o_dev <= 1e-9, "reversion deviation {max_o_dev:e}");
    assert!(elapsed < 10.0, "took {elapsed:.2}s");
    println!(
        "ACCEPTANCE 03 recursion oracles: PASS (max blend dev {max_g_dev:.2e}, \
         max reversion dev {max_o_dev:.2e}, {compared} steps, {elapsed:.2}s)"
    );
}

#[test]
fn criterion_04_closed_gates_hold_every_accumulator_bit_for_bit() {
    let day = 4usize;
    let params = SmoothingParams {
        steps_per_day: day,
        steps_per_week: 28,
        horizon: 3,
        monitor_lag: 2,
        saturation_limit: 1e9,
        ..SmoothingParams::default()
    };
    let stats = ValidityStats::new(1.0); // increment limit 2, outlier limit 10

    let warm_up = |state: &mut AdaptiveState, gate: &mut StreamGate| {
        for k in 0..60u64 {
            let v = SampleValue::Present(((k % 5) as f64) * 0.4 - 0.8);
            let verdict = gate.assess(&v);
            state.update(&v, verdict);
        }
    };

    #[derive(Clone, Copy, PartialEq)]
    struct Scalars {
        gc: f64,
        gv: f64,
        em: f64,
        ep: f64,
        oc: f64,
        ov: f64,
        m: f64,
    }
    let capture = |s: &AdaptiveState| {
        let (gc, gv) = s.blend_components();
        let (oc, ov) = s.reversion_components();
        Scalars {
            gc,
            gv,
            em: s.model_error(),
            ep: s.persistence_error(),
            oc,
            ov,
            m: s.running_mean(),
        }
    };
    let bits = |a: f64, b: f64, what: &str| {
        assert_eq!(
            a.to_bits(),
            b.to_bits(),
            "{what} changed under a closed gate"
        );
    };

    // Case: missing sample closes every gate.
    let mut state = AdaptiveState::new(params.clone(), &stats).unwrap();
    let mut gate = StreamGate::new(stats);
    warm_up(&mut state, &mut gate);
    let before = capture(&state);
    let d_seasonal = state.daily_lag(day - 1);
    let w_seasonal = state.weekly_lag(params.steps_per_week - 1);
    let v = SampleValue::Missing;
    let verdict = gate.assess(&v);
    state.update(&v, verdict);
    let after = capture(&state);
    bits(
        state.daily_lag(0),
        d_seasonal,
        "daily value (copied from its seasonal lag)",
    );
    bits(
        state.weekly_lag(0),
        w_seasonal,
        "weekly value (copied from its seasonal lag)",
    );
    bits(after.gc, before.gc, "blend numerator");
    bits(after.gv, before.gv, "blend denominator");
    bits(after.em, before.em, "model error");
    bits(after.ep, before.ep, "persistence error");
    bits(after.oc, before.oc, "reversion numerator");
    bits(after.ov, before.ov, "reversion denominator");
    bits(after.m, before.m, "running mean");

    // Case: valid point, but the jump closes both increment gates.
    // The running mean must still move; everything else holds.
    let mut state = AdaptiveState::new(params.clone(), &stats).unwrap();
    let mut gate = StreamGate::new(stats);
    warm_up(&mut state, &mut gate);
    let before = capture(&state);
    let d_seasonal = state.daily_lag(day - 1);
    let v = SampleValue::Present(9.0); // jump of ~9 against limit 2, not an outlier
    let verdict = gate.assess(&v);
    state.update(&v, verdict);
    let after = capture(&state);
    bits(state.daily_lag(0), d_seasonal, "daily value");
    bits(after.gc, before.gc, "blend numerator");
    bits(after.gv, before.gv, "blend denominator");
    bits(after.em, before.em, "model error");
    bits(after.ep, before.ep, "persistence error");
    bits(after.oc, before.oc, "reversion numerator");
    bits(after.ov, before.ov, "reversion denominator");
    assert_ne!(
        after.m.to_bits(),
        before.m.to_bits(),
        "point gate is open: mean must move"
    );

    // Case: one-step gate open, monitor gate closed (the sample two steps
    // back was missing). Daily/weekly update; blend/error/reversion hold.
    let mut state = AdaptiveState::new(params.clone(), &stats).unwrap();
    let mut gate = StreamGate::new(stats);
    warm_up(&mut state, &mut gate);
    for v in [SampleValue::Missing, SampleValue::Present(0.1)] {
        let verdict = gate.assess(&v);
        state.update(&v, verdict);
    }
    let before = capture(&state);
    let d_seasonal = state.daily_lag(day - 1);
    let v = SampleValue::Present(0.2);
    let verdict = gate.assess(&v);
    state.update(&v, verdict);
    let after = capture(&state);
    assert_ne!(
        state.daily_lag(0).to_bits(),
        d_seasonal.to_bits(),
        "one-step gate is open"
    );
    bits(after.gc, before.gc, "blend numerator");
    bits(after.gv, before.gv, "blend denominator");
    bits(after.em, before.em, "model error");
    bits(after.ep, before.ep, "persistence error");
    bits(after.oc, before.oc, "reversion numerator");
    bits(after.ov, before.ov, "reversion denominator");

    // Case: monitor gate open, one-step gate closed (jump against the
    // previous step only). Blend/error/reversion update; daily/weekly hold.
    let mut state = AdaptiveState::new(params, &stats).unwrap();
    let mut gate = StreamGate::new(stats);
    warm_up(&mut state, &mut gate);
    for v in [SampleValue::Present(1.9), SampleValue::Present(-0.5)] {
        let verdict = gate.assess(&v);
        state.update(&v, verdict);
    }
    let before = capture(&state);
    let d_seasonal = state.daily_lag(day - 1);
    // Against the previous value -0.5 the jump is 2.4 > 2; against the value
    // two steps back (1.9) it is 0, within the limit.
    let v = SampleValue::Present(1.9);
    let verdict = gate.assess(&v);
    state.update(&v, verdict);
    let after = capture(&state);
    bits(state.daily_lag(0), d_seasonal, "daily value");
    assert_ne!(
        after.gv.to_bits(),
        before.gv.to_bits(),
        "monitor gate is open: blend must move"
    );
    assert_ne!(
        after.em.to_bits(),
        before.em.to_bits(),
        "monitor gate is open: errors must move"
    );

    println!(
        "ACCEPTANCE 04 hold-on-invalid: PASS (all accumulators bit-stable under closed gates)"
    );
}

#[test]
fn criterion_05_persistence_gate_replaces_the_prediction_exactly() {
    let mut activations = 0usize;
    let mut checks = 0usize;
    for seed in PINNED_SEEDS {
        // The plain fixture plus a shuffled variant: destroying the daily
        // recurrence drives the model error above the persistence error, so
        // the gate is genuinely exercised rather than vacuously quiet.
        let plain = figure_fixture(seed);
        let shuffled = apply_scenario(
            std::slice::from_ref(&plain),
            &StressScenario {
                kind: ScenarioKind::ShuffleSegments,
                intensity: 1.0,
                seed,
                steps_per_day: 96,
            },
        )
        .remove(0);
        for line in [plain, shuffled] {
            let stats = compute_global_rms(std::slice::from_ref(&line)).unwrap();
            let mut params = fixture_params();
            params.saturation_limit =
                saturation_limit_from_training(&line, line.len(), params.horizon, &stats);
            let mut state = AdaptiveState::new(params, &stats).unwrap();
            let mut gate = StreamGate::new(stats);
            for sample in &line.samples {
                let verdict = gate.assess(sample);
                state.update(sample, verdict);
                let trace = state.forecast_trace(12);
                checks += 1;
                if state.model_error() > state.persistence_error() && state.steps_seen() >= 96 {
                    activations += 1;
                    assert!(trace.gate_active);
                    assert_eq!(
                        trace.gated.to_bits(),
                        trace.origin.to_bits(),
                        "gate must hand back the terminal value exactly"
                    );
                }
            }
        }
    }
    assert!(
        activations > 0,
        "fixtures never activated the gate; the check would be vacuous"
    );
    println!(
        "ACCEPTANCE 05 persistence gate: PASS ({activations} activations over {checks} forecasts, 0 violations)"
    );
}

#[test]
fn criterion_06_saturation_is_strictly_bounded_monotone_and_exact_at_the_limit() {
    // 10^6 randomized (corrected, origin, limit) triples through the same
    // path forecasts use.
    let mut rng = SplitMix64::new(0xACCE97);
    for _ in 0..1_000_000 {
        let limit = 10f64.powf(rng.next_f64() * 12.0 - 6.0);
        let origin = (rng.next_f64() - 0.5) * 2e6;
        let magnitude = 10f64.powf(rng.next_f64() * 24.0 - 12.0);
        let corrected = origin
            + if rng.next_bool(0.5) {
                magnitude
            } else {
                -magnitude
            };
        let forecast = gridflow_core::adaptive::apply_saturation(origin, corrected, limit);
        let change = (forecast - origin).abs();
        assert!(
            change < limit,
            "|{forecast} - {origin}| = {change} >= {limit}"
        );
        // The damping map itself never amplifies a change.
        let delta = corrected - origin;
        assert!(saturate(delta, limit).abs() <= delta.abs());
    }

    // Strict monotonicity on sorted sweeps.
    for limit in [0.001, 1.0, 7.3, 1e6] {
        let mut prev = f64::NEG_INFINITY;
        for k in 0..=200_000 {
            let delta = (k as f64 - 100_000.0) / 100_000.0 * 1e4 * limit;
            let out = saturate(delta, limit);
            assert!(
                out > prev,
                "not strictly increasing at delta = {delta}, limit = {limit}"
            );
            prev = out;
        }
    }

    // Oddness and the exact half-limit image of the limit itself.
    for limit in [1e-300, 0.25, 1.0, 3.7, 1e12, 1e300] {
        assert_eq!(saturate(limit, limit), limit / 2.0);
        for delta in [0.1 * limit, 0.9 * limit, 5.0 * limit] {
            assert_eq!(
                saturate(-delta, limit).to_bits(),
                (-saturate(delta, limit)).to_bits()
            );
        }
    }

    // Relative distortion stays within 1% for |delta| <= limit / 99 (the
    // exact boundary: q / (1 + q) = 1% at q = 1/99). The endpoint itself
    // sits on the bound, so allow one part in 10^12 of rounding headroom.
    for k in 1..=1000 {
        let limit = 50.0;
        let delta = limit / 99.0 * (k as f64 / 1000.0);
        let rel = (delta - saturate(delta, limit)) / delta;
        assert!(
            rel <= 0.01 * (1.0 + 1e-12),
            "distortion {rel} at delta = {delta}"
        );
    }

    println!(
        "ACCEPTANCE 06 saturation bounds: PASS (10^6 triples bounded, sweeps strictly monotone)"
    );
}

#[test]
fn criterion_07_stress_scenarios_never_break_the_forecaster() {
    let kinds = [
        ScenarioKind::InjectOutliers,
        ScenarioKind::DropPoints,
        ScenarioKind::ShuffleSegments,
        ScenarioKind::ResizeGrid,
    ];
    let mut forecasts = 0usize;
    for seed in PINNED_SEEDS {
        let base = GeneratorConfig {
            seed,
            ..GeneratorConfig::default()
        };
        let lines = generate_lines(&base, 20).unwrap();
        for kind in kinds {
            let scenario = StressScenario {
                kind,
                intensity: 0.05,
                seed: seed ^ 0x5A,
                steps_per_day: 96,
            };
            let mutated = apply_scenario(&lines, &scenario);
            let stats = compute_global_rms(&mutated).unwrap();
            for line in &mutated {
                let mut params = fixture_params();
                params.saturation_limit =
                    saturation_limit_from_training(line, line.len(), params.horizon, &stats);
                let mut state = AdaptiveState::new(params, &stats).unwrap();
                let mut gate = StreamGate::new(stats);
                for (k, sample) in line.samples.iter().enumerate() {
                    let verdict = gate.assess(sample);
                    state.update(sample, verdict);
                    if k % 7 == 0 {
                        let f = state.forecast(12);
                        assert!(f.is_finite(), "{kind:?} seed {seed} produced {f}");
                        forecasts += 1;
                    }
                }
                assert!(!state.faulted(), "{kind:?} seed {seed} left a fault set");
                assert_eq!(
                    state.recoveries(),
                    0,
                    "{kind:?} seed {seed}: validity gates should prevent faults entirely"
                );
            }
        }
    }
    println!("ACCEPTANCE 07 robustness fuzz: PASS ({forecasts} forecasts, all finite, 0 faults)");
}

#[test]
fn criterion_08_noise_free_double_seasonality_is_learned_to_high_precision() {
    let day = 24usize;
    let week = 168usize;
    let cfg = GeneratorConfig {
        seed: 5,
        days: 7 * 120, // 120 weeks
        step_s: 3600,
        daily_amp: 10.0,
        weekly_amp: 4.0,
        noise_scale: 0.0,
        spike_prob: 0.0,
        outage_prob: 0.0,
        missing_prob: 0.0,
        ..GeneratorConfig::default()
    };
    let window = generate(&cfg).unwrap();
    let y: Vec<f64> = window.samples.iter().map(|s| s.value().unwrap()).collect();
    let amplitude = cfg.daily_amp + cfg.weekly_amp;

    let params = SmoothingParams {
        steps_per_day: day,
        steps_per_week: week,
        horizon: 12,
        monitor_lag: 11,
        saturation_limit: 1e12,
        ..SmoothingParams::default()
    };
    let stats = ValidityStats::new(amplitude);
    let mut state = AdaptiveState::new(params, &stats).unwrap();
    let mut gate = StreamGate::new(stats);

    let horizon = 12usize;
    let mut max_err = 0.0f64;
    let mut checked = 0usize;
    for t in 0..y.len() {
        let sample = SampleValue::Present(y[t]);
        let verdict = gate.assess(&sample);
        state.update(&sample, verdict);
        // Score the last two days of origins.
        if t + horizon < y.len() && t >= y.len() - 2 * day - horizon {
            let err = (state.forecast(horizon) - y[t + horizon]).abs();
            max_err = max_err.max(err);
            checked += 1;
        }
    }
    assert!(checked >= 2 * day - horizon, "checked {checked}");
    let tol = 1e-6 * amplitude;
    assert!(max_err <= tol, "max error {max_err:e} exceeds {tol:e}");
    println!(
        "ACCEPTANCE 08 exact periodicity: PASS (max error {max_err:.2e} <= {tol:.1e} over {checked} forecasts)"
    );
}

/// Wraps a model and records, for every prediction, the highest sample index
/// the predictor had been fed by that moment.
struct ProbeModel<M: ForecastModel> {
    inner: M,
    log: std::sync::Arc<std::sync::Mutex<Vec<(usize, usize)>>>, // (max observed index, predict #)
}

impl<M: ForecastModel> ForecastModel for ProbeModel<M> {
    fn name(&self) -> String {
        format!("probe-{}", self.inner.name())
    }

    fn spawn(&self, setup: &gridflow_core::harness::EvalSetup) -> Box<dyn LinePredictor> {
        struct P {
            inner: Box<dyn LinePredictor>,
            max_observed: Option<usize>,
            predicts: usize,
            log: std::sync::Arc<std::sync::Mutex<Vec<(usize, usize)>>>,
        }
        impl LinePredictor for P {
            fn observe(&mut self, sample: &gridflow_core::series::Sample) {
                self.max_observed = Some(
                    self.max_observed
                        .map_or(sample.index, |m| m.max(sample.index)),
                );
                self.inner.observe(sample);
            }
            fn predict(&mut self, horizon: usize) -> Option<f64> {
                self.log.lock().unwrap().push((
                    self.max_observed.expect("predict before observe"),
                    self.predicts,
                ));
                self.predicts += 1;
                self.inner.predict(horizon)
            }
        }
        Box::new(P {
            inner: self.inner.spawn(setup),
            max_observed: None,
            predicts: 0,
            log: self.log.clone(),
        })
    }
}

#[test]
fn criterion_09_evaluation_never_leaks_future_samples_into_a_forecast() {
    let line = figure_fixture(3);
    let len = line.len();
    let horizon = 4usize;
    let split = 7.0 / 8.0;
    let train_len = gridflow_core::harness::split_train_len(len, split);

    let check = |log: &std::sync::Arc<std::sync::Mutex<Vec<(usize, usize)>>>| -> usize {
        let log = log.lock().unwrap();
        assert!(!log.is_empty());
        for (k, (max_observed, predict_no)) in log.iter().enumerate() {
            let expected_origin = train_len - 1 + k;
            assert_eq!(*predict_no, k);
            assert_eq!(
                *max_observed, expected_origin,
                "prediction {k} saw an index beyond its origin"
            );
        }
        assert_eq!(log.len(), len - horizon - (train_len - 1));
        log.len()
    };

    let probe = ProbeModel {
        inner: RecurrentModel {
            config: RecurrentConfig::new(7, 96, horizon).unwrap(),
            filter: IncrementFilter::Filtered,
        },
        log: std::sync::Arc::new(std::sync::Mutex::new(Vec::new())),
    };
    evaluate(&probe, std::slice::from_ref(&line), horizon, split).unwrap();
    let recurrent_preds = check(&probe.log);

    let probe = ProbeModel {
        inner: gridflow_core::harness::AdaptiveModel {
            params: SmoothingParams {
                saturation_limit: 1e9,
                ..fixture_params()
            },
        },
        log: std::sync::Arc::new(std::sync::Mutex::new(Vec::new())),
    };
    evaluate(&probe, &[line], horizon, split).unwrap();
    let adaptive_preds = check(&probe.log);

    println!(
        "ACCEPTANCE 09 causality: PASS ({recurrent_preds} recurrent and {adaptive_preds} adaptive predictions, none saw past its origin)"
    );
}

#[test]
fn criterion_10_desk_scale_throughput_and_constant_memory() {
    // One year at 5 minutes, 100 lines; generation is setup, not timed.
    let cfg = GeneratorConfig {
        seed: 42,
        days: 365,
        step_s: 300,
        ..GeneratorConfig::default()
    };
    let lines = generate_lines(&cfg, 100).unwrap();
    assert_eq!(lines[0].len(), 105_120);

    let started = Instant::now();
    let report = evaluate(
        &gridflow_core::harness::AdaptiveModel {
            params: SmoothingParams::default(),
        },
        &lines,
        12,
        0.5,
    )
    .unwrap();
    let elapsed = started.elapsed().as_secs_f64();
    assert!(report.aggregate_rmse.is_finite());
    assert!(elapsed < 60.0, "train + forecast took {elapsed:.1}s");

    // State size is a fixed function of the configured lags: the snapshot
    // after warmup is byte-for-byte the same size as after 10 weeks more.
    let toy = SmoothingParams {
        steps_per_day: 24,
        steps_per_week: 168,
        saturation_limit: 100.0,
        ..SmoothingParams::default()
    };
    let stats = ValidityStats::new(10.0);
    let mut state = AdaptiveState::new(toy.clone(), &stats).unwrap();
    let mut gate = StreamGate::new(stats);
    let mut size_after_warmup = None;
    for k in 0..(10 * toy.steps_per_week) {
        let v = SampleValue::Present((k as f64 * 0.05).sin() * 3.0);
        let verdict = gate.assess(&v);
        state.update(&v, verdict);
        if k + 1 == toy.steps_per_week {
            size_after_warmup = Some(state.to_snapshot().len());
        }
    }
    assert_eq!(Some(state.to_snapshot().len()), size_after_warmup);

    println!(
        "ACCEPTANCE 10 throughput: PASS ({} predictions over 100 lines x 105120 points in {elapsed:.1}s, constant state size)",
        report.n_predictions
    );
}

#[test]
fn criterion_12_rmse_and_rank_scoring_match_hand_computations() {
    // Twenty hand-written points, persistence at horizon 1, manual RMSE.
    let values: Vec<f64> = vec![
        2.0, 3.5, 3.0, 4.0, 6.0, 5.5, 5.0, 7.0, 8.0, 7.5, 6.0, 6.5, 9.0, 10.0, 9.5, 8.0, 11.0,
        12.0, 11.5, 13.0,
    ];
    let line = SeriesWindow::from_values("L0", 0, &values);
    let report = evaluate(&PersistenceModel, &[line], 1, 0.5).unwrap();
    let mut sum_sq = 0.0;
    for t in 9..=18 {
        let e = values[t + 1] - values[t];
        sum_sq += e * e;
    }
    let manual = (sum_sq / 10.0).sqrt();
    assert_eq!(
        report.aggregate_rmse, manual,
        "harness RMSE must match the manual computation"
    );

    // The published 2:1 weighting example.
    let mk = |name: &str, rmse: f64, elapsed: f64| EvalReport {
        name: name.into(),
        per_line_rmse: Default::default(),
        aggregate_rmse: rmse,
        elapsed_s: elapsed,
        n_predictions: 1,
        n_skipped: 0,
    };
    let ranked = rank_score(&[mk("A", 1.0, 2.0), mk("B", 2.0, 1.0)]);
    assert_eq!(ranked[0].name, "A");
    assert_eq!(ranked[0].score, 4);
    assert_eq!(ranked[1].score, 5);

    println!("ACCEPTANCE 12 scoring oracles: PASS (RMSE exact, 2:1 weighting reproduced)");
}

/// Justification run for the shipped smoothing-rate default: the coarse
/// sweep over the pinned month-scale fixture set must pick the stored value.
/// (Shorter streams reward faster rates because convergence dominates; very
/// long stationary streams slightly favor slower ones. The month scale is
/// where a line must already forecast well, and 0.15 wins there outright.)
#[test]
fn sweep_identifies_the_shipped_default_rate() {
    let mut lines = Vec::new();
    for seed in PINNED_SEEDS {
        let cfg = GeneratorConfig {
            seed,
            days: 30,
            line_id: format!("L{seed:04}"),
            ..GeneratorConfig::default()
        };
        lines.push(generate(&cfg).unwrap());
    }
    let base = fixture_params();
    let axes = [gridflow_core::harness::SweepAxis {
        key: "rate_daily".into(),
        values: vec![0.05, 0.15, 0.3],
    }];
    let rows = gridflow_core::harness::sweep(&base, &axes, &lines, 12, 0.8).unwrap();
    let best = rows
        .iter()
        .min_by(|a, b| a.report.aggregate_rmse.total_cmp(&b.report.aggregate_rmse))
        .unwrap();
    assert_eq!(
        best.assignment[0].1,
        SmoothingParams::default().rate_daily,
        "sweep winner disagrees with the shipped default; rmse by rate: {:?}",
        rows.iter()
            .map(|r| (r.assignment[0].1, r.report.aggregate_rmse))
            .collect::<Vec<_>>()
    );
    println!(
        "ACCEPTANCE sweep-default: PASS (rate_daily = {})",
        best.assignment[0].1
    );
}
