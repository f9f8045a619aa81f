//! Reference predictors: persistence, daily-seasonal, and a fixed-weight
//! daily/weekly blend.
//!
//! These are deliberately strict about history — they error instead of
//! falling back, so the harness can use them as clean benchmarks. Fallback
//! behaviour belongs to the streaming forecaster. Trend extrapolation is
//! intentionally absent: the flow is non-differentiable, so the short-term
//! slope carries no usable signal.

use crate::series::SeriesWindow;
use crate::{Error, Result};

/// Convex weight between the daily and weekly seasonal components.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BlendWeight(f64);

impl BlendWeight {
    pub fn new(g: f64) -> Result<Self> {
        if !(0.0..=1.0).contains(&g) {
            return Err(Error::Config(format!(
                "blend weight must lie in [0, 1], got {g}"
            )));
        }
        Ok(Self(g))
    }

    pub fn value(&self) -> f64 {
        self.0
    }
}

/// The naive forecast: the future equals the current value.
pub fn persistence_forecast(window: &SeriesWindow, t: usize, _horizon: usize) -> Result<f64> {
    window.value_at(t).ok_or(Error::NoTerminalValue)
}

fn required(window: &SeriesWindow, pos: Option<usize>, what: &str) -> Result<f64> {
    pos.and_then(|p| window.value_at(p))
        .ok_or_else(|| Error::InsufficientHistory(what.to_string()))
}

/// Applies the change observed one day earlier to the current value:
/// current + (value one day ago at the target clock time − value one day ago now).
pub fn seasonal_daily_forecast(
    window: &SeriesWindow,
    t: usize,
    horizon: usize,
    steps_per_day: usize,
) -> Result<f64> {
    let y_t = window.value_at(t).ok_or(Error::NoTerminalValue)?;
    let ahead = required(
        window,
        (t + horizon).checked_sub(steps_per_day),
        "day-ago target",
    )?;
    let base = required(window, t.checked_sub(steps_per_day), "day-ago origin")?;
    Ok(y_t + ahead - base)
}

/// Convex combination of the daily and weekly seasonal changes.
pub fn seasonal_blend_forecast(
    window: &SeriesWindow,
    t: usize,
    horizon: usize,
    steps_per_day: usize,
    steps_per_week: usize,
    g: BlendWeight,
) -> Result<f64> {
    let y_t = window.value_at(t).ok_or(Error::NoTerminalValue)?;
    let d_ahead = required(
        window,
        (t + horizon).checked_sub(steps_per_day),
        "day-ago target",
    )?;
    let d_base = required(window, t.checked_sub(steps_per_day), "day-ago origin")?;
    let w_ahead = required(
        window,
        (t + horizon).checked_sub(steps_per_week),
        "week-ago target",
    )?;
    let w_base = required(window, t.checked_sub(steps_per_week), "week-ago origin")?;
    let g = g.value();
    Ok(y_t + (1.0 - g) * (d_ahead - d_base) + g * (w_ahead - w_base))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::series::SampleValue;
    use proptest::prelude::*;

    fn window(values: &[f64]) -> SeriesWindow {
        SeriesWindow::from_values("t", 0, values)
    }

    #[test]
    fn persistence_returns_the_current_value() {
        let w = window(&[1.0, 7.3]);
        assert_eq!(persistence_forecast(&w, 1, 12).unwrap(), 7.3);
        let w = window(&[-2.0]);
        assert_eq!(persistence_forecast(&w, 0, 1).unwrap(), -2.0);
        let w = window(&[0.0]);
        assert_eq!(persistence_forecast(&w, 0, 5).unwrap(), 0.0);
    }

    #[test]
    fn persistence_requires_a_present_origin() {
        let w = SeriesWindow::new("t", 0, vec![SampleValue::Missing]);
        assert!(matches!(
            persistence_forecast(&w, 0, 1),
            Err(Error::NoTerminalValue)
        ));
    }

    #[test]
    fn seasonal_daily_is_exact_on_periodic_series() {
        let tau = 6;
        let values: Vec<f64> = (0..24).map(|t| ((t % tau) as f64) * 1.5 - 2.0).collect();
        let w = window(&values);
        for t in tau..18 {
            for i in 1..=4 {
                let f = seasonal_daily_forecast(&w, t, i, tau).unwrap();
                assert!((f - values[t + i]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn seasonal_daily_direct_substitution() {
        // y_t = 10, y_{t+i-tau} = 6, y_{t-tau} = 4 with tau = 2, i = 1, t = 2.
        let w = window(&[4.0, 6.0, 10.0]);
        assert_eq!(seasonal_daily_forecast(&w, 2, 1, 2).unwrap(), 12.0);
    }

    #[test]
    fn seasonal_daily_on_constant_series_is_persistence() {
        let w = window(&[3.0; 10]);
        assert_eq!(seasonal_daily_forecast(&w, 6, 3, 4).unwrap(), 3.0);
    }

    #[test]
    fn seasonal_daily_errors_without_history() {
        let w = window(&[1.0, 2.0, 3.0]);
        assert!(matches!(
            seasonal_daily_forecast(&w, 2, 1, 4),
            Err(Error::InsufficientHistory(_))
        ));
    }

    #[test]
    fn blend_endpoints_match_pure_predictors() {
        let tau_d = 4;
        let tau_w = 8;
        let values: Vec<f64> = (0..20).map(|t| (t as f64 * 0.7).sin() * 5.0).collect();
        let w = window(&values);
        let t = 10;
        let i = 2;
        let daily = seasonal_daily_forecast(&w, t, i, tau_d).unwrap();
        let g0 = seasonal_blend_forecast(&w, t, i, tau_d, tau_w, BlendWeight::new(0.0).unwrap());
        assert_eq!(g0.unwrap(), daily);

        // Weekly-periodic series: the weekly change is the actual change.
        let weekly: Vec<f64> = (0..24).map(|t| ((t % tau_w) as f64) - 3.0).collect();
        let w = window(&weekly);
        let g1 = seasonal_blend_forecast(&w, 12, 3, tau_d, tau_w, BlendWeight::new(1.0).unwrap())
            .unwrap();
        assert!((g1 - weekly[15]).abs() < 1e-12);
    }

    #[test]
    fn blend_direct_substitution() {
        // t = 4, i = 1, tau_d = 2, tau_w = 4:
        // daily change = w[3] - w[2] = 2, weekly change = w[1] - w[0] = 4, y_t = 0.
        let w = window(&[1.0, 5.0, 3.0, 5.0, 0.0]);
        let f = seasonal_blend_forecast(&w, 4, 1, 2, 4, BlendWeight::new(0.5).unwrap()).unwrap();
        assert_eq!(f, 3.0);
    }

    #[test]
    fn blend_weight_rejects_out_of_range() {
        assert!(BlendWeight::new(-0.1).is_err());
        assert!(BlendWeight::new(1.1).is_err());
        assert!(BlendWeight::new(f64::NAN).is_err());
    }

    proptest! {
        /// The blend is affine in g: it interpolates the two pure seasonal
        /// estimates linearly.
        #[test]
        fn blend_is_affine_in_g(
            values in proptest::collection::vec(-50.0f64..50.0, 20..40),
            g in 0.0f64..=1.0,
        ) {
            let tau_d = 4;
            let tau_w = 8;
            let w = window(&values);
            let t = 12;
            let i = 2;
            let f0 = seasonal_blend_forecast(&w, t, i, tau_d, tau_w, BlendWeight::new(0.0).unwrap()).unwrap();
            let f1 = seasonal_blend_forecast(&w, t, i, tau_d, tau_w, BlendWeight::new(1.0).unwrap()).unwrap();
            let fg = seasonal_blend_forecast(&w, t, i, tau_d, tau_w, BlendWeight::new(g).unwrap()).unwrap();
            prop_assert!((fg - ((1.0 - g) * f0 + g * f1)).abs() < 1e-9);
        }

        /// Adding a constant to the whole series adds that constant to every
        /// baseline forecast.
        #[test]
        fn baselines_are_shift_equivariant(
            values in proptest::collection::vec(-50.0f64..50.0, 20..40),
            c in -100.0f64..100.0,
            g in 0.0f64..=1.0,
        ) {
            let tau_d = 4;
            let tau_w = 8;
            let w = window(&values);
            let shifted = window(&values.iter().map(|v| v + c).collect::<Vec<_>>());
            let t = 12;
            let i = 2;
            let tol = 1e-9;

            let p = persistence_forecast(&w, t, i).unwrap();
            let ps = persistence_forecast(&shifted, t, i).unwrap();
            prop_assert!((ps - (p + c)).abs() < tol);

            let d = seasonal_daily_forecast(&w, t, i, tau_d).unwrap();
            let ds = seasonal_daily_forecast(&shifted, t, i, tau_d).unwrap();
            prop_assert!((ds - (d + c)).abs() < tol);

            let gw = BlendWeight::new(g).unwrap();
            let b = seasonal_blend_forecast(&w, t, i, tau_d, tau_w, gw).unwrap();
            let bs = seasonal_blend_forecast(&shifted, t, i, tau_d, tau_w, gw).unwrap();
            prop_assert!((bs - (b + c)).abs() < tol);
        }
    }
}
