//! Time-grid arithmetic, sample representation, and alignment of raw
//! timestamped points onto a fixed-step index.
//!
//! The grid is a pure integer lattice over epoch seconds; there is no
//! calendar or DST handling. Raw timestamps that fall between two steps are
//! truncated down to the lower one.

use crate::{Error, Result};

/// Default grid step: 5 minutes.
pub const DEFAULT_STEP_S: i64 = 300;

/// Fixed-step temporal index over epoch seconds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct TimeGrid {
    pub origin_epoch_s: i64,
    pub step_s: i64,
}

impl TimeGrid {
    pub fn new(origin_epoch_s: i64, step_s: i64) -> Result<Self> {
        if step_s <= 0 {
            return Err(Error::Config(format!(
                "grid step must be positive, got {step_s}"
            )));
        }
        Ok(Self {
            origin_epoch_s,
            step_s,
        })
    }

    /// Maps a raw epoch timestamp to its grid index, truncating down.
    pub fn index_of(&self, raw_epoch_s: i64) -> Result<usize> {
        if raw_epoch_s < self.origin_epoch_s {
            return Err(Error::InvalidTimestamp {
                raw_epoch_s,
                origin_epoch_s: self.origin_epoch_s,
            });
        }
        Ok(((raw_epoch_s - self.origin_epoch_s) / self.step_s) as usize)
    }

    /// Epoch seconds of the start of the given grid cell.
    pub fn epoch_of(&self, index: usize) -> i64 {
        self.origin_epoch_s + index as i64 * self.step_s
    }
}

impl Default for TimeGrid {
    fn default() -> Self {
        Self {
            origin_epoch_s: 0,
            step_s: DEFAULT_STEP_S,
        }
    }
}

/// Value of one grid cell.
///
/// `Present` always carries a finite number; NaN and infinite payloads are
/// classified as `NonNumeric` at construction so the quality module can count
/// them separately from gaps.
#[derive(Debug, Clone, Copy, PartialEq)]
pub enum SampleValue {
    Present(f64),
    Missing,
    NonNumeric,
}

impl SampleValue {
    /// Classifies a raw optional payload.
    pub fn from_raw(raw: Option<f64>) -> Self {
        match raw {
            None => SampleValue::Missing,
            Some(v) if v.is_finite() => SampleValue::Present(v),
            Some(_) => SampleValue::NonNumeric,
        }
    }

    /// Present and finite. A `Present` constructed with a non-finite payload
    /// (bypassing [`Self::from_raw`]) degrades to non-numeric everywhere.
    pub fn value(&self) -> Option<f64> {
        match self {
            SampleValue::Present(v) if v.is_finite() => Some(*v),
            _ => None,
        }
    }

    pub fn is_present(&self) -> bool {
        self.value().is_some()
    }
}

/// One point on the grid.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Sample {
    pub index: usize,
    pub value: SampleValue,
}

/// A contiguous run of samples for one line. Gaps are materialized as
/// `Missing` cells, so `samples[k]` always sits at index `start_index + k`.
#[derive(Debug, Clone, PartialEq)]
pub struct SeriesWindow {
    pub line_id: String,
    pub start_index: usize,
    pub samples: Vec<SampleValue>,
}

impl SeriesWindow {
    pub fn new(line_id: impl Into<String>, start_index: usize, samples: Vec<SampleValue>) -> Self {
        Self {
            line_id: line_id.into(),
            start_index,
            samples,
        }
    }

    pub fn from_values(line_id: impl Into<String>, start_index: usize, values: &[f64]) -> Self {
        Self::new(
            line_id,
            start_index,
            values
                .iter()
                .map(|&v| SampleValue::from_raw(Some(v)))
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.samples.len()
    }

    pub fn is_empty(&self) -> bool {
        self.samples.is_empty()
    }

    /// Grid index of position `k`.
    pub fn index_at(&self, k: usize) -> usize {
        self.start_index + k
    }

    pub fn get(&self, k: usize) -> SampleValue {
        self.samples[k]
    }

    /// Present value at position `k`, if any.
    pub fn value_at(&self, k: usize) -> Option<f64> {
        self.samples.get(k).and_then(|s| s.value())
    }

    pub fn sample_at(&self, k: usize) -> Sample {
        Sample {
            index: self.index_at(k),
            value: self.samples[k],
        }
    }
}

/// Aligns raw `(epoch_s, payload)` points onto the grid as one dense window.
///
/// Every grid cell between the lowest and highest normalized index gets a
/// sample; cells with no point become `Missing`. When several points truncate
/// to the same cell, the last one in input order wins.
pub fn densify(
    line_id: impl Into<String>,
    points: &[(i64, Option<f64>)],
    grid: &TimeGrid,
) -> Result<SeriesWindow> {
    if points.is_empty() {
        return Err(Error::EmptyInput);
    }
    let mut cells: Vec<(usize, SampleValue)> = Vec::with_capacity(points.len());
    for &(epoch, raw) in points {
        cells.push((grid.index_of(epoch)?, SampleValue::from_raw(raw)));
    }
    let start = cells.iter().map(|&(i, _)| i).min().expect("non-empty");
    let end = cells.iter().map(|&(i, _)| i).max().expect("non-empty");
    let mut samples = vec![SampleValue::Missing; end - start + 1];
    for (index, value) in cells {
        samples[index - start] = value;
    }
    Ok(SeriesWindow::new(line_id, start, samples))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn timestamps_truncate_to_lower_step() {
        let grid = TimeGrid::new(0, 300).unwrap();
        assert_eq!(grid.index_of(301).unwrap(), 1);
        assert_eq!(grid.index_of(0).unwrap(), 0);
        assert_eq!(grid.index_of(899).unwrap(), 2);
    }

    #[test]
    fn timestamp_before_origin_is_rejected() {
        let grid = TimeGrid::new(1000, 300).unwrap();
        assert!(matches!(
            grid.index_of(999),
            Err(Error::InvalidTimestamp { .. })
        ));
    }

    #[test]
    fn zero_step_is_rejected() {
        assert!(TimeGrid::new(0, 0).is_err());
    }

    #[test]
    fn densify_materializes_gaps() {
        let grid = TimeGrid::default();
        let w = densify("a", &[(0, Some(5.0)), (600, Some(7.0))], &grid).unwrap();
        assert_eq!(w.samples.len(), 3);
        assert_eq!(w.get(0), SampleValue::Present(5.0));
        assert_eq!(w.get(1), SampleValue::Missing);
        assert_eq!(w.get(2), SampleValue::Present(7.0));
    }

    #[test]
    fn densify_single_point() {
        let grid = TimeGrid::default();
        let w = densify("a", &[(0, Some(5.0))], &grid).unwrap();
        assert_eq!(w.samples, vec![SampleValue::Present(5.0)]);
    }

    #[test]
    fn densify_last_point_wins_within_a_cell() {
        // Both timestamps truncate to index 0, so input order decides.
        let grid = TimeGrid::default();
        let w = densify("a", &[(0, Some(1.0)), (299, Some(2.0))], &grid).unwrap();
        assert_eq!(w.samples, vec![SampleValue::Present(2.0)]);
    }

    #[test]
    fn densify_empty_input_errors() {
        let grid = TimeGrid::default();
        assert!(matches!(densify("a", &[], &grid), Err(Error::EmptyInput)));
    }

    #[test]
    fn non_finite_payloads_become_non_numeric() {
        assert_eq!(
            SampleValue::from_raw(Some(f64::NAN)),
            SampleValue::NonNumeric
        );
        assert_eq!(
            SampleValue::from_raw(Some(f64::INFINITY)),
            SampleValue::NonNumeric
        );
        assert_eq!(SampleValue::from_raw(None), SampleValue::Missing);
    }

    proptest! {
        /// Densifying a window that is already dense reproduces it exactly.
        #[test]
        fn densify_is_idempotent_on_dense_windows(
            values in proptest::collection::vec(proptest::option::of(-1e6f64..1e6), 1..200),
            start in 0usize..1000,
        ) {
            let grid = TimeGrid::default();
            let points: Vec<(i64, Option<f64>)> = values
                .iter()
                .enumerate()
                .map(|(k, v)| (grid.epoch_of(start + k), *v))
                .collect();
            let once = densify("p", &points, &grid).unwrap();
            let again_points: Vec<(i64, Option<f64>)> = once
                .samples
                .iter()
                .enumerate()
                .map(|(k, s)| (grid.epoch_of(once.start_index + k), s.value()))
                .collect();
            let twice = densify("p", &again_points, &grid).unwrap();
            prop_assert_eq!(once, twice);
        }

        /// Output length is always max index − min index + 1.
        #[test]
        fn densify_length_spans_index_range(
            mut epochs in proptest::collection::vec(0i64..100_000, 1..100),
        ) {
            let grid = TimeGrid::default();
            let points: Vec<(i64, Option<f64>)> = epochs.drain(..).map(|e| (e, Some(1.0))).collect();
            let w = densify("p", &points, &grid).unwrap();
            let idx: Vec<usize> = points.iter().map(|&(e, _)| grid.index_of(e).unwrap()).collect();
            let span = idx.iter().max().unwrap() - idx.iter().min().unwrap() + 1;
            prop_assert_eq!(w.len(), span);
        }
    }
}
