//! On-disk model bundle: the validity statistics, the grid, and one trained
//! line (state snapshot plus the stream gate's zero-memory bit) per line id,
//! in one versioned little-endian file.
//!
//! Layout:
//!
//!   magic    8 bytes  b"GFMODEL\0"
//!   version  u32      1
//!   grid     i64 origin_epoch_s, i64 step_s
//!   stats    f64 global_rms, f64 increment_threshold_factor,
//!            u64 zero_run_min, f64 outlier_factor
//!   u64      line count
//!   per line u64 id length + id bytes (UTF-8),
//!            u8 gate zero-memory flag,
//!            u64 snapshot length + snapshot bytes
//!
//! Lines are stored sorted by id, so identical states always produce
//! identical files.

use std::collections::BTreeMap;

use gridflow_core::adaptive::AdaptiveState;
use gridflow_core::quality::ValidityStats;
use gridflow_core::series::TimeGrid;
use gridflow_core::{Error, Result};

const MAGIC: &[u8; 8] = b"GFMODEL\0";
const VERSION: u32 = 1;

/// One trained line: the forecaster state and where its validity gate left off.
pub struct LineModel {
    pub state: AdaptiveState,
    /// True when the last training sample was an exact present zero.
    pub gate_zero: bool,
}

pub struct ModelBundle {
    pub grid: TimeGrid,
    pub stats: ValidityStats,
    pub lines: BTreeMap<String, LineModel>,
}

impl ModelBundle {
    pub fn to_bytes(&self) -> Vec<u8> {
        let mut out = Vec::new();
        out.extend_from_slice(MAGIC);
        out.extend_from_slice(&VERSION.to_le_bytes());
        out.extend_from_slice(&self.grid.origin_epoch_s.to_le_bytes());
        out.extend_from_slice(&self.grid.step_s.to_le_bytes());
        out.extend_from_slice(&self.stats.global_rms.to_bits().to_le_bytes());
        out.extend_from_slice(
            &self
                .stats
                .increment_threshold_factor
                .to_bits()
                .to_le_bytes(),
        );
        out.extend_from_slice(&(self.stats.zero_run_min as u64).to_le_bytes());
        out.extend_from_slice(&self.stats.outlier_factor.to_bits().to_le_bytes());
        out.extend_from_slice(&(self.lines.len() as u64).to_le_bytes());
        for (id, line) in &self.lines {
            let id_bytes = id.as_bytes();
            out.extend_from_slice(&(id_bytes.len() as u64).to_le_bytes());
            out.extend_from_slice(id_bytes);
            out.push(line.gate_zero as u8);
            let snap = line.state.to_snapshot();
            out.extend_from_slice(&(snap.len() as u64).to_le_bytes());
            out.extend_from_slice(&snap);
        }
        out
    }

    pub fn from_bytes(bytes: &[u8]) -> Result<Self> {
        let mut pos = 0usize;
        let take = |pos: &mut usize, n: usize| -> Result<&[u8]> {
            if *pos + n > bytes.len() {
                return Err(Error::Snapshot("truncated model file".into()));
            }
            let out = &bytes[*pos..*pos + n];
            *pos += n;
            Ok(out)
        };
        let u64_at = |pos: &mut usize| -> Result<u64> {
            Ok(u64::from_le_bytes(take(pos, 8)?.try_into().unwrap()))
        };
        let i64_at = |pos: &mut usize| -> Result<i64> {
            Ok(i64::from_le_bytes(take(pos, 8)?.try_into().unwrap()))
        };
        let f64_at = |pos: &mut usize| -> Result<f64> { Ok(f64::from_bits(u64_at(pos)?)) };

        if take(&mut pos, 8)? != MAGIC {
            return Err(Error::Snapshot("not a gridflow model file".into()));
        }
        let version = u32::from_le_bytes(take(&mut pos, 4)?.try_into().unwrap());
        if version != VERSION {
            return Err(Error::Snapshot(format!(
                "unsupported model version {version}"
            )));
        }
        let grid = TimeGrid::new(i64_at(&mut pos)?, i64_at(&mut pos)?)?;
        let mut stats = ValidityStats::new(f64_at(&mut pos)?);
        stats.increment_threshold_factor = f64_at(&mut pos)?;
        stats.zero_run_min = u64_at(&mut pos)? as usize;
        stats.outlier_factor = f64_at(&mut pos)?;
        stats
            .validate()
            .map_err(|e| Error::Snapshot(e.to_string()))?;

        let count = u64_at(&mut pos)? as usize;
        let mut lines = BTreeMap::new();
        for _ in 0..count {
            let id_len = u64_at(&mut pos)? as usize;
            let id = String::from_utf8(take(&mut pos, id_len)?.to_vec())
                .map_err(|_| Error::Snapshot("line id is not UTF-8".into()))?;
            let gate_zero = take(&mut pos, 1)?[0] != 0;
            let snap_len = u64_at(&mut pos)? as usize;
            let state = AdaptiveState::from_snapshot(take(&mut pos, snap_len)?)?;
            lines.insert(id, LineModel { state, gate_zero });
        }
        if pos != bytes.len() {
            return Err(Error::Snapshot("trailing bytes in model file".into()));
        }
        Ok(Self { grid, stats, lines })
    }
}

/// Human-readable statistics sidecar (`key=value`), written next to the model.
pub fn stats_kv(stats: &ValidityStats) -> String {
    format!(
        "global_rms={}\nincrement_threshold_factor={}\nzero_run_min={}\noutlier_factor={}\n",
        stats.global_rms,
        stats.increment_threshold_factor,
        stats.zero_run_min,
        stats.outlier_factor
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use gridflow_core::adaptive::SmoothingParams;

    #[test]
    fn bundle_round_trips() {
        let stats = ValidityStats::new(3.0);
        let params = SmoothingParams {
            steps_per_day: 4,
            steps_per_week: 28,
            horizon: 3,
            monitor_lag: 2,
            saturation_limit: 10.0,
            ..SmoothingParams::default()
        };
        let mut lines = BTreeMap::new();
        lines.insert(
            "L0".to_string(),
            LineModel {
                state: AdaptiveState::new(params.clone(), &stats).unwrap(),
                gate_zero: true,
            },
        );
        lines.insert(
            "L1".to_string(),
            LineModel {
                state: AdaptiveState::new(params, &stats).unwrap(),
                gate_zero: false,
            },
        );
        let bundle = ModelBundle {
            grid: TimeGrid::new(0, 300).unwrap(),
            stats,
            lines,
        };
        let bytes = bundle.to_bytes();
        let restored = ModelBundle::from_bytes(&bytes).unwrap();
        assert_eq!(restored.to_bytes(), bytes);
        assert_eq!(restored.lines.len(), 2);
        assert!(restored.lines["L0"].gate_zero);
    }

    #[test]
    fn corrupt_bundles_are_rejected() {
        let stats = ValidityStats::new(1.0);
        let bundle = ModelBundle {
            grid: TimeGrid::new(0, 300).unwrap(),
            stats,
            lines: BTreeMap::new(),
        };
        let bytes = bundle.to_bytes();
        assert!(ModelBundle::from_bytes(&bytes[..bytes.len() - 1]).is_err());
        let mut bad = bytes;
        bad[3] ^= 1;
        assert!(ModelBundle::from_bytes(&bad).is_err());
    }
}
