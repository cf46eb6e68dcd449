//! Occupancy-grid state encoding.
//!
//! The scene around the ego is rasterized into a rows-by-lanes grid covering
//! a fixed window ahead of and behind the ego. Empty cells read 1.0, cells
//! covered by the ego read `+normalized_speed`, and cells covered by another
//! vehicle read `-normalized_speed` of that vehicle, so sign separates self
//! from traffic and magnitude carries speed.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::WorldState;
use crate::units::signed_arc;

/// Grid rows (window length divided by row span).
pub const GRID_ROWS: usize = 45;

/// Grid columns, one per lane.
pub const GRID_COLS: usize = 3;

/// Extra scalar inputs appended to the grid.
pub const AUX_LEN: usize = 3;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct EncoderConfig {
    /// Window length ahead of the ego, m.
    pub range_ahead: f64,
    /// Window length behind the ego, m.
    pub range_behind: f64,
    /// Longitudinal extent of one grid row, m.
    pub row_span: f64,
    /// Speed normalization bounds, m/s.
    pub speed_min: f64,
    pub speed_max: f64,
}

impl Default for EncoderConfig {
    fn default() -> Self {
        EncoderConfig {
            range_ahead: 60.0,
            range_behind: 30.0,
            row_span: 2.0,
            speed_min: 0.0,
            speed_max: 22.352,
        }
    }
}

impl EncoderConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.range_ahead > 0.0 && self.range_behind >= 0.0 && self.row_span > 0.0) {
            return Err(Error::InvalidConfig(
                "encoder window extents must be positive".into(),
            ));
        }
        let rows = (self.range_ahead + self.range_behind) / self.row_span;
        if (rows - GRID_ROWS as f64).abs() > 1e-9 {
            return Err(Error::InvalidConfig(format!(
                "encoder window must divide into exactly {GRID_ROWS} rows, got {rows}"
            )));
        }
        if !(self.speed_max > self.speed_min) && self.speed_max != self.speed_min {
            return Err(Error::InvalidConfig(
                "encoder speed bounds must be ordered".into(),
            ));
        }
        Ok(())
    }
}

/// Network input: a flattened occupancy grid plus auxiliary scalars.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct StateTensor {
    /// Row-major `GRID_ROWS x GRID_COLS`. Row 0 is the far edge ahead of
    /// the ego; columns follow lane indices.
    pub grid: Vec<f64>,
    /// Ego normalized speed, can-go-left-edge flag, can-go-right-edge flag.
    pub aux: [f64; AUX_LEN],
}

impl StateTensor {
    pub fn grid_at(&self, row: usize, col: usize) -> f64 {
        self.grid[row * GRID_COLS + col]
    }
}

/// Maps a speed onto `[0.01, 0.99]` within the given bounds. Degenerate
/// bounds map everything to 0.5.
pub fn normalize_speed(speed: f64, min: f64, max: f64) -> f64 {
    if max <= min {
        return 0.5;
    }
    ((speed - min) / (max - min)).clamp(0.01, 0.99)
}

/// Rasterizes the world around the ego.
///
/// A vehicle contributes cells only when its center lies inside the window
/// (`[-range_behind, range_ahead]` relative to the ego); it then marks every
/// row its body overlaps with positive measure, in the column of its lane.
/// The ego is marked last so its own cells always carry the positive value.
pub fn encode(world: &WorldState, cfg: &EncoderConfig) -> StateTensor {
    let ego = world.ego();
    let lap = world.track.lap_length;
    let mut grid = vec![1.0; GRID_ROWS * GRID_COLS];

    let mut mark = |v: &crate::sim::VehicleState| {
        let delta = signed_arc(ego.s, v.s, lap);
        if delta < -cfg.range_behind || delta > cfg.range_ahead {
            return;
        }
        let col = v.lane as usize;
        if col >= GRID_COLS {
            return;
        }
        let lo = delta - v.length / 2.0;
        let hi = delta + v.length / 2.0;
        let speed = normalize_speed(v.speed, cfg.speed_min, cfg.speed_max);
        let value = if v.is_ego { speed } else { -speed };
        for row in 0..GRID_ROWS {
            let row_hi = cfg.range_ahead - cfg.row_span * row as f64;
            let row_lo = row_hi - cfg.row_span;
            if lo < row_hi && hi > row_lo {
                grid[row * GRID_COLS + col] = value;
            }
        }
    };

    for v in world.vehicles.iter().filter(|v| !v.is_ego) {
        mark(v);
    }
    mark(ego);

    let aux = [
        normalize_speed(ego.speed, cfg.speed_min, cfg.speed_max),
        if ego.lane > 0 { 1.0 } else { 0.0 },
        if ego.lane + 1 < world.track.lane_count { 1.0 } else { 0.0 },
    ];

    StateTensor { grid, aux }
}
