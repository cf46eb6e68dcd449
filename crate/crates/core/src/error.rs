//! Error type shared across the crate.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// A configuration value failed validation.
    #[error("invalid config: {0}")]
    InvalidConfig(String),

    /// The requested vehicle count cannot be placed with the required gaps.
    #[error("cannot place {requested} NPCs on a {lap_length} m loop with min gap {min_gap} m")]
    SpawnInfeasible {
        requested: u32,
        lap_length: f64,
        min_gap: f64,
    },

    /// A lane-change request targeted a lane that does not exist or is not
    /// adjacent to the current lane.
    #[error("invalid lane change from lane {from} to lane {to}")]
    InvalidLaneChange { from: u32, to: u32 },

    /// A new maneuver was requested while one is still executing.
    #[error("a lateral maneuver is already active")]
    ManeuverActive,

    /// Replay buffer does not yet hold enough transitions for a batch.
    #[error("replay buffer holds {have} transitions, need {need}")]
    NotEnoughSamples { have: usize, need: usize },

    /// Training loss became NaN or infinite.
    #[error("loss is not finite")]
    NonFiniteLoss,

    /// A checkpoint file is corrupt or was written for a different network.
    #[error("bad checkpoint: {0}")]
    Checkpoint(String),

    /// A metrics CSV row could not be parsed.
    #[error("malformed metrics row at line {line}: {reason}")]
    MalformedCsv { line: usize, reason: String },

    /// An evaluation run was requested with zero episodes.
    #[error("episode count must be positive")]
    NoEpisodes,

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
