//! Lane-change decision making on a looped three-lane highway.
//!
//! The crate simulates a ring road with speed-holding NPC traffic, encodes the
//! scene into an occupancy grid, scores lane-change actions with a small
//! convolutional Q-network trained from scratch (no autodiff), and optionally
//! screens every proposed maneuver through a rule-based trajectory safety
//! filter before it is allowed to execute.

pub mod config;
pub mod dqn;
pub mod encoder;
pub mod error;
pub mod harness;
pub mod reward;
pub mod safety;
pub mod seeds;
pub mod sim;
pub mod units;

pub use config::AppConfig;
pub use error::{Error, Result};
pub use sim::{Action, TrackConfig, VehicleState, WorldState};
