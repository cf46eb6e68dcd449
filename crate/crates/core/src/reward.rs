//! Decision-level reward.
//!
//! Each decision period produces one scalar. Failure modes are graded:
//! colliding is worst, trying to leave the road is next, changing lanes for
//! no reason costs less, and otherwise the agent earns speed above a
//! reference minus a small toll on every lane change.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::mps_to_mph;
use crate::{VehicleState, WorldState};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RewardConfig {
    /// Reward when the period ends in a collision.
    pub collision_penalty: f64,
    /// Reward for steering toward a lane that does not exist.
    pub offroad_penalty: f64,
    /// Reward for a lane change made with nothing ahead worth passing.
    pub unnecessary_change_penalty: f64,
    /// Additive cost on every executed lane change.
    pub lane_change_cost: f64,
    /// Reward per mile-per-hour above the reference speed.
    pub speed_weight: f64,
    /// Speed earning exactly zero, mph.
    pub reference_speed_mph: f64,
    /// A lane change counts as purposeful only when a vehicle sits within
    /// this many meters ahead in the ego's lane at decision time.
    pub leader_lookahead: f64,
}

impl Default for RewardConfig {
    fn default() -> Self {
        RewardConfig {
            collision_penalty: -10.0,
            offroad_penalty: -5.0,
            unnecessary_change_penalty: -3.0,
            lane_change_cost: -1.0,
            speed_weight: 0.04,
            reference_speed_mph: 25.0,
            leader_lookahead: 40.0,
        }
    }
}

impl RewardConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.speed_weight.is_finite() && self.reference_speed_mph.is_finite()) {
            return Err(Error::InvalidConfig(
                "reward speed terms must be finite".into(),
            ));
        }
        if !(self.leader_lookahead > 0.0) {
            return Err(Error::InvalidConfig(
                "leader_lookahead must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// What happened over one decision period, as needed for the reward.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct DecisionOutcome {
    /// Any collision occurred during the period.
    pub collided: bool,
    /// The chosen action pointed off the road and was not executed.
    pub attempted_offroad: bool,
    /// A lane change was actually initiated this period.
    pub changed_lanes: bool,
    /// At decision time, a vehicle sat within the lookahead ahead of the
    /// ego in its lane.
    pub change_had_leader: bool,
    /// Mean ego speed over the period, mph.
    pub avg_speed_mph: f64,
}

/// Average-speed term of the reward.
pub fn speed_term(cfg: &RewardConfig, avg_speed_mph: f64) -> f64 {
    cfg.speed_weight * (avg_speed_mph - cfg.reference_speed_mph)
}

/// Scalar reward for one decision period. Penalties take precedence:
/// collision, then off-road attempt, then pointless lane change; otherwise
/// the speed term plus the change cost when a change was made.
pub fn compute_reward(outcome: &DecisionOutcome, cfg: &RewardConfig) -> f64 {
    if outcome.collided {
        return cfg.collision_penalty;
    }
    if outcome.attempted_offroad {
        return cfg.offroad_penalty;
    }
    if outcome.changed_lanes && !outcome.change_had_leader {
        return cfg.unnecessary_change_penalty;
    }
    let base = speed_term(cfg, outcome.avg_speed_mph);
    if outcome.changed_lanes {
        base + cfg.lane_change_cost
    } else {
        base
    }
}

/// The nearest vehicle ahead of the ego in its registered lane within
/// `lookahead` meters (center to center). Decision-time query; the ego is
/// lane-centered whenever this is asked.
pub fn leader_within<'a>(world: &'a WorldState, lookahead: f64) -> Option<&'a VehicleState> {
    let ego = world.ego();
    world
        .vehicles
        .iter()
        .filter(|v| !v.is_ego && v.lane == ego.lane)
        .filter_map(|v| {
            let ahead = crate::units::forward_arc(ego.s, v.s, world.track.lap_length);
            (ahead > 0.0 && ahead <= lookahead).then_some((v, ahead))
        })
        .min_by(|a, b| a.1.partial_cmp(&b.1).expect("finite distances"))
        .map(|(v, _)| v)
}

/// Mean ego speed over a period, converted for the reward.
pub fn average_speed_mph(total_distance_m: f64, total_time_s: f64) -> f64 {
    if total_time_s <= 0.0 {
        return 0.0;
    }
    mps_to_mph(total_distance_m / total_time_s)
}
