//! Rule-based trajectory screening for proposed lane changes.
//!
//! Before a lane change executes, the planned ego trajectory is rolled out
//! against constant-speed, lane-holding predictions of every other vehicle.
//! If any sample along the horizon puts another vehicle both laterally in
//! conflict and longitudinally closer than a safety gap, the maneuver is
//! rejected and the offending vehicle is reported.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::sim::{Action, ManeuverPlan, VehicleState, WorldState, LATERAL_NEAR};
use crate::units::{arc_distance, wrap_s};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SafetyConfig {
    /// Extra prediction time past the end of the maneuver, s.
    pub horizon_margin: f64,
    /// Spacing of prediction samples, s.
    pub sample_dt: f64,
    /// Required bumper-to-bumper clearance at every sample, m.
    pub min_gap: f64,
    /// Lateral distance under which two vehicles share a corridor, m.
    pub lateral_conflict: f64,
}

impl Default for SafetyConfig {
    fn default() -> Self {
        SafetyConfig {
            horizon_margin: 1.0,
            sample_dt: 0.1,
            min_gap: 8.0,
            lateral_conflict: LATERAL_NEAR,
        }
    }
}

impl SafetyConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.horizon_margin >= 0.0) {
            return Err(Error::InvalidConfig(
                "horizon_margin must be non-negative".into(),
            ));
        }
        if !(self.sample_dt > 0.0) {
            return Err(Error::InvalidConfig("sample_dt must be positive".into()));
        }
        if !(self.min_gap >= 0.0) {
            return Err(Error::InvalidConfig("min_gap must be non-negative".into()));
        }
        if !(self.lateral_conflict > 0.0) {
            return Err(Error::InvalidConfig(
                "lateral_conflict must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// Filter decision for one proposed maneuver.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub enum Verdict {
    Accepted,
    /// The plan was refused because of `vehicle_id`, first violating at
    /// `at_time` seconds into the prediction.
    Rejected { vehicle_id: u32, at_time: f64 },
}

impl Verdict {
    pub fn is_accepted(&self) -> bool {
        matches!(self, Verdict::Accepted)
    }
}

/// Predicted ego pose `t` seconds after the decision: constant speed along
/// the loop, lateral offset following the plan (held at the target after
/// the maneuver ends).
pub fn ego_pose_at(ego: &VehicleState, plan: &ManeuverPlan, lap: f64, t: f64) -> (f64, f64) {
    (wrap_s(ego.s + ego.speed * t, lap), plan.offset_at(t))
}

/// Predicted pose of a lane-holding vehicle `t` seconds ahead.
pub fn npc_pose_at(v: &VehicleState, lap: f64, t: f64) -> (f64, f64) {
    (wrap_s(v.s + v.speed * t, lap), v.d)
}

/// Sweeps the planned trajectory over the prediction horizon (maneuver
/// duration plus the margin), sampling every `sample_dt` seconds including
/// both endpoints. The first sample at which any other vehicle is laterally
/// within `lateral_conflict` while the center distance is under
/// `min_gap` plus the mean body length rejects the plan.
pub fn check_plan(world: &WorldState, plan: &ManeuverPlan, cfg: &SafetyConfig) -> Verdict {
    let ego = world.ego();
    let lap = world.track.lap_length;
    let horizon = plan.duration + cfg.horizon_margin;
    let samples = (horizon / cfg.sample_dt).round() as usize;

    for k in 0..=samples {
        let t = k as f64 * cfg.sample_dt;
        let (ego_s, ego_d) = ego_pose_at(ego, plan, lap, t);
        for v in world.vehicles.iter().filter(|v| !v.is_ego) {
            let (vs, vd) = npc_pose_at(v, lap, t);
            if (vd - ego_d).abs() >= cfg.lateral_conflict {
                continue;
            }
            let required = cfg.min_gap + (ego.length + v.length) / 2.0;
            if arc_distance(ego_s, vs, lap) < required {
                return Verdict::Rejected {
                    vehicle_id: v.id,
                    at_time: t,
                };
            }
        }
    }
    Verdict::Accepted
}

/// Screens a proposed action. Keeping the current lane is always accepted;
/// a lane change is planned from the current state and swept with
/// [`check_plan`]. The action must be executable (an adjacent on-road
/// target, no maneuver in progress).
pub fn check_action(world: &WorldState, action: Action, cfg: &SafetyConfig) -> Result<Verdict> {
    let target = match action {
        Action::KeepLane => return Ok(Verdict::Accepted),
        Action::ChangeRight => world.ego().lane + 1,
        Action::ChangeLeft => {
            let lane = world.ego().lane;
            if lane == 0 {
                return Err(Error::InvalidLaneChange { from: 0, to: 0 });
            }
            lane - 1
        }
    };
    let plan = world.plan_lane_change(target)?;
    Ok(check_plan(world, &plan, cfg))
}
