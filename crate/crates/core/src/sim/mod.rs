//! Deterministic looped-highway simulator.
//!
//! The road is a ring of parallel lanes described in arc coordinates: `s`
//! runs along the loop and wraps at the lap length, `d` measures lateral
//! offset from the left road edge. NPCs hold their lane and regulate speed
//! with the shared follow controller; the ego vehicle additionally executes
//! committed lateral maneuvers.

pub mod controller;
pub mod maneuver;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::units::{forward_arc, signed_arc, wrap_s};

pub use controller::{follow_controller, safe_gap, Lead, MAX_ACCEL};
pub use maneuver::ManeuverPlan;

/// Default vehicle body length, m.
pub const VEHICLE_LENGTH: f64 = 5.5;

/// Nominal vehicle body width, m.
pub const VEHICLE_WIDTH: f64 = 2.0;

/// Two bodies closer than this laterally are treated as sharing a corridor,
/// both for collisions and for leader selection. Width plus a margin.
pub const LATERAL_NEAR: f64 = 2.8;

/// Ring-road geometry.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct TrackConfig {
    /// Loop circumference, m.
    pub lap_length: f64,
    pub lane_count: u32,
    /// Width of each lane, m.
    pub lane_width: f64,
    /// Posted limit, m/s. The ego cruises at this speed when unobstructed.
    pub speed_limit: f64,
}

impl Default for TrackConfig {
    fn default() -> Self {
        TrackConfig {
            lap_length: 6946.0,
            lane_count: 3,
            lane_width: 4.0,
            speed_limit: 22.352,
        }
    }
}

impl TrackConfig {
    /// Lateral offset of a lane's centerline. Lane 0 is leftmost.
    pub fn lane_center(&self, lane: u32) -> f64 {
        (lane as f64 + 0.5) * self.lane_width
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.lap_length > 0.0) {
            return Err(Error::InvalidConfig("lap_length must be positive".into()));
        }
        if self.lane_count < 2 {
            return Err(Error::InvalidConfig("lane_count must be at least 2".into()));
        }
        if !(self.lane_width > VEHICLE_WIDTH) {
            return Err(Error::InvalidConfig(format!(
                "lane_width must exceed the vehicle width ({VEHICLE_WIDTH} m)"
            )));
        }
        if !(self.speed_limit > 0.0) {
            return Err(Error::InvalidConfig("speed_limit must be positive".into()));
        }
        Ok(())
    }
}

/// Simulation stepping and traffic population parameters.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SimConfig {
    /// Integration step, s.
    pub dt: f64,
    /// Number of NPC vehicles to spawn.
    pub npc_count: u32,
    /// NPC cruise speeds are drawn uniformly from this range, m/s.
    pub npc_speed_min: f64,
    pub npc_speed_max: f64,
    /// Minimum bumper-to-bumper clearance between same-lane vehicles at
    /// spawn, m.
    pub min_spawn_gap: f64,
    /// Episode wall-clock cap, s.
    pub max_episode_time: f64,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            dt: 0.1,
            npc_count: 20,
            npc_speed_min: 13.4,
            npc_speed_max: 20.1,
            min_spawn_gap: 15.0,
            max_episode_time: 450.0,
        }
    }
}

impl SimConfig {
    pub fn validate(&self, track: &TrackConfig) -> Result<()> {
        if !(self.dt > 0.0) {
            return Err(Error::InvalidConfig("dt must be positive".into()));
        }
        if !(self.npc_speed_min > 0.0 && self.npc_speed_max >= self.npc_speed_min) {
            return Err(Error::InvalidConfig(
                "npc speed range must be positive and ordered".into(),
            ));
        }
        if self.npc_speed_max > track.speed_limit {
            return Err(Error::InvalidConfig(
                "npc_speed_max must not exceed the speed limit".into(),
            ));
        }
        if !(self.min_spawn_gap >= 0.0) {
            return Err(Error::InvalidConfig(
                "min_spawn_gap must be non-negative".into(),
            ));
        }
        if !(self.max_episode_time > 0.0) {
            return Err(Error::InvalidConfig(
                "max_episode_time must be positive".into(),
            ));
        }
        Ok(())
    }
}

/// One vehicle on the ring.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct VehicleState {
    pub id: u32,
    /// Arc position of the body center, m, in `[0, lap_length)`.
    pub s: f64,
    /// Lateral offset of the body center from the left road edge, m.
    pub d: f64,
    /// Lane the vehicle is registered in. For the ego this stays the source
    /// lane until a lane change completes.
    pub lane: u32,
    /// Current speed, m/s.
    pub speed: f64,
    /// Body length, m.
    pub length: f64,
    pub is_ego: bool,
    /// Speed this vehicle regulates toward on open road, m/s.
    pub cruise_speed: f64,
}

/// Discrete decisions available to the agent.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Action {
    KeepLane,
    ChangeRight,
    ChangeLeft,
}

impl Action {
    pub const ALL: [Action; 3] = [Action::KeepLane, Action::ChangeRight, Action::ChangeLeft];

    pub fn index(self) -> usize {
        match self {
            Action::KeepLane => 0,
            Action::ChangeRight => 1,
            Action::ChangeLeft => 2,
        }
    }

    pub fn from_index(index: usize) -> Action {
        Action::ALL[index]
    }
}

/// What happened during one integration step.
#[derive(Clone, Copy, Debug, Default, PartialEq)]
pub struct StepEvents {
    /// Ids of the first overlapping pair found, if any.
    pub collision: Option<(u32, u32)>,
    /// The active lateral maneuver finished during this step.
    pub maneuver_completed: bool,
    /// The ego crossed the start line during this step.
    pub lap_completed: bool,
}

/// Full simulation state. Cloning captures an exact snapshot; two worlds
/// stepped identically stay equal.
#[derive(Clone, Debug, PartialEq)]
pub struct WorldState {
    pub time: f64,
    pub track: TrackConfig,
    pub vehicles: Vec<VehicleState>,
    pub ego_id: u32,
    pub active_maneuver: Option<ManeuverPlan>,
    /// Owned generator; spawning advances it, so continued use stays
    /// decoupled from the spawn draw count.
    pub rng: ChaCha8Rng,
}

impl WorldState {
    /// Places the ego at the start line of the middle lane plus `npc_count`
    /// NPCs with the required spawn gaps, all lane-centered.
    ///
    /// NPCs draw a lane, an arc position, and a cruise speed from the seeded
    /// generator, rejecting placements that violate the spawn gap. Returns
    /// an error when the requested count cannot fit.
    pub fn spawn(track: &TrackConfig, sim: &SimConfig, seed: u64) -> Result<WorldState> {
        track.validate()?;
        sim.validate(track)?;

        // Capacity check before sampling: each vehicle occupies a body
        // length plus the spawn gap along its lane.
        let slot = VEHICLE_LENGTH + sim.min_spawn_gap;
        let per_lane = (track.lap_length / slot).floor() as u64;
        let capacity = per_lane * track.lane_count as u64;
        if sim.npc_count as u64 + 1 > capacity {
            return Err(Error::SpawnInfeasible {
                requested: sim.npc_count,
                lap_length: track.lap_length,
                min_gap: sim.min_spawn_gap,
            });
        }

        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let ego_lane = track.lane_count / 2;
        let mut vehicles = vec![VehicleState {
            id: 0,
            s: 0.0,
            d: track.lane_center(ego_lane),
            lane: ego_lane,
            speed: 0.0,
            length: VEHICLE_LENGTH,
            is_ego: true,
            cruise_speed: track.speed_limit,
        }];

        const MAX_ATTEMPTS: u32 = 10_000;
        for id in 1..=sim.npc_count {
            let mut attempts = 0;
            let (lane, s) = loop {
                let lane = rng.random_range(0..track.lane_count);
                let s = rng.random_range(0.0..track.lap_length);
                let fits = vehicles.iter().filter(|v| v.lane == lane).all(|v| {
                    let centers = crate::units::arc_distance(v.s, s, track.lap_length);
                    centers >= sim.min_spawn_gap + (v.length + VEHICLE_LENGTH) / 2.0
                });
                if fits {
                    break (lane, s);
                }
                attempts += 1;
                if attempts >= MAX_ATTEMPTS {
                    return Err(Error::SpawnInfeasible {
                        requested: sim.npc_count,
                        lap_length: track.lap_length,
                        min_gap: sim.min_spawn_gap,
                    });
                }
            };
            let speed = rng.random_range(sim.npc_speed_min..=sim.npc_speed_max);
            vehicles.push(VehicleState {
                id,
                s,
                d: track.lane_center(lane),
                lane,
                speed,
                length: VEHICLE_LENGTH,
                is_ego: false,
                cruise_speed: speed,
            });
        }

        Ok(WorldState {
            time: 0.0,
            track: track.clone(),
            vehicles,
            ego_id: 0,
            active_maneuver: None,
            rng,
        })
    }

    pub fn ego(&self) -> &VehicleState {
        self.vehicles
            .iter()
            .find(|v| v.id == self.ego_id)
            .expect("world always contains the ego vehicle")
    }

    fn ego_index(&self) -> usize {
        self.vehicles
            .iter()
            .position(|v| v.id == self.ego_id)
            .expect("world always contains the ego vehicle")
    }

    /// Plans a minimum-jerk move from the ego's current offset to the
    /// center of `target_lane`.
    ///
    /// The target must be the current lane (degenerate zero-length plan) or
    /// directly adjacent, and no maneuver may be active. Planning does not
    /// mutate the world; use [`WorldState::begin_maneuver`] to commit.
    pub fn plan_lane_change(&self, target_lane: u32) -> Result<ManeuverPlan> {
        if self.active_maneuver.is_some() {
            return Err(Error::ManeuverActive);
        }
        let ego = self.ego();
        let from = ego.lane;
        if target_lane >= self.track.lane_count || target_lane.abs_diff(from) > 1 {
            return Err(Error::InvalidLaneChange {
                from,
                to: target_lane,
            });
        }
        Ok(ManeuverPlan::new(
            self.time,
            from,
            target_lane,
            ego.d,
            self.track.lane_center(target_lane),
        ))
    }

    /// Commits a plan produced by [`WorldState::plan_lane_change`] for the
    /// current time. The ego's `lane` field flips when the maneuver
    /// completes, not when it starts.
    pub fn begin_maneuver(&mut self, plan: ManeuverPlan) -> Result<()> {
        if self.active_maneuver.is_some() {
            return Err(Error::ManeuverActive);
        }
        self.active_maneuver = Some(plan);
        Ok(())
    }

    /// Advances every vehicle by `dt` seconds.
    ///
    /// All accelerations are computed from the pre-step state, then arc
    /// positions advance with the pre-step speeds, then speeds update.
    /// Speeds never drop below zero. The ego's lateral offset follows the
    /// active maneuver profile when one is committed.
    pub fn step(&mut self, dt: f64) -> StepEvents {
        let n = self.vehicles.len();
        let lap = self.track.lap_length;
        let ego_index = self.ego_index();

        // Stable processing order along the loop for leader lookup.
        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let va = &self.vehicles[a];
            let vb = &self.vehicles[b];
            va.s.partial_cmp(&vb.s)
                .expect("arc positions are finite")
                .then(va.id.cmp(&vb.id))
        });
        let mut rank = vec![0usize; n];
        for (pos, &idx) in order.iter().enumerate() {
            rank[idx] = pos;
        }

        // The corridor the ego is moving into, if any.
        let ego_target_d = self
            .active_maneuver
            .as_ref()
            .map(|plan| self.track.lane_center(plan.to_lane));

        let mut accels = vec![0.0f64; n];
        for i in 0..n {
            let me = &self.vehicles[i];
            let lead = self.find_leader(i, &order, rank[i], ego_index, ego_target_d);
            accels[i] = follow_controller(me.speed, lead, me.cruise_speed);
        }

        let mut events = StepEvents::default();

        for i in 0..n {
            let v = &mut self.vehicles[i];
            let advanced = v.s + v.speed * dt;
            if i == ego_index && advanced >= lap {
                events.lap_completed = true;
            }
            v.s = wrap_s(advanced, lap);
            v.speed = (v.speed + accels[i] * dt).max(0.0);
        }

        self.time += dt;

        if let Some(plan) = self.active_maneuver.clone() {
            let t_rel = self.time - plan.start_time;
            let ego = &mut self.vehicles[ego_index];
            if plan.is_complete(t_rel) {
                ego.d = plan.d_end;
                ego.lane = plan.to_lane;
                self.active_maneuver = None;
                events.maneuver_completed = true;
            } else {
                ego.d = plan.offset_at(t_rel);
            }
        }

        events.collision = self.detect_collision();
        events
    }

    /// Nearest vehicle ahead of `i` whose corridor conflicts with vehicle
    /// `i`'s. While the ego is mid-maneuver, other vehicles see its actual
    /// body offset, and the ego itself also reacts to traffic in the lane
    /// it is moving into.
    fn find_leader(
        &self,
        i: usize,
        order: &[usize],
        my_rank: usize,
        ego_index: usize,
        ego_target_d: Option<f64>,
    ) -> Option<Lead> {
        let n = order.len();
        let me = &self.vehicles[i];
        let lap = self.track.lap_length;
        for ahead in 1..n {
            let j = order[(my_rank + ahead) % n];
            let other = &self.vehicles[j];
            let mut conflicts = (other.d - me.d).abs() < LATERAL_NEAR;
            if !conflicts && i == ego_index {
                if let Some(target_d) = ego_target_d {
                    conflicts = (other.d - target_d).abs() < LATERAL_NEAR;
                }
            }
            if !conflicts {
                continue;
            }
            let centers = forward_arc(me.s, other.s, lap);
            if centers == 0.0 {
                continue;
            }
            return Some(Lead {
                clearance: centers - (me.length + other.length) / 2.0,
                speed: other.speed,
            });
        }
        None
    }

    /// Scans for a pair of overlapping bodies: arc centers closer than the
    /// mean of their lengths while laterally within [`LATERAL_NEAR`].
    /// Returns the first such pair found in arc order, ids ascending.
    pub fn detect_collision(&self) -> Option<(u32, u32)> {
        let n = self.vehicles.len();
        if n < 2 {
            return None;
        }
        let lap = self.track.lap_length;
        let max_len = self
            .vehicles
            .iter()
            .map(|v| v.length)
            .fold(f64::MIN, f64::max);

        let mut order: Vec<usize> = (0..n).collect();
        order.sort_by(|&a, &b| {
            let va = &self.vehicles[a];
            let vb = &self.vehicles[b];
            va.s.partial_cmp(&vb.s)
                .expect("arc positions are finite")
                .then(va.id.cmp(&vb.id))
        });

        let check = |ia: usize, ib: usize| -> Option<(u32, u32)> {
            let va = &self.vehicles[ia];
            let vb = &self.vehicles[ib];
            let dist = crate::units::arc_distance(va.s, vb.s, lap);
            if dist < (va.length + vb.length) / 2.0 && (va.d - vb.d).abs() < LATERAL_NEAR {
                Some((va.id.min(vb.id), va.id.max(vb.id)))
            } else {
                None
            }
        };

        // Sweep along the loop; separation within a run only grows, so stop
        // once it exceeds the largest body length.
        for a in 0..n {
            for b in a + 1..n {
                let along = self.vehicles[order[b]].s - self.vehicles[order[a]].s;
                if along >= max_len {
                    break;
                }
                if let Some(hit) = check(order[a], order[b]) {
                    return Some(hit);
                }
            }
        }

        // Pairs that straddle the start line: tail of the sorted run against
        // its head.
        for t in (0..n).rev() {
            let tail_gap = lap - self.vehicles[order[t]].s;
            if tail_gap >= max_len {
                break;
            }
            for h in 0..t {
                let along_wrapped = tail_gap + self.vehicles[order[h]].s;
                if along_wrapped >= max_len {
                    break;
                }
                // Skip pairs the linear sweep already covered.
                if self.vehicles[order[t]].s - self.vehicles[order[h]].s < max_len {
                    continue;
                }
                if let Some(hit) = check(order[h], order[t]) {
                    return Some(hit);
                }
            }
        }
        None
    }

    /// Signed arc distance from the ego to another vehicle (positive means
    /// ahead of the ego).
    pub fn arc_from_ego(&self, other: &VehicleState) -> f64 {
        signed_arc(self.ego().s, other.s, self.track.lap_length)
    }
}

#[cfg(test)]
mod tests;
