//! One simulated episode driven by the learner's policy.
//!
//! The agent decides at a coarser cadence than the simulator integrates: a
//! kept lane holds for [`KEEP_LANE_PERIOD`], an accepted lane change holds
//! until the maneuver completes. Each decision yields one reward and one
//! replay transition.

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::config::AppConfig;
use crate::dqn::{select_action, Learner, Transition};
use crate::encoder::encode;
use crate::error::Result;
use crate::reward::{compute_reward, leader_within, DecisionOutcome};
use crate::safety::{check_plan, Verdict};
use crate::seeds::{derive_seed, stream};
use crate::sim::{Action, WorldState};
use crate::units::mps_to_mph;

use super::trace::TraceWriter;

/// How long a keep-lane decision is held before the next one, s.
pub const KEEP_LANE_PERIOD: f64 = 1.0;

/// Whether an episode trains the network or only measures it.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Phase {
    Train,
    Eval,
}

impl Phase {
    pub fn as_str(self) -> &'static str {
        match self {
            Phase::Train => "train",
            Phase::Eval => "eval",
        }
    }
}

impl std::str::FromStr for Phase {
    type Err = String;

    fn from_str(s: &str) -> std::result::Result<Phase, String> {
        match s {
            "train" => Ok(Phase::Train),
            "eval" => Ok(Phase::Eval),
            other => Err(format!("unknown phase {other:?}")),
        }
    }
}

/// Per-episode aggregates, one CSV row.
#[derive(Clone, Debug, PartialEq)]
pub struct EpisodeMetrics {
    pub episode: u32,
    pub phase: Phase,
    /// Lane changes actually begun (vetoed proposals do not count).
    pub lane_changes: u32,
    /// 1 when the episode ended in a collision.
    pub collisions: u32,
    /// Distance over elapsed time for the whole episode, mph.
    pub avg_speed_mph: f64,
    /// Total arc distance covered by the ego, m.
    pub distance_m: f64,
    /// Discounted sum of decision rewards.
    pub discounted_return: f64,
    /// Exploration rate after the episode (0 for eval rows).
    pub eps: f64,
}

pub struct EpisodeSettings<'a> {
    pub cfg: &'a AppConfig,
    pub phase: Phase,
    /// When false, proposed lane changes skip the trajectory check.
    pub filter_enabled: bool,
    /// Index recorded in the metrics row.
    pub episode: u32,
    /// Episode seed; spawning and action exploration derive from it.
    pub seed: u64,
}

/// Runs one episode to collision, lap completion, or the time cap.
///
/// Training episodes push one transition per decision and take one gradient
/// step after each; eval episodes act greedily and leave the learner
/// untouched. A vetoed lane change executes as keep-lane but is stored and
/// rewarded as the action the policy proposed, so the network still learns
/// the value of proposals the filter refuses.
pub fn run_episode(
    settings: &EpisodeSettings,
    learner: &mut Learner,
    mut trace: Option<&mut TraceWriter>,
) -> Result<EpisodeMetrics> {
    let cfg = settings.cfg;
    let mut world = WorldState::spawn(&cfg.track, &cfg.sim, settings.seed)?;
    let mut action_rng = ChaCha8Rng::seed_from_u64(derive_seed(settings.seed, stream::ACTIONS, 0));
    let gamma = learner.cfg.gamma;
    let dt = cfg.sim.dt;

    let mut lane_changes = 0u32;
    let mut collided = false;
    let mut lap_done = false;
    let mut distance = 0.0f64;
    let mut discounted_return = 0.0f64;
    let mut discount = 1.0f64;

    while !collided && !lap_done && world.time < cfg.sim.max_episode_time {
        let state = encode(&world, &cfg.encoder);
        let q = learner.q_values(&state);
        let eps = match settings.phase {
            Phase::Train => learner.eps,
            Phase::Eval => 0.0,
        };
        let proposed = select_action(&q, eps, &mut action_rng);

        let ego_lane = world.ego().lane;
        let mut outcome = DecisionOutcome::default();
        let mut plan = None;
        let mut verdict = None;
        if proposed != Action::KeepLane {
            let target = match proposed {
                Action::ChangeRight => (ego_lane + 1 < cfg.track.lane_count).then_some(ego_lane + 1),
                Action::ChangeLeft => ego_lane.checked_sub(1),
                Action::KeepLane => unreachable!(),
            };
            match target {
                None => outcome.attempted_offroad = true,
                Some(to) => {
                    let candidate = world.plan_lane_change(to)?;
                    let v = if settings.filter_enabled {
                        check_plan(&world, &candidate, &cfg.safety)
                    } else {
                        Verdict::Accepted
                    };
                    if v.is_accepted() {
                        outcome.changed_lanes = true;
                        outcome.change_had_leader =
                            leader_within(&world, cfg.reward.leader_lookahead).is_some();
                        plan = Some(candidate);
                    }
                    verdict = Some(v);
                }
            }
        }

        let decision_time = world.time;
        let executed = match plan {
            Some(p) => {
                world.begin_maneuver(p)?;
                lane_changes += 1;
                proposed
            }
            None => Action::KeepLane,
        };

        let mut period_distance = 0.0f64;
        let mut period_time = 0.0f64;
        loop {
            let pre_speed = world.ego().speed;
            let events = world.step(dt);
            distance += pre_speed * dt;
            period_distance += pre_speed * dt;
            period_time += dt;
            if let Some(tr) = trace.as_deref_mut() {
                tr.step(&world, &events)?;
            }
            if events.collision.is_some() {
                collided = true;
            }
            if events.lap_completed {
                lap_done = true;
            }
            if collided || lap_done || world.time >= cfg.sim.max_episode_time {
                break;
            }
            let period_over = match executed {
                Action::KeepLane => period_time >= KEEP_LANE_PERIOD - 1e-9,
                _ => world.active_maneuver.is_none(),
            };
            if period_over {
                break;
            }
        }

        outcome.collided = collided;
        outcome.avg_speed_mph = if period_time > 0.0 {
            mps_to_mph(period_distance / period_time)
        } else {
            0.0
        };
        let reward = compute_reward(&outcome, &cfg.reward);
        discounted_return += discount * reward;
        discount *= gamma;

        if settings.phase == Phase::Train {
            let next_state = encode(&world, &cfg.encoder);
            learner.record(Transition {
                state,
                action: proposed,
                reward,
                next_state,
                terminal: collided,
            });
            learner.train_step()?;
            learner.decay_exploration();
        }
        if let Some(tr) = trace.as_deref_mut() {
            tr.decision(decision_time, proposed, verdict, executed, reward, eps)?;
        }
    }

    let avg_speed_mph = if world.time > 0.0 {
        mps_to_mph(distance / world.time)
    } else {
        0.0
    };
    Ok(EpisodeMetrics {
        episode: settings.episode,
        phase: settings.phase,
        lane_changes,
        collisions: collided as u32,
        avg_speed_mph,
        distance_m: distance,
        discounted_return,
        eps: match settings.phase {
            Phase::Train => learner.eps,
            Phase::Eval => 0.0,
        },
    })
}
