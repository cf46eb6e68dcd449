//! Independent reference implementations the integration tests check the
//! library against. Everything here recomputes results from first
//! principles instead of calling the code under test.

use lanechange_core::encoder::{normalize_speed, EncoderConfig, GRID_COLS, GRID_ROWS};
use lanechange_core::sim::{ManeuverPlan, WorldState, LATERAL_NEAR};

/// Small deterministic MDP with tabular dynamics.
pub struct TabularMdp {
    pub n_states: usize,
    pub n_actions: usize,
    /// next[s][a]
    pub next: Vec<Vec<usize>>,
    /// reward[s][a]
    pub reward: Vec<Vec<f64>>,
}

impl TabularMdp {
    /// Optimal policy by value iteration, run to a tight fixed point.
    pub fn optimal_policy(&self, gamma: f64) -> Vec<usize> {
        assert!(gamma < 1.0);
        let mut v = vec![0.0; self.n_states];
        for _ in 0..100_000 {
            let mut next_v = vec![0.0; self.n_states];
            let mut delta = 0.0f64;
            for s in 0..self.n_states {
                next_v[s] = (0..self.n_actions)
                    .map(|a| self.reward[s][a] + gamma * v[self.next[s][a]])
                    .fold(f64::NEG_INFINITY, f64::max);
                delta = delta.max((next_v[s] - v[s]).abs());
            }
            v = next_v;
            if delta < 1e-13 {
                break;
            }
        }
        (0..self.n_states)
            .map(|s| {
                (0..self.n_actions)
                    .map(|a| self.reward[s][a] + gamma * v[self.next[s][a]])
                    .enumerate()
                    .max_by(|a, b| a.1.partial_cmp(&b.1).expect("finite values"))
                    .expect("at least one action")
                    .0
            })
            .collect()
    }
}

fn wrap_center(delta: f64, lap: f64) -> f64 {
    let mut rel = delta % lap;
    if rel < -lap / 2.0 {
        rel += lap;
    } else if rel >= lap / 2.0 {
        rel -= lap;
    }
    rel
}

/// Plays the proposed maneuver out with every vehicle holding its speed and
/// lane, the ego's lateral offset following the plan. Returns the id of the
/// first vehicle whose body actually overlaps the ego's, with the sample
/// time, checking every `dt` from 0 through the maneuver end.
pub fn rollout_collision(
    world: &WorldState,
    plan: &ManeuverPlan,
    dt: f64,
) -> Option<(u32, f64)> {
    let ego = world.ego();
    let lap = world.track.lap_length;
    let steps = (plan.duration / dt).ceil() as usize;
    for k in 0..=steps {
        let t = (k as f64 * dt).min(plan.duration);
        let ego_s = ego.s + ego.speed * t;
        let ego_d = plan.offset_at(t);
        for v in world.vehicles.iter().filter(|v| !v.is_ego) {
            let rel = wrap_center(v.s + v.speed * t - ego_s, lap);
            let touching = rel.abs() < (ego.length + v.length) / 2.0;
            if touching && (ego_d - v.d).abs() < LATERAL_NEAR {
                return Some((v.id, t));
            }
        }
    }
    None
}

/// Grid marking recomputed cell by cell: for every cell, scan all vehicles
/// and test interval overlap directly.
pub fn naive_grid(world: &WorldState, cfg: &EncoderConfig) -> Vec<f64> {
    let ego = world.ego();
    let lap = world.track.lap_length;
    let mut grid = vec![1.0; GRID_ROWS * GRID_COLS];
    for row in 0..GRID_ROWS {
        let row_hi = cfg.range_ahead - cfg.row_span * row as f64;
        let row_lo = row_hi - cfg.row_span;
        for col in 0..GRID_COLS {
            let mut value = 1.0;
            // NPC passes first, ego second, so the ego wins shared cells.
            for pass in 0..2 {
                for v in world.vehicles.iter().filter(|v| v.is_ego == (pass == 1)) {
                    if v.lane as usize != col {
                        continue;
                    }
                    let rel = wrap_center(v.s - ego.s, lap);
                    if rel < -cfg.range_behind || rel > cfg.range_ahead {
                        continue;
                    }
                    let lo = rel - v.length / 2.0;
                    let hi = rel + v.length / 2.0;
                    if lo < row_hi && hi > row_lo {
                        let speed = normalize_speed(v.speed, cfg.speed_min, cfg.speed_max);
                        value = if v.is_ego { speed } else { -speed };
                    }
                }
            }
            grid[row * GRID_COLS + col] = value;
        }
    }
    grid
}
