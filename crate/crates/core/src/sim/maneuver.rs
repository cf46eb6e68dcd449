//! Minimum-jerk lateral maneuver profiles.
//!
//! A lane change follows the quintic `d(t) = d0 + dd*(10t^3 - 15t^4 + 6t^5)`
//! in normalized time, which starts and ends with zero lateral velocity and
//! acceleration. The duration is the shortest one that respects the lateral
//! acceleration and jerk limits, rounded up to the simulation tick.

use serde::Serialize;

/// Peak allowed lateral acceleration, m/s^2.
pub const MAX_LATERAL_ACCEL: f64 = 10.0;

/// Peak allowed lateral jerk, m/s^3.
pub const MAX_LATERAL_JERK: f64 = 10.0;

/// Durations are quantized up to this resolution, s.
pub const DURATION_RESOLUTION: f64 = 0.1;

/// A committed lateral trajectory from one lane center to another.
#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct ManeuverPlan {
    /// Simulation time at which the maneuver begins, s.
    pub start_time: f64,
    /// Total maneuver time, s. Zero for a degenerate same-lane plan.
    pub duration: f64,
    pub from_lane: u32,
    pub to_lane: u32,
    /// Lateral offset at the start, m.
    pub d_start: f64,
    /// Lateral offset at the end, m.
    pub d_end: f64,
}

/// Shortest duration that keeps the profile within the acceleration and
/// jerk limits for a lateral displacement of `|delta|` meters, rounded up
/// to [`DURATION_RESOLUTION`].
pub fn minimum_duration(delta: f64) -> f64 {
    let delta = delta.abs();
    if delta == 0.0 {
        return 0.0;
    }
    // Peak |d''| = 10*delta/(sqrt(3)*T^2), peak |d'''| = 60*delta/T^3.
    let t_accel = (10.0 * delta / (3.0_f64.sqrt() * MAX_LATERAL_ACCEL)).sqrt();
    let t_jerk = (60.0 * delta / MAX_LATERAL_JERK).cbrt();
    round_up_to_resolution(t_accel.max(t_jerk))
}

fn round_up_to_resolution(t: f64) -> f64 {
    (t / DURATION_RESOLUTION).ceil() * DURATION_RESOLUTION
}

impl ManeuverPlan {
    /// Builds a plan starting at `start_time` with the limit-respecting
    /// minimal duration.
    pub fn new(start_time: f64, from_lane: u32, to_lane: u32, d_start: f64, d_end: f64) -> Self {
        ManeuverPlan {
            start_time,
            duration: minimum_duration(d_end - d_start),
            from_lane,
            to_lane,
            d_start,
            d_end,
        }
    }

    /// Lateral offset `t` seconds after the start. Clamps to the endpoints
    /// outside `[0, duration]`, and evaluates in normalized time so the
    /// boundary values are exact.
    pub fn offset_at(&self, t: f64) -> f64 {
        if self.duration <= 0.0 {
            return self.d_end;
        }
        let tau = (t / self.duration).clamp(0.0, 1.0);
        let shape = tau * tau * tau * (10.0 + tau * (6.0 * tau - 15.0));
        self.d_start + (self.d_end - self.d_start) * shape
    }

    /// Lateral acceleration `t` seconds after the start.
    pub fn lateral_accel_at(&self, t: f64) -> f64 {
        if self.duration <= 0.0 {
            return 0.0;
        }
        let tau = (t / self.duration).clamp(0.0, 1.0);
        let shape = 60.0 * tau * (1.0 + tau * (2.0 * tau - 3.0));
        (self.d_end - self.d_start) / (self.duration * self.duration) * shape
    }

    /// Lateral jerk `t` seconds after the start.
    pub fn lateral_jerk_at(&self, t: f64) -> f64 {
        if self.duration <= 0.0 {
            return 0.0;
        }
        let tau = (t / self.duration).clamp(0.0, 1.0);
        let shape = 60.0 * (1.0 + tau * (6.0 * tau - 6.0));
        let t3 = self.duration * self.duration * self.duration;
        (self.d_end - self.d_start) / t3 * shape
    }

    /// Whether the maneuver has finished `t` seconds after the start. A
    /// half-tick of slack absorbs accumulated float error in the clock.
    pub fn is_complete(&self, t: f64) -> bool {
        t >= self.duration - 0.5 * DURATION_RESOLUTION
    }
}
