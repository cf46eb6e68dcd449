//! Longitudinal speed-and-gap controller shared by the ego vehicle and NPCs.
//!
//! Every vehicle tries to hold its own cruise speed and, when a slower
//! vehicle blocks the lane, regulates toward a speed-dependent safe gap.

/// Acceleration command saturation, m/s^2.
pub const MAX_ACCEL: f64 = 10.0;

/// Constant term of the safe following gap, m.
pub const SAFE_GAP_BASE: f64 = 10.0;

/// Speed-proportional term of the safe following gap, s.
pub const SAFE_GAP_HEADWAY: f64 = 1.0;

/// Gain on the speed error toward the cruise target, 1/s.
pub const K_FREE: f64 = 0.5;

/// Gain on the gap error behind a leader, 1/s^2.
pub const K_GAP: f64 = 0.25;

/// Gain on the closing speed behind a leader, 1/s.
pub const K_CLOSE: f64 = 1.0;

/// The vehicle directly ahead in the follower's corridor.
#[derive(Clone, Copy, Debug)]
pub struct Lead {
    /// Bumper-to-bumper clearance, m. May be negative when bodies overlap.
    pub clearance: f64,
    /// Leader speed, m/s.
    pub speed: f64,
}

/// Bumper-to-bumper gap a follower tries to keep at the given speed.
pub fn safe_gap(speed: f64) -> f64 {
    SAFE_GAP_BASE + SAFE_GAP_HEADWAY * speed
}

/// Acceleration command for one vehicle.
///
/// With no leader the command relaxes the speed toward `cruise`. Behind a
/// leader it is the more conservative of that and a gap-plus-closing-speed
/// regulator, so a slow leader always wins over the cruise target. The
/// result is clamped to `[-MAX_ACCEL, MAX_ACCEL]`.
pub fn follow_controller(speed: f64, lead: Option<Lead>, cruise: f64) -> f64 {
    let free = K_FREE * (cruise - speed);
    let cmd = match lead {
        None => free,
        Some(lead) => {
            let follow =
                K_GAP * (lead.clearance - safe_gap(speed)) + K_CLOSE * (lead.speed - speed);
            free.min(follow)
        }
    };
    cmd.clamp(-MAX_ACCEL, MAX_ACCEL)
}
