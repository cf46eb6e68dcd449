//! Unit conversions and circular-track distance helpers.

/// Meters per second in one mile per hour.
pub const MPS_PER_MPH: f64 = 0.44704;

pub fn mps_to_mph(v: f64) -> f64 {
    v / MPS_PER_MPH
}

pub fn mph_to_mps(v: f64) -> f64 {
    v * MPS_PER_MPH
}

/// Wraps an arc position onto `[0, lap_length)`.
pub fn wrap_s(s: f64, lap_length: f64) -> f64 {
    let r = s.rem_euclid(lap_length);
    // rem_euclid can return lap_length itself when s is a tiny negative value.
    if r >= lap_length {
        0.0
    } else {
        r
    }
}

/// Signed arc distance from `from` to `to` along the shorter way around the
/// loop, in `[-lap_length/2, lap_length/2)`. Positive means `to` is ahead.
pub fn signed_arc(from: f64, to: f64, lap_length: f64) -> f64 {
    let half = lap_length / 2.0;
    let mut delta = (to - from).rem_euclid(lap_length);
    if delta >= half {
        delta -= lap_length;
    }
    delta
}

/// Shortest absolute arc distance between two positions on the loop.
pub fn arc_distance(a: f64, b: f64, lap_length: f64) -> f64 {
    signed_arc(a, b, lap_length).abs()
}

/// Arc distance traveled going forward from `from` to `to` (always in
/// `[0, lap_length)`).
pub fn forward_arc(from: f64, to: f64, lap_length: f64) -> f64 {
    (to - from).rem_euclid(lap_length)
}
