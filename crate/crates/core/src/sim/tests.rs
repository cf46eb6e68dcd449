use super::*;
use crate::error::Error;
use approx::assert_relative_eq;

fn bare_world(vehicles: Vec<VehicleState>) -> WorldState {
    WorldState {
        time: 0.0,
        track: TrackConfig::default(),
        vehicles,
        ego_id: 0,
        active_maneuver: None,
        rng: ChaCha8Rng::seed_from_u64(0),
    }
}

fn car(id: u32, s: f64, lane: u32, speed: f64) -> VehicleState {
    let track = TrackConfig::default();
    VehicleState {
        id,
        s,
        d: track.lane_center(lane),
        lane,
        speed,
        length: VEHICLE_LENGTH,
        is_ego: id == 0,
        cruise_speed: speed,
    }
}

#[test]
fn position_advances_with_pre_step_speed() {
    let mut world = bare_world(vec![car(0, 0.0, 1, 10.0)]);
    world.step(1.0);
    assert_eq!(world.ego().s, 10.0);
    assert_eq!(world.ego().speed, 10.0);
}

#[test]
fn position_wraps_at_the_lap_length() {
    let mut world = bare_world(vec![car(0, 6945.0, 1, 2.0)]);
    let events = world.step(1.0);
    assert_eq!(world.ego().s, 1.0);
    assert!(events.lap_completed);
    // No wrap on the following step.
    let events = world.step(1.0);
    assert!(!events.lap_completed);
}

#[test]
fn speed_never_drops_below_zero() {
    // Slow car squeezed against a stopped leader brakes to a halt instead
    // of reversing.
    let mut world = bare_world(vec![car(0, 0.0, 1, 1.0), car(1, 12.0, 1, 0.0)]);
    world.step(0.5);
    assert_eq!(world.ego().speed, 0.0);
}

#[test]
fn collision_requires_body_overlap() {
    let near = bare_world(vec![car(0, 100.0, 1, 10.0), car(1, 105.4, 1, 10.0)]);
    assert_eq!(near.detect_collision(), Some((0, 1)));

    let exact = bare_world(vec![car(0, 100.0, 1, 10.0), car(1, 105.5, 1, 10.0)]);
    assert_eq!(exact.detect_collision(), None);

    let apart = bare_world(vec![car(0, 100.0, 1, 10.0), car(1, 105.6, 1, 10.0)]);
    assert_eq!(apart.detect_collision(), None);
}

#[test]
fn adjacent_lanes_never_collide() {
    let world = bare_world(vec![car(0, 100.0, 1, 10.0), car(1, 100.0, 2, 10.0)]);
    assert_eq!(world.detect_collision(), None);
}

#[test]
fn collision_detected_across_the_start_line() {
    let world = bare_world(vec![car(0, 6944.0, 1, 10.0), car(1, 1.0, 1, 10.0)]);
    assert_eq!(world.detect_collision(), Some((0, 1)));
}

#[test]
fn mid_maneuver_body_offset_collides_with_target_lane() {
    // The ego halfway between lanes 1 and 2 overlaps a lane-2 car at the
    // same arc position.
    let mut vehicles = vec![car(0, 100.0, 1, 10.0), car(1, 101.0, 2, 10.0)];
    vehicles[0].d = 8.0;
    let world = bare_world(vehicles);
    assert_eq!(world.detect_collision(), Some((0, 1)));
}

#[test]
fn spawn_produces_a_valid_world() {
    let track = TrackConfig::default();
    let sim = SimConfig::default();
    let world = WorldState::spawn(&track, &sim, 7).unwrap();

    assert_eq!(world.vehicles.len(), sim.npc_count as usize + 1);
    assert_eq!(world.vehicles.iter().filter(|v| v.is_ego).count(), 1);

    let ego = world.ego();
    assert_eq!(ego.id, 0);
    assert_eq!(ego.lane, 1);
    assert_eq!(ego.s, 0.0);
    assert_eq!(ego.speed, 0.0);
    assert_relative_eq!(ego.d, track.lane_center(1));

    for v in &world.vehicles {
        assert!((0.0..track.lap_length).contains(&v.s));
        assert_relative_eq!(v.d, track.lane_center(v.lane));
        if !v.is_ego {
            assert!((sim.npc_speed_min..=sim.npc_speed_max).contains(&v.speed));
            assert_eq!(v.speed, v.cruise_speed);
        }
    }

    // Same-lane spawn clearances hold for every pair.
    for a in &world.vehicles {
        for b in &world.vehicles {
            if a.id < b.id && a.lane == b.lane {
                let dist = crate::units::arc_distance(a.s, b.s, track.lap_length);
                assert!(
                    dist >= sim.min_spawn_gap + (a.length + b.length) / 2.0 - 1e-9,
                    "vehicles {} and {} spawned {dist} m apart",
                    a.id,
                    b.id
                );
            }
        }
    }

    assert_eq!(world.detect_collision(), None);
}

#[test]
fn spawn_rejects_impossible_density() {
    let track = TrackConfig {
        lap_length: 1000.0,
        ..TrackConfig::default()
    };
    let sim = SimConfig {
        npc_count: 500,
        ..SimConfig::default()
    };
    match WorldState::spawn(&track, &sim, 0) {
        Err(Error::SpawnInfeasible { requested, .. }) => assert_eq!(requested, 500),
        other => panic!("expected SpawnInfeasible, got {other:?}"),
    }
}

#[test]
fn spawn_is_seed_deterministic() {
    let track = TrackConfig::default();
    let sim = SimConfig::default();
    let a = WorldState::spawn(&track, &sim, 42).unwrap();
    let b = WorldState::spawn(&track, &sim, 42).unwrap();
    assert_eq!(a, b);
    let c = WorldState::spawn(&track, &sim, 43).unwrap();
    assert_ne!(a, c);
}

#[test]
fn stepping_is_deterministic() {
    let track = TrackConfig::default();
    let sim = SimConfig {
        npc_count: 60,
        ..SimConfig::default()
    };
    let mut a = WorldState::spawn(&track, &sim, 11).unwrap();
    let mut b = a.clone();
    for k in 0..500 {
        if k == 50 {
            let plan = a.plan_lane_change(2).unwrap();
            a.begin_maneuver(plan.clone()).unwrap();
            b.begin_maneuver(plan).unwrap();
        }
        let ea = a.step(sim.dt);
        let eb = b.step(sim.dt);
        assert_eq!(ea, eb);
    }
    assert_eq!(a, b);
}

#[test]
fn plan_validates_the_target_lane() {
    let world = WorldState::spawn(&TrackConfig::default(), &SimConfig::default(), 3).unwrap();

    let right = world.plan_lane_change(2).unwrap();
    assert_relative_eq!(right.duration, 2.9, epsilon = 1e-12);
    assert_eq!(right.d_end, 10.0);

    let left = world.plan_lane_change(0).unwrap();
    assert_eq!(left.d_end, 2.0);

    let stay = world.plan_lane_change(1).unwrap();
    assert_eq!(stay.duration, 0.0);

    assert!(matches!(
        world.plan_lane_change(3),
        Err(Error::InvalidLaneChange { from: 1, to: 3 })
    ));
}

#[test]
fn planning_is_blocked_while_a_maneuver_runs() {
    let mut world =
        WorldState::spawn(&TrackConfig::default(), &SimConfig::default(), 3).unwrap();
    let plan = world.plan_lane_change(2).unwrap();
    world.begin_maneuver(plan).unwrap();
    assert!(matches!(
        world.plan_lane_change(0),
        Err(Error::ManeuverActive)
    ));
}

#[test]
fn maneuver_executes_to_the_target_center() {
    let track = TrackConfig::default();
    let sim = SimConfig {
        npc_count: 0,
        ..SimConfig::default()
    };
    let mut world = WorldState::spawn(&track, &sim, 0).unwrap();
    world.vehicles[0].speed = 20.0;

    let plan = world.plan_lane_change(2).unwrap();
    world.begin_maneuver(plan).unwrap();

    let mut steps = 0;
    loop {
        let events = world.step(sim.dt);
        steps += 1;
        if events.maneuver_completed {
            break;
        }
        // The lane label must not flip before completion.
        assert_eq!(world.ego().lane, 1);
        assert!(steps < 100, "maneuver never completed");
    }

    assert_eq!(steps, 29);
    assert_eq!(world.ego().d, track.lane_center(2));
    assert_eq!(world.ego().lane, 2);
    assert!(world.active_maneuver.is_none());
}

#[test]
fn npc_brakes_when_the_ego_cuts_in() {
    // A faster lane-2 car approaches from behind while the ego drifts into
    // its corridor; the car must slow down and avoid contact.
    let mut world = bare_world(vec![car(0, 100.0, 1, 15.0), car(1, 80.0, 2, 20.0)]);
    world.vehicles[0].cruise_speed = 15.0;
    let plan = world.plan_lane_change(2).unwrap();
    world.begin_maneuver(plan).unwrap();

    let mut collided = false;
    while world.active_maneuver.is_some() {
        if world.step(0.1).collision.is_some() {
            collided = true;
            break;
        }
    }
    assert!(!collided, "cut-in caused a collision");
    assert!(
        world.vehicles[1].speed < 19.0,
        "trailing car never braked: {}",
        world.vehicles[1].speed
    );
}

#[test]
fn traffic_flows_without_spontaneous_collisions() {
    let track = TrackConfig::default();
    // Dense traffic stresses the follow controller far harder than the
    // default density does.
    let sim = SimConfig {
        npc_count: 150,
        ..SimConfig::default()
    };
    let mut world = WorldState::spawn(&track, &sim, 99).unwrap();
    for _ in 0..2000 {
        let events = world.step(sim.dt);
        assert_eq!(events.collision, None);
        for v in &world.vehicles {
            assert!(v.speed >= 0.0);
            assert!(v.speed <= track.speed_limit + 1e-9);
            assert!((0.0..track.lap_length).contains(&v.s));
        }
    }
}
