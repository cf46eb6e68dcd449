//! Optional JSONL episode traces for offline inspection.
//!
//! Each line is one JSON record: a `step` record captures every vehicle pose
//! after an integration step, a `decision` record captures what the policy
//! proposed, what the filter said, and what actually ran.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use serde::Serialize;

use crate::error::Result;
use crate::safety::Verdict;
use crate::sim::{Action, StepEvents, WorldState};

/// Vehicle snapshot as a compact tuple: id, s, d, lane, speed.
type VehicleTuple = (u32, f64, f64, u32, f64);

#[derive(Serialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
enum Record {
    Step {
        time: f64,
        vehicles: Vec<VehicleTuple>,
        #[serde(skip_serializing_if = "Option::is_none")]
        collision: Option<(u32, u32)>,
        #[serde(skip_serializing_if = "std::ops::Not::not")]
        maneuver_completed: bool,
        #[serde(skip_serializing_if = "std::ops::Not::not")]
        lap_completed: bool,
    },
    Decision {
        time: f64,
        proposed: Action,
        #[serde(skip_serializing_if = "Option::is_none")]
        verdict: Option<Verdict>,
        executed: Action,
        reward: f64,
        eps: f64,
    },
}

pub struct TraceWriter {
    out: BufWriter<File>,
}

impl TraceWriter {
    pub fn create(path: &Path) -> Result<TraceWriter> {
        Ok(TraceWriter {
            out: BufWriter::new(File::create(path)?),
        })
    }

    fn write(&mut self, record: &Record) -> Result<()> {
        let line = serde_json::to_string(record)
            .expect("trace records contain only serializable primitives");
        writeln!(self.out, "{line}")?;
        Ok(())
    }

    /// Records the world after one integration step.
    pub fn step(&mut self, world: &WorldState, events: &StepEvents) -> Result<()> {
        let vehicles = world
            .vehicles
            .iter()
            .map(|v| (v.id, v.s, v.d, v.lane, v.speed))
            .collect();
        self.write(&Record::Step {
            time: world.time,
            vehicles,
            collision: events.collision,
            maneuver_completed: events.maneuver_completed,
            lap_completed: events.lap_completed,
        })
    }

    /// Records one decision with its outcome.
    pub fn decision(
        &mut self,
        time: f64,
        proposed: Action,
        verdict: Option<Verdict>,
        executed: Action,
        reward: f64,
        eps: f64,
    ) -> Result<()> {
        self.write(&Record::Decision {
            time,
            proposed,
            verdict,
            executed,
            reward,
            eps,
        })
    }

    pub fn finish(mut self) -> Result<()> {
        self.out.flush()?;
        Ok(())
    }
}
