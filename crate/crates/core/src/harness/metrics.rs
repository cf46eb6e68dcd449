//! Per-episode metrics as a flat CSV file.

use std::fs::{File, OpenOptions};
use std::io::{BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};

use super::episode::{EpisodeMetrics, Phase};

/// First line of every metrics file.
pub const METRICS_HEADER: &str =
    "episode,phase,lane_changes,collisions,avg_speed_mph,distance_m,return,eps";

/// Appends one row per finished episode, flushing after each so partial runs
/// still leave a readable file.
pub struct MetricsWriter {
    out: BufWriter<File>,
}

impl MetricsWriter {
    /// Creates the file (truncating any previous content) and writes the
    /// header.
    pub fn create(path: &Path) -> Result<MetricsWriter> {
        let file = File::create(path)?;
        let mut out = BufWriter::new(file);
        writeln!(out, "{METRICS_HEADER}")?;
        out.flush()?;
        Ok(MetricsWriter { out })
    }

    /// Opens the file for appending, writing the header only when the file
    /// is new or empty.
    pub fn append(path: &Path) -> Result<MetricsWriter> {
        let file = OpenOptions::new().create(true).append(true).open(path)?;
        let empty = file.metadata()?.len() == 0;
        let mut out = BufWriter::new(file);
        if empty {
            writeln!(out, "{METRICS_HEADER}")?;
        }
        out.flush()?;
        Ok(MetricsWriter { out })
    }

    pub fn write_row(&mut self, m: &EpisodeMetrics) -> Result<()> {
        writeln!(
            self.out,
            "{},{},{},{},{:.6},{:.6},{:.6},{:.6}",
            m.episode,
            m.phase.as_str(),
            m.lane_changes,
            m.collisions,
            m.avg_speed_mph,
            m.distance_m,
            m.discounted_return,
            m.eps
        )?;
        self.out.flush()?;
        Ok(())
    }
}

fn field_error(line: usize, what: &str) -> Error {
    Error::MalformedCsv {
        line,
        reason: what.to_string(),
    }
}

/// Parses a metrics file back into rows, reporting the first malformed line.
pub fn read_metrics(path: &Path) -> Result<Vec<EpisodeMetrics>> {
    let text = std::fs::read_to_string(path)?;
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, header)) if header.trim_end() == METRICS_HEADER => {}
        Some((_, other)) => {
            return Err(field_error(
                1,
                &format!("expected header {METRICS_HEADER:?}, found {other:?}"),
            ))
        }
        None => return Err(field_error(1, "file is empty")),
    }

    let mut rows = Vec::new();
    for (idx, raw) in lines {
        let line = idx + 1;
        let trimmed = raw.trim_end();
        if trimmed.is_empty() {
            continue;
        }
        let fields: Vec<&str> = trimmed.split(',').collect();
        if fields.len() != 8 {
            return Err(field_error(
                line,
                &format!("expected 8 fields, found {}", fields.len()),
            ));
        }
        let episode: u32 = fields[0]
            .parse()
            .map_err(|_| field_error(line, "episode is not an unsigned integer"))?;
        let phase: Phase = fields[1]
            .parse()
            .map_err(|e: String| field_error(line, &e))?;
        let lane_changes: u32 = fields[2]
            .parse()
            .map_err(|_| field_error(line, "lane_changes is not an unsigned integer"))?;
        let collisions: u32 = fields[3]
            .parse()
            .map_err(|_| field_error(line, "collisions is not an unsigned integer"))?;
        let numeric = |i: usize, name: &str| -> Result<f64> {
            let value: f64 = fields[i]
                .parse()
                .map_err(|_| field_error(line, &format!("{name} is not a number")))?;
            if !value.is_finite() {
                return Err(field_error(line, &format!("{name} is not finite")));
            }
            Ok(value)
        };
        rows.push(EpisodeMetrics {
            episode,
            phase,
            lane_changes,
            collisions,
            avg_speed_mph: numeric(4, "avg_speed_mph")?,
            distance_m: numeric(5, "distance_m")?,
            discounted_return: numeric(6, "return")?,
            eps: numeric(7, "eps")?,
        });
    }
    Ok(rows)
}
