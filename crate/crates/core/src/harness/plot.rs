//! Converts a metrics file into plain two-column data files, one point per
//! line, ready for gnuplot or any other plotting tool.

use std::fs;
use std::io::Write as _;
use std::path::{Path, PathBuf};

use crate::error::Result;

use super::episode::Phase;
use super::metrics::read_metrics;

/// Writes lane_changes_train.dat and lane_changes_eval.dat into `out_dir`,
/// each line `episode lane_changes`. Warns on stderr when the metrics file
/// has a valid header but no rows.
pub fn emit_plot_data(metrics: &Path, out_dir: &Path) -> Result<[PathBuf; 2]> {
    let rows = read_metrics(metrics)?;
    fs::create_dir_all(out_dir)?;
    if rows.is_empty() {
        eprintln!("warning: {} has no data rows", metrics.display());
    }

    let emit = |phase: Phase, name: &str| -> Result<PathBuf> {
        let path = out_dir.join(name);
        let mut body = Vec::new();
        for row in rows.iter().filter(|m| m.phase == phase) {
            writeln!(body, "{} {}", row.episode, row.lane_changes)?;
        }
        fs::write(&path, body)?;
        Ok(path)
    };

    let train = emit(Phase::Train, "lane_changes_train.dat")?;
    let eval = emit(Phase::Eval, "lane_changes_eval.dat")?;
    Ok([train, eval])
}
