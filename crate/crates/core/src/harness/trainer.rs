//! Full training and evaluation runs over many episodes.

use std::fs;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::config::AppConfig;
use crate::dqn::{checkpoint, Checkpoint, Learner, NetDims};
use crate::encoder::{AUX_LEN, GRID_COLS, GRID_ROWS};
use crate::error::{Error, Result};
use crate::seeds::{derive_seed, stream};

use super::episode::{run_episode, EpisodeMetrics, EpisodeSettings, Phase};
use super::metrics::MetricsWriter;
use super::trace::TraceWriter;

/// Aggregate results of a greedy evaluation, also written as summary.json.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunSummary {
    /// "rule_based_dqn" when the filter screened actions, "dqn" otherwise.
    pub method: String,
    pub episodes: u32,
    pub avg_speed_mph: f64,
    pub avg_lane_changes: f64,
    /// Fraction of episodes that ended without a collision.
    pub safety_rate: f64,
}

/// Label for a policy variant based on whether the filter is active.
pub fn method_name(filter_enabled: bool) -> &'static str {
    if filter_enabled {
        "rule_based_dqn"
    } else {
        "dqn"
    }
}

/// Averages evaluation rows into a summary.
pub fn summarize(rows: &[EpisodeMetrics], method: &str) -> Result<RunSummary> {
    if rows.is_empty() {
        return Err(Error::NoEpisodes);
    }
    let n = rows.len() as f64;
    let collided = rows.iter().filter(|m| m.collisions > 0).count() as f64;
    Ok(RunSummary {
        method: method.to_string(),
        episodes: rows.len() as u32,
        avg_speed_mph: rows.iter().map(|m| m.avg_speed_mph).sum::<f64>() / n,
        avg_lane_changes: rows.iter().map(|m| f64::from(m.lane_changes)).sum::<f64>() / n,
        safety_rate: 1.0 - collided / n,
    })
}

fn ensure_encoder_compatible(dims: &NetDims) -> Result<()> {
    if dims.grid_h != GRID_ROWS || dims.grid_w != GRID_COLS || dims.aux_len != AUX_LEN {
        return Err(Error::Checkpoint(format!(
            "network input is {}x{} grid with {} extras, the encoder produces {}x{} with {}",
            dims.grid_h, dims.grid_w, dims.aux_len, GRID_ROWS, GRID_COLS, AUX_LEN
        )));
    }
    Ok(())
}

fn load_compatible(path: &Path) -> Result<Checkpoint> {
    let ckpt = checkpoint::load(path)?;
    ensure_encoder_compatible(&ckpt.dims)?;
    Ok(ckpt)
}

fn write_summary(path: &Path, summary: &RunSummary) -> Result<()> {
    let json = serde_json::to_string_pretty(summary)
        .expect("summary serialization cannot fail");
    fs::write(path, json + "\n")?;
    Ok(())
}

pub struct TrainSettings<'a> {
    pub cfg: &'a AppConfig,
    pub out_dir: &'a Path,
    /// Master seed; every stochastic stream in the run derives from it.
    pub seed: u64,
    /// Overrides `run.episodes` when set.
    pub episodes: Option<u32>,
    pub filter_enabled: bool,
    /// Continue from this checkpoint instead of fresh weights.
    pub resume_from: Option<&'a Path>,
    /// Write a JSONL trace per episode.
    pub trace: bool,
}

pub struct TrainOutcome {
    pub checkpoint: PathBuf,
    pub metrics: PathBuf,
    /// Present when at least one evaluation episode ran.
    pub summary: Option<RunSummary>,
}

/// Trains for the configured number of episodes, then evaluates greedily.
///
/// Writes metrics.csv (train rows followed by eval rows), checkpoint.bin
/// (periodically and at the end), and summary.json into `out_dir`. Resuming
/// appends to an existing metrics.csv and continues the episode numbering
/// the checkpoint recorded.
pub fn train(settings: &TrainSettings) -> Result<TrainOutcome> {
    let cfg = settings.cfg;
    cfg.validate()?;
    fs::create_dir_all(settings.out_dir)?;

    let mut learner = match settings.resume_from {
        Some(path) => Learner::from_checkpoint(load_compatible(path)?, settings.seed),
        None => Learner::new(cfg.train.clone(), settings.seed),
    };

    let metrics_path = settings.out_dir.join("metrics.csv");
    let checkpoint_path = settings.out_dir.join("checkpoint.bin");
    let resuming = settings.resume_from.is_some();
    let mut metrics = if resuming {
        MetricsWriter::append(&metrics_path)?
    } else {
        MetricsWriter::create(&metrics_path)?
    };

    let episodes = settings.episodes.unwrap_or(cfg.run.episodes);
    let first = learner.episodes_done;
    for offset in 0..episodes {
        let index = first + offset;
        let episode_seed = derive_seed(settings.seed, stream::TRAIN_EPISODE, u64::from(index));
        let mut trace = if settings.trace {
            let path = settings.out_dir.join(format!("trace_train_{index:04}.jsonl"));
            Some(TraceWriter::create(&path)?)
        } else {
            None
        };
        let row = run_episode(
            &EpisodeSettings {
                cfg,
                phase: Phase::Train,
                filter_enabled: settings.filter_enabled,
                episode: index,
                seed: episode_seed,
            },
            &mut learner,
            trace.as_mut(),
        )?;
        if let Some(tr) = trace {
            tr.finish()?;
        }
        learner.episodes_done = index + 1;
        metrics.write_row(&row)?;
        println!(
            "train episode {index}: changes {} collisions {} speed {:.1} mph return {:.2} eps {:.3}",
            row.lane_changes, row.collisions, row.avg_speed_mph, row.discounted_return, row.eps
        );
        if cfg.run.checkpoint_every > 0 && (index + 1) % cfg.run.checkpoint_every == 0 {
            checkpoint::save(&checkpoint_path, &learner.to_checkpoint())?;
        }
    }
    checkpoint::save(&checkpoint_path, &learner.to_checkpoint())?;

    let mut eval_rows = Vec::new();
    for index in 0..cfg.run.eval_episodes {
        let episode_seed = derive_seed(settings.seed, stream::EVAL_EPISODE, u64::from(index));
        let mut trace = if settings.trace {
            let path = settings.out_dir.join(format!("trace_eval_{index:04}.jsonl"));
            Some(TraceWriter::create(&path)?)
        } else {
            None
        };
        let row = run_episode(
            &EpisodeSettings {
                cfg,
                phase: Phase::Eval,
                filter_enabled: settings.filter_enabled,
                episode: index,
                seed: episode_seed,
            },
            &mut learner,
            trace.as_mut(),
        )?;
        if let Some(tr) = trace {
            tr.finish()?;
        }
        metrics.write_row(&row)?;
        println!(
            "eval episode {index}: changes {} collisions {} speed {:.1} mph",
            row.lane_changes, row.collisions, row.avg_speed_mph
        );
        eval_rows.push(row);
    }

    let summary = if eval_rows.is_empty() {
        None
    } else {
        let summary = summarize(&eval_rows, method_name(settings.filter_enabled))?;
        write_summary(&settings.out_dir.join("summary.json"), &summary)?;
        Some(summary)
    };

    Ok(TrainOutcome {
        checkpoint: checkpoint_path,
        metrics: metrics_path,
        summary,
    })
}

pub struct EvalSettings<'a> {
    pub cfg: &'a AppConfig,
    pub checkpoint: &'a Path,
    pub episodes: u32,
    pub filter_enabled: bool,
    /// Master seed for the evaluation episode stream.
    pub seed: u64,
    /// When set, metrics.csv and summary.json (and traces) are written here.
    pub out_dir: Option<&'a Path>,
    pub trace: bool,
}

/// Evaluates a checkpoint greedily on freshly seeded episodes.
pub fn evaluate(settings: &EvalSettings) -> Result<(RunSummary, Vec<EpisodeMetrics>)> {
    let cfg = settings.cfg;
    cfg.validate()?;
    if settings.episodes == 0 {
        return Err(Error::NoEpisodes);
    }
    if settings.trace && settings.out_dir.is_none() {
        return Err(Error::InvalidConfig(
            "tracing an evaluation requires an output directory".into(),
        ));
    }
    let mut learner = Learner::from_checkpoint(load_compatible(settings.checkpoint)?, settings.seed);

    if let Some(dir) = settings.out_dir {
        fs::create_dir_all(dir)?;
    }
    let mut metrics = match settings.out_dir {
        Some(dir) => Some(MetricsWriter::create(&dir.join("metrics.csv"))?),
        None => None,
    };

    let mut rows = Vec::new();
    for index in 0..settings.episodes {
        let episode_seed = derive_seed(settings.seed, stream::EVAL_EPISODE, u64::from(index));
        let mut trace = match settings.out_dir {
            Some(dir) if settings.trace => {
                let path = dir.join(format!("trace_eval_{index:04}.jsonl"));
                Some(TraceWriter::create(&path)?)
            }
            _ => None,
        };
        let row = run_episode(
            &EpisodeSettings {
                cfg,
                phase: Phase::Eval,
                filter_enabled: settings.filter_enabled,
                episode: index,
                seed: episode_seed,
            },
            &mut learner,
            trace.as_mut(),
        )?;
        if let Some(tr) = trace {
            tr.finish()?;
        }
        if let Some(w) = metrics.as_mut() {
            w.write_row(&row)?;
        }
        rows.push(row);
    }

    let summary = summarize(&rows, method_name(settings.filter_enabled))?;
    if let Some(dir) = settings.out_dir {
        write_summary(&dir.join("summary.json"), &summary)?;
    }
    Ok((summary, rows))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::harness::metrics::read_metrics;

    fn tiny_cfg() -> AppConfig {
        let mut cfg = AppConfig::default();
        cfg.sim.npc_count = 10;
        cfg.sim.max_episode_time = 12.0;
        cfg.run.episodes = 3;
        cfg.run.eval_episodes = 2;
        cfg.run.checkpoint_every = 2;
        cfg.train.batch_size = 4;
        cfg
    }

    #[test]
    fn train_writes_metrics_checkpoint_and_summary() {
        let cfg = tiny_cfg();
        let dir = tempfile::tempdir().unwrap();
        let outcome = train(&TrainSettings {
            cfg: &cfg,
            out_dir: dir.path(),
            seed: 11,
            episodes: None,
            filter_enabled: true,
            resume_from: None,
            trace: false,
        })
        .unwrap();
        assert!(outcome.checkpoint.exists());
        let rows = read_metrics(&outcome.metrics).unwrap();
        let train_rows = rows.iter().filter(|m| m.phase == Phase::Train).count();
        let eval_rows = rows.iter().filter(|m| m.phase == Phase::Eval).count();
        assert_eq!(train_rows, 3);
        assert_eq!(eval_rows, 2);
        let summary = outcome.summary.unwrap();
        assert_eq!(summary.method, "rule_based_dqn");
        assert_eq!(summary.episodes, 2);
        let written: RunSummary = serde_json::from_str(
            &std::fs::read_to_string(dir.path().join("summary.json")).unwrap(),
        )
        .unwrap();
        assert_eq!(written, summary);
    }

    #[test]
    fn resume_continues_episode_numbering_and_appends() {
        let cfg = tiny_cfg();
        let dir = tempfile::tempdir().unwrap();
        let first = train(&TrainSettings {
            cfg: &cfg,
            out_dir: dir.path(),
            seed: 11,
            episodes: Some(2),
            filter_enabled: true,
            resume_from: None,
            trace: false,
        })
        .unwrap();
        let ckpt = first.checkpoint.clone();
        train(&TrainSettings {
            cfg: &cfg,
            out_dir: dir.path(),
            seed: 11,
            episodes: Some(2),
            filter_enabled: true,
            resume_from: Some(&ckpt),
            trace: false,
        })
        .unwrap();
        let rows = read_metrics(&dir.path().join("metrics.csv")).unwrap();
        let train_indices: Vec<u32> = rows
            .iter()
            .filter(|m| m.phase == Phase::Train)
            .map(|m| m.episode)
            .collect();
        assert_eq!(train_indices, vec![0, 1, 2, 3]);
        let eval_indices: Vec<u32> = rows
            .iter()
            .filter(|m| m.phase == Phase::Eval)
            .map(|m| m.episode)
            .collect();
        assert_eq!(eval_indices, vec![0, 1, 0, 1]);
    }

    #[test]
    fn evaluate_matches_the_same_seeds_across_runs() {
        let cfg = tiny_cfg();
        let dir = tempfile::tempdir().unwrap();
        let outcome = train(&TrainSettings {
            cfg: &cfg,
            out_dir: dir.path(),
            seed: 11,
            episodes: Some(1),
            filter_enabled: true,
            resume_from: None,
            trace: false,
        })
        .unwrap();
        let settings = EvalSettings {
            cfg: &cfg,
            checkpoint: &outcome.checkpoint,
            episodes: 2,
            filter_enabled: true,
            seed: 40,
            out_dir: None,
            trace: false,
        };
        let (a, rows_a) = evaluate(&settings).unwrap();
        let (b, rows_b) = evaluate(&settings).unwrap();
        assert_eq!(a, b);
        assert_eq!(rows_a, rows_b);
        assert_eq!(a.method, "rule_based_dqn");
    }

    #[test]
    fn evaluate_rejects_zero_episodes() {
        let cfg = tiny_cfg();
        let dir = tempfile::tempdir().unwrap();
        let outcome = train(&TrainSettings {
            cfg: &cfg,
            out_dir: dir.path(),
            seed: 11,
            episodes: Some(1),
            filter_enabled: true,
            resume_from: None,
            trace: false,
        })
        .unwrap();
        let err = evaluate(&EvalSettings {
            cfg: &cfg,
            checkpoint: &outcome.checkpoint,
            episodes: 0,
            filter_enabled: true,
            seed: 40,
            out_dir: None,
            trace: false,
        })
        .unwrap_err();
        assert!(matches!(err, Error::NoEpisodes));
    }

    #[test]
    fn trace_files_appear_when_requested() {
        let mut cfg = tiny_cfg();
        cfg.run.episodes = 1;
        cfg.run.eval_episodes = 1;
        cfg.sim.max_episode_time = 5.0;
        let dir = tempfile::tempdir().unwrap();
        train(&TrainSettings {
            cfg: &cfg,
            out_dir: dir.path(),
            seed: 11,
            episodes: None,
            filter_enabled: true,
            resume_from: None,
            trace: true,
        })
        .unwrap();
        assert!(dir.path().join("trace_train_0000.jsonl").exists());
        assert!(dir.path().join("trace_eval_0000.jsonl").exists());
    }
}
