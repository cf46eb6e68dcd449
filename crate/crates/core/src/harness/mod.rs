//! Training and evaluation harness: the decision loop gluing simulator,
//! encoder, reward, safety filter, and learner together, plus metrics
//! output, checkpointing cadence, trace export, and plot-data emission.

pub mod episode;
pub mod metrics;
pub mod plot;
pub mod trace;
pub mod trainer;

pub use episode::{run_episode, EpisodeMetrics, EpisodeSettings, Phase, KEEP_LANE_PERIOD};
pub use metrics::{read_metrics, MetricsWriter, METRICS_HEADER};
pub use plot::emit_plot_data;
pub use trace::TraceWriter;
pub use trainer::{
    evaluate, method_name, summarize, train, EvalSettings, RunSummary, TrainOutcome,
    TrainSettings,
};
