//! Protocol runner, stride logging, metrics and parameter sweeps.

pub mod config;
pub mod log;
pub mod metrics;
pub mod protocol;

pub use config::{ProtocolSpec, RunConfig, SessionMode, SessionSpec};
pub use log::StrideRow;
pub use metrics::{compute_metrics, SummaryMetrics};
pub use protocol::{
    run_protocol, run_seeds, summary_from_dir, sweep, RunOutput, Summary, SweepAxis, SweepCell,
    CONFIG_FILE, STRIDES_FILE, SUMMARY_FILE,
};
