//! Pipeline orchestration behind the `ombudsman` command.

pub mod backends;
pub mod config;
pub mod pipeline;

pub use config::{load_config, parse_config, ConfigError, PipelineConfig};
pub use pipeline::{parse_stages, run_pipeline, PipelineError, RunManifest, Stage, StageRecord};
