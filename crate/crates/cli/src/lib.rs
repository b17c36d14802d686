//! Configuration parsing, the report pipeline and report types behind the
//! `diagnef` binary.

pub mod config;
pub mod pipeline;
pub mod report;

pub use config::{Config, ConfigError};
pub use pipeline::{run_characterize, PipelineError, RunOptions};
pub use report::{PipelineReport, Status};
