//! Command-line orchestration for coherence length analysis: synthetic
//! scene generation, the analysis pipeline and its exports.

pub mod error;
pub mod export;
pub mod generate;
pub mod pipeline;

pub use error::CliError;
pub use generate::{Orientation, Scene};
pub use pipeline::{analyze, generate, AnalyzeOptions, ExportFormat, MapKind, Summary};
