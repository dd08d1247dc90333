//! Command-line front end for building models, rendering sequences and
//! benchmarking.

pub mod bench;
pub mod build;
pub mod demo;
pub mod error;
pub mod info;
pub mod render;

pub use bench::{cmd_bench, BenchConfig, BenchLength, BenchMode, BenchReport, FrameSample};
pub use build::{cmd_build, BuildArgs, BuildSource};
pub use error::CliError;
pub use info::{cmd_info, InfoReport, ANIMATION_STATE_BYTES};
pub use render::{cmd_render, parse_size, resolve_threads, RenderConfig, Toggles};
