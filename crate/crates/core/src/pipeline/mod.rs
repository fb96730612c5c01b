//! End-to-end runs: generate, surrogate, dataset, train, report.
//!
//! One [`RunConfig`] describes a run. Every random stage draws from a seed
//! derived from the master seed (see [`crate::rng`]) unless the config pins
//! it explicitly. The resolved config, with all stage seeds filled in, is
//! written as `config.json` next to the outputs, and re-running from that
//! file reproduces every artifact byte for byte.

mod config;
mod stages;

pub use config::{RunConfig, StageSeeds};
pub use stages::{
    build_labeled, generate, read_dataset, read_realizations, run_pipeline, surrogate_stage, write_dataset, write_json, write_json_line,
    write_realizations, write_surrogates, write_training, PairSummary, PipelineOutput, PipelineVerdict,
    SurrogateReport, FILES,
};
