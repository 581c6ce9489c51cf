//! Experiment runner: configuration, seeded campaigns, statistics,
//! parameter sweeps, CSV output and the two illustrative demos.

pub mod campaign;
pub mod config;
pub mod demos;
pub mod emit;
pub mod stats;
pub mod sweep;

pub use campaign::{run_campaign, run_episode, run_seed, Campaign, RunOutcome, RunRecord, SeedFailure};
pub use config::{AgentSpec, ExperimentConfig};
pub use stats::{summarize, welch_t_test, SummaryStats, WelchTest};
