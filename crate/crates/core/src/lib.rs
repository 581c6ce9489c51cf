//! Neuromorphic reinforcement learning from real-valued observations.
//!
//! Observations are partitioned online by adaptive-threshold
//! winner-take-all clustering layers ([`clustering`]); the single active
//! hidden neuron feeds a trace-based actor-critic ([`actor_critic`]) whose TD
//! error is broadcast back to modulate the clustering. [`agent`] wires the
//! two together, [`env`] provides the benchmark tasks, [`baselines`] the
//! tabular and random comparison agents and [`harness`] the experiment runner.

pub mod actor_critic;
pub mod agent;
pub mod baselines;
pub mod clustering;
pub mod env;
pub mod error;
pub mod harness;
pub mod presets;
pub mod schedule;

pub use actor_critic::{ActorCritic, ActorCriticParams, EpsilonSchedule};
pub use agent::{Ablation, Agent, AgentConfig, ClusterEncoder, Controller, Encoding, Normalizer, StateEncoder};
pub use baselines::{RandomAgent, TacAgent, TacConfig, UniformDiscretizer};
pub use clustering::{ClusterLayer, LayerActivation, LayerParams, OpenScope, Plasticity};
pub use env::{EnvKind, EnvSpec, Environment, Objective, StepResult};
pub use error::{Error, Result};
pub use harness::config::{AgentSpec, ExperimentConfig};
pub use schedule::DecaySchedule;

/// Deterministic generator used for every run.
pub type SimRng = rand_chacha::ChaCha8Rng;
