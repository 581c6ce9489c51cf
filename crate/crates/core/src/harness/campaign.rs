use rand::SeedableRng;
use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::agent::{Agent, Controller, NetworkSnapshot};
use crate::baselines::{RandomAgent, TacAgent};
use crate::env::Environment;
use crate::error::{Error, Result};
use crate::harness::config::{AgentSpec, ExperimentConfig};
use crate::SimRng;

const STREAM_INIT: u64 = 0;
const STREAM_ENV: u64 = 1;
const STREAM_POLICY: u64 = 2;

/// Independent generator for one purpose within a seeded run.
pub fn stream(seed: u64, stream: u64) -> SimRng {
    let mut rng = SimRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

/// Per-episode results of one seed.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub config_id: String,
    pub seed: u64,
    pub latencies: Vec<usize>,
    pub returns: Vec<f64>,
}

impl RunRecord {
    pub fn episodes(&self) -> usize {
        self.latencies.len()
    }
}

#[derive(Clone, Debug)]
pub struct RunOutcome {
    pub record: RunRecord,
    pub snapshot: NetworkSnapshot,
}

#[derive(Clone, Debug)]
pub struct SeedFailure {
    pub seed: u64,
    pub error: String,
}

#[derive(Clone, Debug, Default)]
pub struct Campaign {
    pub outcomes: Vec<RunOutcome>,
    pub failures: Vec<SeedFailure>,
}

impl Campaign {
    pub fn records(&self) -> Vec<RunRecord> {
        self.outcomes.iter().map(|o| o.record.clone()).collect()
    }
}

pub fn build_controller(config: &ExperimentConfig, init_rng: &mut SimRng) -> Result<Box<dyn Controller>> {
    let spec = config.environment.spec();
    Ok(match &config.agent {
        AgentSpec::Proposed(cfg) => Box::new(Agent::proposed(cfg, &spec, init_rng)?),
        AgentSpec::Tac(cfg) => Box::new(TacAgent::tac(cfg, &spec)?),
        AgentSpec::Random => Box::new(RandomAgent::new(spec.action_count)?),
    })
}

/// Plays one episode and returns `(latency, return)`.
pub fn run_episode(
    env: &mut dyn Environment,
    controller: &mut dyn Controller,
    env_rng: &mut dyn RngCore,
    policy_rng: &mut dyn RngCore,
) -> Result<(usize, f64)> {
    let observation = env.reset(env_rng);
    let mut action = controller.act(&observation, 0.0, false, false, policy_rng)?;
    let (mut steps, mut total) = (0usize, 0.0);
    while let Some(a) = action {
        let r = env.step(a)?;
        steps += 1;
        total += r.reward;
        action = controller.act(&r.observation, r.reward, r.terminal, r.truncated, policy_rng)?;
    }
    controller.advance_episode();
    Ok((steps, total))
}

pub fn run_seed(config: &ExperimentConfig, seed: u64) -> Result<RunOutcome> {
    let mut controller = build_controller(config, &mut stream(seed, STREAM_INIT))?;
    let mut env = config.environment.make();
    let mut env_rng = stream(seed, STREAM_ENV);
    let mut policy_rng = stream(seed, STREAM_POLICY);
    let mut record = RunRecord {
        config_id: config.id.clone(),
        seed,
        latencies: Vec::with_capacity(config.episodes),
        returns: Vec::with_capacity(config.episodes),
    };
    for _ in 0..config.episodes {
        let (steps, total) = run_episode(env.as_mut(), controller.as_mut(), &mut env_rng, &mut policy_rng)?;
        if !total.is_finite() {
            return Err(Error::Numerical(format!("non-finite return at episode {}", record.episodes())));
        }
        record.latencies.push(steps);
        record.returns.push(total);
    }
    Ok(RunOutcome {
        record,
        snapshot: controller.snapshot(),
    })
}

/// Runs every seed; a failing seed is reported without stopping the others.
/// Outcomes keep the order of `seeds`.
pub fn run_campaign(config: &ExperimentConfig, seeds: &[u64], parallel: bool) -> Campaign {
    let results: Vec<(u64, Result<RunOutcome>)> = if parallel {
        seeds.par_iter().map(|&s| (s, run_seed(config, s))).collect()
    } else {
        seeds.iter().map(|&s| (s, run_seed(config, s))).collect()
    };
    let mut campaign = Campaign::default();
    for (seed, result) in results {
        match result {
            Ok(o) => campaign.outcomes.push(o),
            Err(e) => campaign.failures.push(SeedFailure {
                seed,
                error: e.to_string(),
            }),
        }
    }
    campaign
}
