//! Comparison agents: a tabular actor-critic over a uniform grid of the
//! observation space, and a uniformly random policy.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::actor_critic::{ActorCriticParams, EpsilonSchedule};
use crate::agent::{Agent, Controller, Normalizer, StateEncoder};
use crate::env::EnvSpec;
use crate::error::{Error, Result};

/// Row-major grid index over per-dimension uniform bins.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct UniformDiscretizer {
    bins: Vec<usize>,
    bounds: Vec<(f64, f64)>,
}

impl UniformDiscretizer {
    pub fn new(bins: Vec<usize>, bounds: Vec<(f64, f64)>) -> Result<Self> {
        if bins.len() != bounds.len() || bins.is_empty() {
            return Err(Error::config("tac.bins", "need one bin count per observation dimension"));
        }
        if bins.contains(&0) {
            return Err(Error::config("tac.bins", "bin counts must be > 0"));
        }
        Normalizer::new(bounds.clone())?;
        bins.iter()
            .try_fold(1usize, |acc, &b| acc.checked_mul(b))
            .ok_or_else(|| Error::config("tac.bins", "state space overflows usize"))?;
        Ok(Self { bins, bounds })
    }

    pub fn uniform(bins: usize, bounds: Vec<(f64, f64)>) -> Result<Self> {
        Self::new(vec![bins; bounds.len()], bounds)
    }

    pub fn state_count(&self) -> usize {
        self.bins.iter().product()
    }

    fn bin(&self, d: usize, x: f64) -> usize {
        let (lo, hi) = self.bounds[d];
        let b = self.bins[d];
        let t = ((x - lo) / (hi - lo)).clamp(0.0, 1.0);
        ((t * b as f64) as usize).min(b - 1)
    }

    pub fn discretize(&self, observation: &[f64]) -> Result<usize> {
        if observation.len() != self.bins.len() {
            return Err(Error::DimensionMismatch {
                expected: self.bins.len(),
                got: observation.len(),
            });
        }
        let mut index = 0;
        for (d, &x) in observation.iter().enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteInput { dim: d, value: x });
            }
            index = index * self.bins[d] + self.bin(d, x);
        }
        Ok(index)
    }

    /// Per-dimension bin indices of a composite state index.
    pub fn decode(&self, mut index: usize) -> Vec<usize> {
        let mut out = vec![0; self.bins.len()];
        for d in (0..self.bins.len()).rev() {
            out[d] = index % self.bins[d];
            index /= self.bins[d];
        }
        out
    }

    /// `[low, high)` covered by `bin` in dimension `d`.
    pub fn bin_range(&self, d: usize, bin: usize) -> (f64, f64) {
        let (lo, hi) = self.bounds[d];
        let w = (hi - lo) / self.bins[d] as f64;
        (lo + w * bin as f64, lo + w * (bin + 1) as f64)
    }
}

/// Grid front end of the tabular actor-critic.
#[derive(Clone, Debug)]
pub struct TabularEncoder {
    discretizer: UniformDiscretizer,
}

impl TabularEncoder {
    pub fn new(discretizer: UniformDiscretizer) -> Self {
        Self { discretizer }
    }

    pub fn discretizer(&self) -> &UniformDiscretizer {
        &self.discretizer
    }
}

impl StateEncoder for TabularEncoder {
    fn state_count(&self) -> usize {
        self.discretizer.state_count()
    }

    fn encode(&mut self, observation: &[f64]) -> Result<usize> {
        self.discretizer.discretize(observation)
    }
}

/// Treats the first observation entry as the state index (offset by `base`).
#[derive(Clone, Debug)]
pub struct IdentityEncoder {
    states: usize,
    base: f64,
}

impl IdentityEncoder {
    pub fn new(states: usize, base: f64) -> Self {
        Self { states, base }
    }
}

impl StateEncoder for IdentityEncoder {
    fn state_count(&self) -> usize {
        self.states
    }

    fn encode(&mut self, observation: &[f64]) -> Result<usize> {
        let idx = observation[0] - self.base;
        if !(idx >= 0.0 && idx < self.states as f64) {
            return Err(Error::Input(format!("state {} outside [0, {})", idx, self.states)));
        }
        Ok(idx as usize)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct TacConfig {
    pub bins: usize,
    pub actor_critic: ActorCriticParams,
    pub exploration: EpsilonSchedule,
}

impl TacConfig {
    pub fn validate(&self, key: &str) -> Result<()> {
        if self.bins == 0 {
            return Err(Error::config(format!("{key}.bins"), "must be > 0"));
        }
        self.actor_critic.validate(&format!("{key}.actor_critic"))?;
        self.exploration.validate(&format!("{key}.exploration"))
    }
}

pub type TacAgent = Agent<TabularEncoder>;

impl Agent<TabularEncoder> {
    pub fn tac(config: &TacConfig, spec: &EnvSpec) -> Result<Self> {
        config.validate("agent")?;
        let discretizer = UniformDiscretizer::uniform(config.bins, spec.bounds.clone())?;
        Agent::new(
            TabularEncoder::new(discretizer),
            spec.action_count,
            config.actor_critic.clone(),
            config.exploration,
        )
    }
}

pub fn random_action<R: Rng + ?Sized>(action_count: usize, rng: &mut R) -> usize {
    rng.gen_range(0..action_count)
}

#[derive(Clone, Debug)]
pub struct RandomAgent {
    action_count: usize,
}

impl RandomAgent {
    pub fn new(action_count: usize) -> Result<Self> {
        if action_count < 2 {
            return Err(Error::config("actions", "a random agent needs at least two actions"));
        }
        Ok(Self { action_count })
    }
}

impl Controller for RandomAgent {
    fn act(
        &mut self,
        _observation: &[f64],
        _reward: f64,
        terminal: bool,
        truncated: bool,
        rng: &mut dyn RngCore,
    ) -> Result<Option<usize>> {
        if terminal || truncated {
            return Ok(None);
        }
        Ok(Some(random_action(self.action_count, rng)))
    }

    fn advance_episode(&mut self) {}

    fn hidden_state_count(&self) -> usize {
        1
    }
}
