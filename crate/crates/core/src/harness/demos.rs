//! Small illustrative experiments: clustering of a 1-D Gaussian mixture and
//! value estimation on the linear track.

use serde::{Deserialize, Serialize};

use crate::actor_critic::{ActorCriticParams, EpsilonSchedule};
use crate::agent::{Ablation, Agent, AgentConfig, ClusterEncoder, Encoding, LayerConfig};
use crate::clustering::{ClusterLayer, LayerParams, LayerSnapshot, OpenScope};
use crate::env::linear_track::{REWARD_POSITION, TRACK_LENGTH};
use crate::env::LinearTrack;
use crate::env::GaussianMixture;
use crate::env::Environment;
use crate::error::Result;
use crate::harness::campaign::{run_episode, stream};
use crate::schedule::DecaySchedule;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ClusteringDemo {
    pub neurons: usize,
    pub samples: usize,
    pub eta: f64,
    pub eta_th: f64,
    pub theta_open: f64,
}

impl Default for ClusteringDemo {
    fn default() -> Self {
        Self {
            neurons: 3,
            samples: 10_000,
            eta: 1e-2,
            eta_th: 1e-2,
            theta_open: 1e-2,
        }
    }
}

#[derive(Clone, Debug)]
pub struct ClusteringOutcome {
    pub initial: LayerSnapshot,
    pub last: LayerSnapshot,
}

impl ClusteringDemo {
    pub fn run(&self, mixture: &GaussianMixture, seed: u64) -> Result<ClusteringOutcome> {
        let params = LayerParams {
            eta: DecaySchedule::constant(self.eta),
            eta_th: self.eta_th,
            theta_open: DecaySchedule::constant(self.theta_open),
            eta_td: 0.0,
            tau_trace: 2.0,
            open_scope: OpenScope::Group,
        };
        params.validate("demo")?;
        let mut layer = ClusterLayer::fully_connected(1, self.neurons, params, &mut stream(seed, 0))?;
        let initial = layer.snapshot();
        let mut rng = stream(seed, 1);
        let mut x = [0.0];
        for _ in 0..self.samples {
            x[0] = mixture.sample(&mut rng);
            layer.forward(&x, true)?;
        }
        Ok(ClusteringOutcome {
            initial,
            last: layer.snapshot(),
        })
    }
}

/// Closed-loop value learning on the linear track with the proposed encoder.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TrackDemo {
    pub neurons: usize,
    pub episodes: usize,
    pub gamma: f64,
    pub eta: f64,
    pub theta_open: f64,
    pub eta_td: f64,
    pub eta_c: f64,
    pub tau_c: f64,
    pub modulation: bool,
}

impl Default for TrackDemo {
    fn default() -> Self {
        Self {
            neurons: 10,
            episodes: 500,
            gamma: 0.9,
            eta: 1e-3,
            theta_open: 1e-2,
            eta_td: 0.1,
            eta_c: 0.1,
            tau_c: 10.0,
            modulation: true,
        }
    }
}

#[derive(Clone, Debug)]
pub struct TrackOutcome {
    /// Learned value of positions 1..=99.
    pub learned: Vec<f64>,
    pub oracle: Vec<f64>,
    pub rms: f64,
    pub layer: LayerSnapshot,
}

impl TrackDemo {
    pub fn agent_config(&self) -> AgentConfig {
        AgentConfig {
            encoding: Encoding::FullyConnected,
            layer1: LayerConfig {
                neurons: self.neurons,
                eta: DecaySchedule::constant(self.eta),
                eta_th: None,
                theta_open: DecaySchedule::constant(self.theta_open),
                eta_td: self.eta_td,
                tau_trace: None,
                open_scope: OpenScope::Group,
            },
            layer2: None,
            actor_critic: ActorCriticParams {
                gamma: self.gamma,
                eta_a: 0.1,
                eta_c: self.eta_c,
                tau_a: self.tau_c,
                tau_c: self.tau_c,
            },
            exploration: EpsilonSchedule {
                epsilon_min: 0.0,
                decay_episodes: 1,
            },
            ablation: Ablation {
                disable_td_modulation: !self.modulation,
                ..Ablation::default()
            },
        }
    }

    pub fn run(&self, seed: u64) -> Result<TrackOutcome> {
        let mut env = LinearTrack::new();
        let mut agent: Agent<ClusterEncoder> =
            Agent::proposed(&self.agent_config(), env.spec(), &mut stream(seed, 0))?;
        let mut env_rng = stream(seed, 1);
        let mut policy_rng = stream(seed, 2);
        for _ in 0..self.episodes {
            run_episode(&mut env, &mut agent, &mut env_rng, &mut policy_rng)?;
        }
        let values = agent.actor_critic().value_weights();
        let learned = (1..TRACK_LENGTH)
            .map(|p| Ok(values[agent.encoder().peek(&[p as f64])?]))
            .collect::<Result<Vec<f64>>>()?;
        let oracle = track_value_iteration(self.gamma)[1..TRACK_LENGTH].to_vec();
        Ok(TrackOutcome {
            rms: rms(&learned, &oracle),
            learned,
            oracle,
            layer: agent.encoder().layer1().snapshot(),
        })
    }
}

pub fn rms(a: &[f64], b: &[f64]) -> f64 {
    (a.iter().zip(b).map(|(x, y)| (x - y).powi(2)).sum::<f64>() / a.len() as f64).sqrt()
}

/// State values of the deterministic track, indexed by position (entry 0
/// unused, the terminal position 100 has value 0).
pub fn track_value_iteration(gamma: f64) -> Vec<f64> {
    let mut v = vec![0.0; TRACK_LENGTH + 1];
    loop {
        let mut change = 0.0f64;
        for p in 1..TRACK_LENGTH {
            let next = p + 1;
            let reward = if next == REWARD_POSITION { 1.0 } else { 0.0 };
            let target = reward + if next == TRACK_LENGTH { 0.0 } else { gamma * v[next] };
            change = change.max((target - v[p]).abs());
            v[p] = target;
        }
        if change < 1e-15 {
            return v;
        }
    }
}
