//! The full network: input normalisation, one or two clustering layers that
//! turn a real-valued observation into a single hidden neuron, and the
//! actor-critic that learns on top of that hidden state.
//!
//! One call to [`Agent::step`] per environment transition runs, in order:
//! encode the new observation, compute the TD error of the previous
//! transition, update actor and critic, modulate the clustering layers with
//! the same TD error, decay every trace, then pick the next action.

use rand::{Rng, RngCore};
use serde::{Deserialize, Serialize};

use crate::actor_critic::{ActorCritic, ActorCriticParams, EpsilonSchedule};
use crate::clustering::{ClusterLayer, LayerParams, LayerSnapshot, OpenScope, Plasticity};
use crate::env::EnvSpec;
use crate::error::{Error, Result};
use crate::schedule::DecaySchedule;

/// Thresholds given to every neuron by the static-clusters ablation.
pub const STATIC_THRESHOLD: f64 = 1.0;

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Encoding {
    /// One WTA group over the whole observation.
    #[default]
    FullyConnected,
    /// One WTA group per observation dimension; needs a second layer.
    PerDimension,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LayerConfig {
    /// Total neurons for a fully connected layer, neurons per group otherwise.
    pub neurons: usize,
    pub eta: DecaySchedule,
    /// Defaults to `eta.initial`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta_th: Option<f64>,
    pub theta_open: DecaySchedule,
    pub eta_td: f64,
    /// Defaults to the critic's `tau_c`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub tau_trace: Option<f64>,
    #[serde(default)]
    pub open_scope: OpenScope,
}

impl LayerConfig {
    pub fn resolve(&self, tau_c: f64) -> LayerParams {
        LayerParams {
            eta: self.eta,
            eta_th: self.eta_th.unwrap_or(self.eta.initial),
            theta_open: self.theta_open,
            eta_td: self.eta_td,
            tau_trace: self.tau_trace.unwrap_or(tau_c),
            open_scope: self.open_scope,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields, default)]
pub struct Ablation {
    pub disable_unsupervised: bool,
    pub disable_td_modulation: bool,
    pub static_clusters: bool,
}

impl Ablation {
    pub fn plasticity(&self) -> Plasticity {
        if self.static_clusters {
            Plasticity::Frozen
        } else if self.disable_unsupervised {
            Plasticity::TagOnly
        } else {
            Plasticity::Learn
        }
    }

    pub fn modulation(&self) -> bool {
        !(self.static_clusters || self.disable_td_modulation)
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct AgentConfig {
    #[serde(default)]
    pub encoding: Encoding,
    pub layer1: LayerConfig,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub layer2: Option<LayerConfig>,
    pub actor_critic: ActorCriticParams,
    pub exploration: EpsilonSchedule,
    #[serde(default)]
    pub ablation: Ablation,
}

impl AgentConfig {
    pub fn validate(&self, key: &str) -> Result<()> {
        self.actor_critic.validate(&format!("{key}.actor_critic"))?;
        self.exploration.validate(&format!("{key}.exploration"))?;
        let tau_c = self.actor_critic.tau_c;
        if self.layer1.neurons == 0 {
            return Err(Error::config(format!("{key}.layer1.neurons"), "must be > 0"));
        }
        self.layer1.resolve(tau_c).validate(&format!("{key}.layer1"))?;
        if let Some(l2) = &self.layer2 {
            if l2.neurons == 0 {
                return Err(Error::config(format!("{key}.layer2.neurons"), "must be > 0"));
            }
            l2.resolve(tau_c).validate(&format!("{key}.layer2"))?;
        }
        if self.encoding == Encoding::PerDimension && self.layer2.is_none() {
            return Err(Error::config(
                format!("{key}.layer2"),
                "per_dimension encoding needs a second clustering layer",
            ));
        }
        Ok(())
    }
}

/// Maps each observation dimension from its `(low, high)` bounds onto [0, 1],
/// clipping anything outside.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Normalizer {
    bounds: Vec<(f64, f64)>,
}

impl Normalizer {
    pub fn new(bounds: Vec<(f64, f64)>) -> Result<Self> {
        for (d, &(lo, hi)) in bounds.iter().enumerate() {
            if !(lo.is_finite() && hi.is_finite() && hi > lo) {
                return Err(Error::config(
                    format!("bounds[{d}]"),
                    format!("need finite low < high, got ({lo}, {hi})"),
                ));
            }
        }
        Ok(Self { bounds })
    }

    pub fn from_spec(spec: &EnvSpec) -> Result<Self> {
        Self::new(spec.bounds.clone())
    }

    pub fn dim(&self) -> usize {
        self.bounds.len()
    }

    pub fn bounds(&self) -> &[(f64, f64)] {
        &self.bounds
    }

    pub fn normalize_into(&self, observation: &[f64], out: &mut Vec<f64>) -> Result<()> {
        if observation.len() != self.bounds.len() {
            return Err(Error::DimensionMismatch {
                expected: self.bounds.len(),
                got: observation.len(),
            });
        }
        out.clear();
        for (d, (&x, &(lo, hi))) in observation.iter().zip(&self.bounds).enumerate() {
            if !x.is_finite() {
                return Err(Error::NonFiniteInput { dim: d, value: x });
            }
            out.push(((x - lo) / (hi - lo)).clamp(0.0, 1.0));
        }
        Ok(())
    }

    pub fn normalize(&self, observation: &[f64]) -> Result<Vec<f64>> {
        let mut out = Vec::with_capacity(observation.len());
        self.normalize_into(observation, &mut out)?;
        Ok(out)
    }
}

/// Front end that turns an observation into the hidden index seen by the
/// actor-critic. The proposed network and the tabular baseline differ only here.
pub trait StateEncoder: Send {
    fn state_count(&self) -> usize;

    fn encode(&mut self, observation: &[f64]) -> Result<usize>;

    fn modulate(&mut self, _delta: f64) -> Result<()> {
        Ok(())
    }

    fn decay_traces(&mut self) {}

    fn end_episode(&mut self) {}

    fn set_episode(&mut self, _episode: usize) {}

    fn layer_snapshots(&self) -> Vec<LayerSnapshot> {
        Vec::new()
    }
}

/// Clustering front end (one or two layers).
#[derive(Clone, Debug)]
pub struct ClusterEncoder {
    normalizer: Normalizer,
    layer1: ClusterLayer,
    layer2: Option<ClusterLayer>,
    plasticity: Plasticity,
    modulation: bool,
    scratch: Vec<f64>,
}

impl ClusterEncoder {
    pub fn new<R: Rng + ?Sized>(config: &AgentConfig, normalizer: Normalizer, rng: &mut R) -> Result<Self> {
        config.validate("agent")?;
        let tau_c = config.actor_critic.tau_c;
        let dim = normalizer.dim();
        let p1 = config.layer1.resolve(tau_c);
        let mut layer1 = match config.encoding {
            Encoding::FullyConnected => ClusterLayer::fully_connected(dim, config.layer1.neurons, p1, rng)?,
            Encoding::PerDimension => ClusterLayer::per_dimension(dim, config.layer1.neurons, p1, rng)?,
        };
        let mut layer2 = match &config.layer2 {
            Some(l2) => Some(ClusterLayer::fully_connected(
                layer1.neuron_count(),
                l2.neurons,
                l2.resolve(tau_c),
                rng,
            )?),
            None => None,
        };
        if config.ablation.static_clusters {
            layer1.set_all_thresholds(STATIC_THRESHOLD);
            if let Some(l2) = &mut layer2 {
                l2.set_all_thresholds(STATIC_THRESHOLD);
            }
        }
        Ok(Self {
            normalizer,
            layer1,
            layer2,
            plasticity: config.ablation.plasticity(),
            modulation: config.ablation.modulation(),
            scratch: Vec::with_capacity(dim),
        })
    }

    pub fn from_layers(
        normalizer: Normalizer,
        layer1: ClusterLayer,
        layer2: Option<ClusterLayer>,
        plasticity: Plasticity,
        modulation: bool,
    ) -> Result<Self> {
        if layer1.input_dim() != normalizer.dim() {
            return Err(Error::DimensionMismatch {
                expected: normalizer.dim(),
                got: layer1.input_dim(),
            });
        }
        let top_groups = match &layer2 {
            Some(l2) => {
                if l2.input_dim() != layer1.neuron_count() {
                    return Err(Error::DimensionMismatch {
                        expected: layer1.neuron_count(),
                        got: l2.input_dim(),
                    });
                }
                l2.groups().len()
            }
            None => layer1.groups().len(),
        };
        if top_groups != 1 {
            return Err(Error::config("layer", "the last clustering layer must be a single WTA group"));
        }
        Ok(Self {
            scratch: Vec::with_capacity(normalizer.dim()),
            normalizer,
            layer1,
            layer2,
            plasticity,
            modulation,
        })
    }

    pub fn layer1(&self) -> &ClusterLayer {
        &self.layer1
    }

    pub fn layer2(&self) -> Option<&ClusterLayer> {
        self.layer2.as_ref()
    }

    pub fn normalizer(&self) -> &Normalizer {
        &self.normalizer
    }

    /// Hidden index for `observation` without changing any state.
    pub fn peek(&self, observation: &[f64]) -> Result<usize> {
        let x = self.normalizer.normalize(observation)?;
        let w1 = self.layer1.evaluate(&x)?;
        match &self.layer2 {
            None => Ok(w1[0]),
            Some(l2) => {
                let mut hot = vec![0.0; self.layer1.neuron_count()];
                for (g, &w) in w1.iter().enumerate() {
                    hot[self.layer1.group_offsets()[g] + w] = 1.0;
                }
                Ok(l2.evaluate(&hot)?[0])
            }
        }
    }
}

impl StateEncoder for ClusterEncoder {
    fn state_count(&self) -> usize {
        match &self.layer2 {
            Some(l2) => l2.neuron_count(),
            None => self.layer1.neuron_count(),
        }
    }

    fn encode(&mut self, observation: &[f64]) -> Result<usize> {
        let mut x = std::mem::take(&mut self.scratch);
        self.normalizer.normalize_into(observation, &mut x)?;
        let first = self.layer1.forward_with(&x, self.plasticity);
        self.scratch = x;
        let first = first?;
        match &mut self.layer2 {
            None => Ok(first.winners[0]),
            Some(l2) => Ok(l2.forward_with(&first.one_hot, self.plasticity)?.winners[0]),
        }
    }

    fn modulate(&mut self, delta: f64) -> Result<()> {
        if !self.modulation {
            return Ok(());
        }
        self.layer1.modulate_td(delta)?;
        if let Some(l2) = &mut self.layer2 {
            l2.modulate_td(delta)?;
        }
        Ok(())
    }

    fn decay_traces(&mut self) {
        self.layer1.decay_traces();
        if let Some(l2) = &mut self.layer2 {
            l2.decay_traces();
        }
    }

    fn end_episode(&mut self) {
        self.layer1.reset_traces();
        if let Some(l2) = &mut self.layer2 {
            l2.reset_traces();
        }
    }

    fn set_episode(&mut self, episode: usize) {
        self.layer1.set_episode(episode);
        if let Some(l2) = &mut self.layer2 {
            l2.set_episode(episode);
        }
    }

    fn layer_snapshots(&self) -> Vec<LayerSnapshot> {
        let mut out = vec![self.layer1.snapshot()];
        if let Some(l2) = &self.layer2 {
            out.push(l2.snapshot());
        }
        out
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
pub struct NetworkSnapshot {
    pub layers: Vec<LayerSnapshot>,
    pub values: Vec<f64>,
}

/// Anything the experiment runner can drive through an episode.
pub trait Controller: Send {
    /// Feeds the latest transition and returns the next action, or `None`
    /// once the episode has ended.
    fn act(
        &mut self,
        observation: &[f64],
        reward: f64,
        terminal: bool,
        truncated: bool,
        rng: &mut dyn RngCore,
    ) -> Result<Option<usize>>;

    fn advance_episode(&mut self);

    fn hidden_state_count(&self) -> usize;

    fn snapshot(&self) -> NetworkSnapshot {
        NetworkSnapshot::default()
    }
}

/// Actor-critic on top of a [`StateEncoder`].
#[derive(Clone, Debug)]
pub struct Agent<E> {
    encoder: E,
    ac: ActorCritic,
    exploration: EpsilonSchedule,
    epsilon: f64,
    episode: usize,
    step: usize,
    prev_hidden: Option<usize>,
    last_delta: Option<f64>,
}

impl Agent<ClusterEncoder> {
    /// The proposed network for an environment described by `spec`.
    pub fn proposed<R: Rng + ?Sized>(config: &AgentConfig, spec: &EnvSpec, rng: &mut R) -> Result<Self> {
        let encoder = ClusterEncoder::new(config, Normalizer::from_spec(spec)?, rng)?;
        Agent::new(encoder, spec.action_count, config.actor_critic.clone(), config.exploration)
    }
}

impl<E: StateEncoder> Agent<E> {
    pub fn new(encoder: E, actions: usize, params: ActorCriticParams, exploration: EpsilonSchedule) -> Result<Self> {
        exploration.validate("exploration")?;
        let ac = ActorCritic::new(actions, encoder.state_count(), params)?;
        let mut agent = Self {
            encoder,
            ac,
            exploration,
            epsilon: exploration.epsilon_at(0),
            episode: 0,
            step: 0,
            prev_hidden: None,
            last_delta: None,
        };
        agent.encoder.set_episode(0);
        Ok(agent)
    }

    pub fn encoder(&self) -> &E {
        &self.encoder
    }

    pub fn encoder_mut(&mut self) -> &mut E {
        &mut self.encoder
    }

    pub fn actor_critic(&self) -> &ActorCritic {
        &self.ac
    }

    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    pub fn episode(&self) -> usize {
        self.episode
    }

    /// TD error of the most recent transition, if any.
    pub fn last_delta(&self) -> Option<f64> {
        self.last_delta
    }

    pub fn hidden_state_count(&self) -> usize {
        self.encoder.state_count()
    }

    pub fn step<R: Rng + ?Sized>(
        &mut self,
        observation: &[f64],
        reward: f64,
        terminal: bool,
        truncated: bool,
        rng: &mut R,
    ) -> Result<Option<usize>> {
        let (episode, step) = (self.episode, self.step);
        self.step += 1;
        self.step_inner(observation, reward, terminal, truncated, rng)
            .map_err(|e| e.at_step(episode, step))
    }

    fn step_inner<R: Rng + ?Sized>(
        &mut self,
        observation: &[f64],
        reward: f64,
        terminal: bool,
        truncated: bool,
        rng: &mut R,
    ) -> Result<Option<usize>> {
        let hidden = if terminal {
            None
        } else {
            Some(self.encoder.encode(observation)?)
        };
        if let Some(prev) = self.prev_hidden {
            let delta = self.ac.td_error(reward, prev, hidden, terminal)?;
            self.ac.update(delta)?;
            self.encoder.modulate(delta)?;
            self.ac.decay_traces();
            self.encoder.decay_traces();
            self.last_delta = Some(delta);
        }
        if terminal || truncated {
            self.prev_hidden = None;
            self.ac.reset_traces();
            self.encoder.end_episode();
            return Ok(None);
        }
        let hidden = hidden.expect("non-terminal steps are encoded");
        let action = self.ac.select_action(hidden, self.epsilon, rng)?;
        self.prev_hidden = Some(hidden);
        Ok(Some(action))
    }

    /// Moves every schedule to the next episode.
    pub fn advance_episode(&mut self) {
        self.episode += 1;
        self.step = 0;
        self.prev_hidden = None;
        self.epsilon = self.exploration.epsilon_at(self.episode);
        self.encoder.set_episode(self.episode);
    }
}

impl<E: StateEncoder> Controller for Agent<E> {
    fn act(
        &mut self,
        observation: &[f64],
        reward: f64,
        terminal: bool,
        truncated: bool,
        rng: &mut dyn RngCore,
    ) -> Result<Option<usize>> {
        self.step(observation, reward, terminal, truncated, rng)
    }

    fn advance_episode(&mut self) {
        Agent::advance_episode(self)
    }

    fn hidden_state_count(&self) -> usize {
        self.encoder.state_count()
    }

    fn snapshot(&self) -> NetworkSnapshot {
        NetworkSnapshot {
            layers: self.encoder.layer_snapshots(),
            values: self.ac.value_weights().to_vec(),
        }
    }
}
