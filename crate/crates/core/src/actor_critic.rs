//! Trace-based actor-critic over a discrete hidden state.
//!
//! The critic holds one value weight per hidden neuron and the actor one
//! preference weight per (action, hidden) pair. Both carry replacing
//! eligibility traces that are set to one on coincident firing and decay as
//! `c <- c - c / tau`. A single TD error drives every update.

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Preferences of one independent group of action neurons.
#[derive(Clone, Debug, PartialEq)]
pub struct ActorBlock {
    actions: usize,
    hidden: usize,
    /// Row-major `[actions x hidden]`.
    weights: Vec<f64>,
    traces: Vec<f64>,
    /// Indices whose trace may be non-zero.
    active: Vec<usize>,
}

impl ActorBlock {
    fn new(actions: usize, hidden: usize) -> Self {
        Self {
            actions,
            hidden,
            weights: vec![0.0; actions * hidden],
            traces: vec![0.0; actions * hidden],
            active: Vec::new(),
        }
    }

    pub fn action_count(&self) -> usize {
        self.actions
    }

    pub fn weight(&self, action: usize, hidden: usize) -> f64 {
        self.weights[action * self.hidden + hidden]
    }

    pub fn set_weight(&mut self, action: usize, hidden: usize, value: f64) {
        self.weights[action * self.hidden + hidden] = value;
    }

    pub fn trace(&self, action: usize, hidden: usize) -> f64 {
        self.traces[action * self.hidden + hidden]
    }

    /// Sets the trace of `(action, hidden)` to one.
    pub fn tag(&mut self, action: usize, hidden: usize) {
        tag(&mut self.traces, &mut self.active, action * self.hidden + hidden);
    }

    fn greedy(&self, hidden: usize) -> usize {
        let mut best = 0;
        for a in 1..self.actions {
            if self.weight(a, hidden) > self.weight(best, hidden) {
                best = a;
            }
        }
        best
    }
}

fn tag(traces: &mut [f64], active: &mut Vec<usize>, i: usize) {
    if traces[i] == 0.0 {
        active.push(i);
    }
    traces[i] = 1.0;
}

fn decay(traces: &mut [f64], active: &mut Vec<usize>, tau: f64) {
    active.retain(|&i| {
        let c = &mut traces[i];
        *c -= *c / tau;
        *c != 0.0
    });
}

fn clear(traces: &mut [f64], active: &mut Vec<usize>) {
    for i in active.drain(..) {
        traces[i] = 0.0;
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ActorCriticParams {
    pub gamma: f64,
    pub eta_a: f64,
    pub eta_c: f64,
    pub tau_a: f64,
    pub tau_c: f64,
}

impl ActorCriticParams {
    pub fn validate(&self, key: &str) -> Result<()> {
        if !(self.gamma > 0.0 && self.gamma <= 1.0) {
            return Err(Error::config(
                format!("{key}.gamma"),
                format!("must lie in (0, 1], got {}", self.gamma),
            ));
        }
        for (name, v) in [("eta_a", self.eta_a), ("eta_c", self.eta_c)] {
            if !(v > 0.0 && v.is_finite()) {
                return Err(Error::config(format!("{key}.{name}"), format!("must be > 0, got {v}")));
            }
        }
        for (name, v) in [("tau_a", self.tau_a), ("tau_c", self.tau_c)] {
            if !(v >= 1.0 && v.is_finite()) {
                return Err(Error::config(format!("{key}.{name}"), format!("must be >= 1, got {v}")));
            }
        }
        Ok(())
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct ActorCritic {
    actors: Vec<ActorBlock>,
    value_weights: Vec<f64>,
    critic_traces: Vec<f64>,
    critic_active: Vec<usize>,
    params: ActorCriticParams,
}

impl ActorCritic {
    /// Single action group of `actions` neurons over `hidden` states.
    pub fn new(actions: usize, hidden: usize, params: ActorCriticParams) -> Result<Self> {
        Self::with_groups(&[actions], hidden, params)
    }

    /// One actor block per entry of `action_groups`, all sharing the critic.
    pub fn with_groups(action_groups: &[usize], hidden: usize, params: ActorCriticParams) -> Result<Self> {
        params.validate("actor_critic")?;
        if hidden == 0 {
            return Err(Error::config("actor_critic", "hidden state count must be > 0"));
        }
        if action_groups.is_empty() || action_groups.contains(&0) {
            return Err(Error::config("actor_critic", "every action group needs at least one action"));
        }
        Ok(Self {
            actors: action_groups.iter().map(|&a| ActorBlock::new(a, hidden)).collect(),
            value_weights: vec![0.0; hidden],
            critic_traces: vec![0.0; hidden],
            critic_active: Vec::new(),
            params,
        })
    }

    pub fn hidden_count(&self) -> usize {
        self.value_weights.len()
    }

    pub fn params(&self) -> &ActorCriticParams {
        &self.params
    }

    pub fn actors(&self) -> &[ActorBlock] {
        &self.actors
    }

    pub fn actors_mut(&mut self) -> &mut [ActorBlock] {
        &mut self.actors
    }

    pub fn value_weights(&self) -> &[f64] {
        &self.value_weights
    }

    pub fn value_weights_mut(&mut self) -> &mut [f64] {
        &mut self.value_weights
    }

    pub fn critic_traces(&self) -> &[f64] {
        &self.critic_traces
    }

    /// Sets the critic trace of `hidden` to one.
    pub fn tag_critic(&mut self, hidden: usize) {
        tag(&mut self.critic_traces, &mut self.critic_active, hidden);
    }

    /// Epsilon-greedy choice in the first action group; tags the chosen
    /// synapse and the critic trace of `hidden`.
    pub fn select_action<R: Rng + ?Sized>(&mut self, hidden: usize, epsilon: f64, rng: &mut R) -> Result<usize> {
        self.select_in_group(0, hidden, epsilon, rng)
    }

    /// One epsilon-greedy choice per action group.
    pub fn select_joint_action<R: Rng + ?Sized>(
        &mut self,
        hidden: usize,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<Vec<usize>> {
        (0..self.actors.len())
            .map(|g| self.select_in_group(g, hidden, epsilon, rng))
            .collect()
    }

    fn select_in_group<R: Rng + ?Sized>(
        &mut self,
        group: usize,
        hidden: usize,
        epsilon: f64,
        rng: &mut R,
    ) -> Result<usize> {
        if !(0.0..=1.0).contains(&epsilon) {
            return Err(Error::config("epsilon", format!("must lie in [0, 1], got {epsilon}")));
        }
        if hidden >= self.hidden_count() {
            return Err(Error::Input(format!(
                "hidden index {hidden} out of range for {} states",
                self.hidden_count()
            )));
        }
        let block = &mut self.actors[group];
        // ε = 1 consumes no coin flip, so it replays a uniform random policy exactly
        let explore = epsilon >= 1.0 || (epsilon > 0.0 && rng.gen::<f64>() < epsilon);
        let action = if explore {
            rng.gen_range(0..block.actions)
        } else {
            block.greedy(hidden)
        };
        block.tag(action, hidden);
        self.tag_critic(hidden);
        Ok(action)
    }

    /// `r + gamma * V(next) - V(prev)`, with `V(next) = 0` on termination.
    pub fn td_error(&self, reward: f64, hidden_prev: usize, hidden_next: Option<usize>, terminal: bool) -> Result<f64> {
        if !reward.is_finite() {
            return Err(Error::Input(format!("non-finite reward {reward}")));
        }
        let next = match (terminal, hidden_next) {
            (true, _) => 0.0,
            (false, Some(h)) => self.value_weights[h],
            (false, None) => {
                return Err(Error::Input("non-terminal transition without a next state".into()));
            }
        };
        Ok(reward + self.params.gamma * next - self.value_weights[hidden_prev])
    }

    pub fn update(&mut self, delta: f64) -> Result<()> {
        if !delta.is_finite() {
            return Err(Error::Numerical(format!("non-finite TD error {delta}")));
        }
        if delta == 0.0 {
            return Ok(());
        }
        let critic_step = self.params.eta_c * delta;
        for &i in &self.critic_active {
            self.value_weights[i] += self.critic_traces[i] * critic_step;
        }
        let actor_step = self.params.eta_a * delta;
        for block in &mut self.actors {
            for &i in &block.active {
                block.weights[i] += block.traces[i] * actor_step;
            }
        }
        Ok(())
    }

    pub fn decay_traces(&mut self) {
        decay(&mut self.critic_traces, &mut self.critic_active, self.params.tau_c);
        let tau_a = self.params.tau_a;
        for block in &mut self.actors {
            decay(&mut block.traces, &mut block.active, tau_a);
        }
    }

    pub fn reset_traces(&mut self) {
        clear(&mut self.critic_traces, &mut self.critic_active);
        for block in &mut self.actors {
            clear(&mut block.traces, &mut block.active);
        }
    }
}

/// Exploration probability decaying linearly from 1 to `epsilon_min` over
/// `decay_episodes` episodes.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct EpsilonSchedule {
    pub epsilon_min: f64,
    pub decay_episodes: usize,
}

impl EpsilonSchedule {
    pub fn validate(&self, key: &str) -> Result<()> {
        if !(0.0..1.0).contains(&self.epsilon_min) {
            return Err(Error::config(
                format!("{key}.epsilon_min"),
                format!("must lie in [0, 1), got {}", self.epsilon_min),
            ));
        }
        if self.decay_episodes == 0 {
            return Err(Error::config(format!("{key}.decay_episodes"), "must be > 0"));
        }
        Ok(())
    }

    pub fn epsilon_at(&self, episode: usize) -> f64 {
        if episode >= self.decay_episodes {
            return self.epsilon_min;
        }
        let linear = 1.0 - (1.0 - self.epsilon_min) * episode as f64 / self.decay_episodes as f64;
        linear.max(self.epsilon_min)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn params() -> ActorCriticParams {
        ActorCriticParams {
            gamma: 0.9,
            eta_a: 0.1,
            eta_c: 0.1,
            tau_a: 10.0,
            tau_c: 20.0,
        }
    }

    fn with_column(col: &[f64]) -> ActorCritic {
        let mut ac = ActorCritic::new(col.len(), 2, params()).unwrap();
        for (a, &w) in col.iter().enumerate() {
            ac.actors_mut()[0].set_weight(a, 1, w);
        }
        ac
    }

    #[test]
    fn greedy_picks_argmax() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ac = with_column(&[0.1, 0.9, 0.3]);
        assert_eq!(ac.select_action(1, 0.0, &mut rng).unwrap(), 1);
        assert_eq!(ac.actors()[0].trace(1, 1), 1.0);
        assert_eq!(ac.critic_traces()[1], 1.0);
        let mut ac = with_column(&[0.0, 0.0, 0.0]);
        assert_eq!(ac.select_action(1, 0.0, &mut rng).unwrap(), 0);
    }

    #[test]
    fn full_exploration_is_uniform() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let mut ac = with_column(&[0.0, 5.0, 0.0]);
        let mut counts = [0usize; 3];
        for _ in 0..30_000 {
            counts[ac.select_action(1, 1.0, &mut rng).unwrap()] += 1;
        }
        for c in counts {
            assert!((c as f64 / 30_000.0 - 1.0 / 3.0).abs() < 0.01, "{counts:?}");
        }
    }

    #[test]
    fn epsilon_out_of_range() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ac = with_column(&[0.0, 0.0]);
        assert!(matches!(ac.select_action(0, 1.5, &mut rng), Err(Error::Config { .. })));
        assert!(ac.select_action(0, -0.1, &mut rng).is_err());
    }

    #[test]
    fn td_error_cases() {
        let ac = ActorCritic::new(2, 3, ActorCriticParams { gamma: 0.95, ..params() }).unwrap();
        assert_eq!(ac.td_error(-1.0, 0, Some(1), false).unwrap(), -1.0);

        let mut ac9 = ActorCritic::new(2, 3, params()).unwrap();
        ac9.value_weights_mut()[1] = 1.0;
        ac9.value_weights_mut()[0] = 0.9;
        assert!(ac9.td_error(0.0, 0, Some(1), false).unwrap().abs() < 1e-15);

        let mut ac = ActorCritic::new(2, 3, params()).unwrap();
        ac.value_weights_mut()[2] = 0.5;
        assert_eq!(ac.td_error(0.0, 2, None, true).unwrap(), -0.5);
        assert!(ac.td_error(f64::INFINITY, 2, None, true).is_err());
    }

    #[test]
    fn update_arithmetic() {
        let mut ac = ActorCritic::new(2, 2, params()).unwrap();
        ac.update(-1.0).unwrap();
        assert_eq!(ac.value_weights(), &[0.0, 0.0]);

        ac.tag_critic(0);
        let before = ac.clone();
        ac.update(0.0).unwrap();
        assert_eq!(ac, before);
        ac.update(-1.0).unwrap();
        assert!((ac.value_weights()[0] + 0.1).abs() < 1e-15);
        assert_eq!(ac.value_weights()[1], 0.0);
        assert!(ac.update(f64::NAN).is_err());
    }

    #[test]
    fn trace_decay() {
        let mut ac = ActorCritic::new(
            2,
            1,
            ActorCriticParams {
                tau_a: 1.0,
                tau_c: 20.0,
                ..params()
            },
        )
        .unwrap();
        ac.tag_critic(0);
        ac.actors_mut()[0].tag(0, 0);
        ac.decay_traces();
        assert!((ac.critic_traces()[0] - 0.95).abs() < 1e-15);
        assert_eq!(ac.actors()[0].trace(0, 0), 0.0);
        assert_eq!(ac.actors()[0].trace(1, 0), 0.0);
    }

    #[test]
    fn epsilon_schedule() {
        let s = EpsilonSchedule {
            epsilon_min: 0.01,
            decay_episodes: 500,
        };
        assert_eq!(s.epsilon_at(0), 1.0);
        assert!((s.epsilon_at(250) - 0.505).abs() < 1e-12);
        assert_eq!(s.epsilon_at(500), 0.01);
        assert_eq!(s.epsilon_at(10_000), 0.01);
    }

    #[test]
    fn independent_action_groups_share_critic() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let mut ac = ActorCritic::with_groups(&[2, 3], 4, params()).unwrap();
        ac.actors_mut()[1].set_weight(2, 3, 1.0);
        let joint = ac.select_joint_action(3, 0.0, &mut rng).unwrap();
        assert_eq!(joint, vec![0, 2]);
        ac.update(1.0).unwrap();
        assert!((ac.value_weights()[3] - 0.1).abs() < 1e-15);
        assert!((ac.actors()[0].weight(0, 3) - 0.1).abs() < 1e-15);
        assert!((ac.actors()[1].weight(2, 3) - 1.1).abs() < 1e-15);
    }

    proptest! {
        #[test]
        fn argmax_ignores_column_shift(
            col in proptest::collection::vec(-10.0f64..10.0, 2..6),
            shift in -100.0f64..100.0,
        ) {
            let mut rng = ChaCha8Rng::seed_from_u64(0);
            let mut a = with_column(&col);
            let shifted: Vec<f64> = col.iter().map(|w| w + shift).collect();
            let mut b = with_column(&shifted);
            // skip columns where the shift changes floating-point ordering
            let order_kept = (0..col.len()).all(|i| (0..col.len()).all(|j| {
                (col[i] > col[j]) == (shifted[i] > shifted[j])
            }));
            prop_assume!(order_kept);
            prop_assert_eq!(
                a.select_action(1, 0.0, &mut rng).unwrap(),
                b.select_action(1, 0.0, &mut rng).unwrap()
            );
        }

        #[test]
        fn traces_stay_in_unit_interval(ops in proptest::collection::vec((0u8..3, 0usize..4, 0.0f64..1.0), 1..300)) {
            let mut rng = ChaCha8Rng::seed_from_u64(1);
            let mut ac = ActorCritic::new(3, 4, ActorCriticParams { tau_a: 1.0, ..params() }).unwrap();
            for (op, h, eps) in ops {
                match op {
                    0 => { ac.select_action(h, eps, &mut rng).unwrap(); }
                    1 => ac.decay_traces(),
                    _ => ac.update(eps - 0.5).unwrap(),
                }
                prop_assert!(ac.critic_traces().iter().all(|c| (0.0..=1.0).contains(c)));
                for a in 0..3 {
                    for h in 0..4 {
                        prop_assert!((0.0..=1.0).contains(&ac.actors()[0].trace(a, h)));
                    }
                }
            }
        }
    }
}
