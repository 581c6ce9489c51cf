//! Benchmark and diagnostic environments behind one reset/step contract.
//!
//! Physics constants follow the classic-control definitions and are exported
//! through [`EnvSpec::constants`] so that a run manifest pins them.

pub mod acrobot;
pub mod cart_pole;
pub mod linear_track;
pub mod mixture;
pub mod mountain_car;

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::RngCore;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use acrobot::Acrobot;
pub use cart_pole::CartPole;
pub use linear_track::LinearTrack;
pub use mixture::GaussianMixture;
pub use mountain_car::MountainCar;

/// Whether a longer episode is better (balancing) or worse (goal reaching).
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Objective {
    LowerIsBetter,
    HigherIsBetter,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct EnvSpec {
    pub name: String,
    pub observation_dim: usize,
    pub action_count: usize,
    pub time_limit: usize,
    /// Per-dimension `(low, high)`; emitted observations are clipped to these.
    pub bounds: Vec<(f64, f64)>,
    pub objective: Objective,
    pub constants: BTreeMap<String, f64>,
}

#[derive(Clone, Debug, PartialEq)]
pub struct StepResult {
    pub observation: Vec<f64>,
    pub reward: f64,
    pub terminal: bool,
    pub truncated: bool,
}

pub trait Environment: Send {
    fn spec(&self) -> &EnvSpec;

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64>;

    fn step(&mut self, action: usize) -> Result<StepResult>;
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EnvKind {
    MountainCar,
    CartPole,
    Acrobot,
    LinearTrack,
}

impl EnvKind {
    pub const ALL: [EnvKind; 4] = [
        EnvKind::MountainCar,
        EnvKind::CartPole,
        EnvKind::Acrobot,
        EnvKind::LinearTrack,
    ];

    pub fn name(self) -> &'static str {
        match self {
            EnvKind::MountainCar => "mountain_car",
            EnvKind::CartPole => "cart_pole",
            EnvKind::Acrobot => "acrobot",
            EnvKind::LinearTrack => "linear_track",
        }
    }

    pub fn make(self) -> Box<dyn Environment> {
        match self {
            EnvKind::MountainCar => Box::new(MountainCar::new()),
            EnvKind::CartPole => Box::new(CartPole::new()),
            EnvKind::Acrobot => Box::new(Acrobot::new()),
            EnvKind::LinearTrack => Box::new(LinearTrack::new()),
        }
    }

    pub fn spec(self) -> EnvSpec {
        self.make().spec().clone()
    }
}

impl fmt::Display for EnvKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for EnvKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        EnvKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::config("environment", format!("unknown environment `{s}`")))
    }
}

pub(crate) fn clip_to(bounds: &[(f64, f64)], obs: &mut [f64]) {
    for (x, &(lo, hi)) in obs.iter_mut().zip(bounds) {
        *x = x.clamp(lo, hi);
    }
}

pub(crate) fn check_action(action: usize, spec: &EnvSpec) -> Result<()> {
    if action >= spec.action_count {
        return Err(Error::Input(format!(
            "action {action} invalid for {} ({} actions)",
            spec.name, spec.action_count
        )));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn rollout(kind: EnvKind, seed: u64, episodes: usize) -> Vec<(Vec<f64>, f64, bool, bool)> {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut env = kind.make();
        let actions = env.spec().action_count;
        let mut out = Vec::new();
        for _ in 0..episodes {
            env.reset(&mut rng);
            loop {
                let a = (rand::Rng::gen::<u32>(&mut rng) as usize) % actions;
                let r = env.step(a).unwrap();
                let done = r.terminal || r.truncated;
                out.push((r.observation, r.reward, r.terminal, r.truncated));
                if done {
                    break;
                }
            }
        }
        out
    }

    #[test]
    fn same_seed_same_trajectory() {
        for kind in EnvKind::ALL {
            assert_eq!(rollout(kind, 5, 3), rollout(kind, 5, 3), "{kind}");
        }
    }

    #[test]
    fn observations_within_bounds_and_flags_exclusive() {
        for kind in EnvKind::ALL {
            let spec = kind.spec();
            assert!(spec.action_count >= 2 || kind == EnvKind::LinearTrack);
            assert!(spec.time_limit > 0);
            for (obs, _, terminal, truncated) in rollout(kind, 9, 5) {
                assert_eq!(obs.len(), spec.observation_dim);
                assert!(!(terminal && truncated));
                for (x, (lo, hi)) in obs.iter().zip(&spec.bounds) {
                    assert!(lo <= x && x <= hi, "{kind}: {x} outside [{lo}, {hi}]");
                }
            }
        }
    }

    #[test]
    fn return_matches_latency() {
        for kind in [EnvKind::MountainCar, EnvKind::CartPole, EnvKind::Acrobot] {
            let mut rng = ChaCha8Rng::seed_from_u64(2);
            let mut env = kind.make();
            let actions = env.spec().action_count;
            for _ in 0..20 {
                env.reset(&mut rng);
                let (mut steps, mut ret) = (0usize, 0.0);
                let (terminal, truncated) = loop {
                    let r = env.step(steps % actions).unwrap();
                    steps += 1;
                    ret += r.reward;
                    if r.terminal || r.truncated {
                        break (r.terminal, r.truncated);
                    }
                };
                let expected = match (kind, terminal) {
                    (EnvKind::CartPole, true) => steps as f64 - 1.0,
                    (EnvKind::CartPole, false) => steps as f64,
                    (_, true) => -(steps as f64 - 1.0),
                    (_, false) => -(steps as f64),
                };
                assert!(truncated || terminal);
                assert_eq!(ret, expected, "{kind}");
            }
        }
    }

    #[test]
    fn invalid_action_rejected() {
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        for kind in [EnvKind::MountainCar, EnvKind::CartPole, EnvKind::Acrobot] {
            let mut env = kind.make();
            env.reset(&mut rng);
            assert!(matches!(env.step(7), Err(Error::Input(_))));
        }
    }

    #[test]
    fn names_round_trip() {
        for kind in EnvKind::ALL {
            assert_eq!(kind.name().parse::<EnvKind>().unwrap(), kind);
        }
        assert!("pong".parse::<EnvKind>().is_err());
    }
}
