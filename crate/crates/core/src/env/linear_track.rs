use std::collections::BTreeMap;

use rand::RngCore;

use super::{EnvSpec, Environment, Objective, StepResult};
use crate::error::Result;

pub const TRACK_LENGTH: usize = 100;
pub const REWARD_POSITION: usize = 90;

/// Positions `1..=100`, one forced step to the right per tick. Entering
/// position 90 pays +1; reaching position 100 ends the episode.
#[derive(Clone, Debug)]
pub struct LinearTrack {
    spec: EnvSpec,
    position: usize,
}

impl Default for LinearTrack {
    fn default() -> Self {
        Self::new()
    }
}

impl LinearTrack {
    pub fn new() -> Self {
        Self {
            spec: EnvSpec {
                name: "linear_track".into(),
                observation_dim: 1,
                action_count: 1,
                time_limit: TRACK_LENGTH,
                bounds: vec![(1.0, TRACK_LENGTH as f64)],
                objective: Objective::LowerIsBetter,
                constants: BTreeMap::from([
                    ("track_length".to_string(), TRACK_LENGTH as f64),
                    ("reward_position".to_string(), REWARD_POSITION as f64),
                ]),
            },
            position: 1,
        }
    }

    pub fn position(&self) -> usize {
        self.position
    }

    pub fn set_position(&mut self, position: usize) {
        self.position = position.clamp(1, TRACK_LENGTH);
    }
}

impl Environment for LinearTrack {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, _rng: &mut dyn RngCore) -> Vec<f64> {
        self.position = 1;
        vec![1.0]
    }

    /// Every action advances the agent.
    fn step(&mut self, _action: usize) -> Result<StepResult> {
        if self.position >= TRACK_LENGTH {
            self.position = 1;
        }
        self.position += 1;
        Ok(StepResult {
            observation: vec![self.position as f64],
            reward: if self.position == REWARD_POSITION { 1.0 } else { 0.0 },
            terminal: self.position == TRACK_LENGTH,
            truncated: false,
        })
    }
}
