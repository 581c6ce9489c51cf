use std::collections::BTreeMap;

use rand::{Rng, RngCore};

use super::{check_action, EnvSpec, Environment, Objective, StepResult};
use crate::error::Result;

pub const MIN_POSITION: f64 = -1.2;
pub const MAX_POSITION: f64 = 0.6;
pub const MAX_SPEED: f64 = 0.07;
pub const GOAL_POSITION: f64 = 0.5;
pub const FORCE: f64 = 0.001;
pub const GRAVITY: f64 = 0.0025;
pub const TIME_LIMIT: usize = 200;

/// Under-powered car in a valley; actions are push left, no push, push right.
#[derive(Clone, Debug)]
pub struct MountainCar {
    spec: EnvSpec,
    position: f64,
    velocity: f64,
    steps: usize,
}

impl Default for MountainCar {
    fn default() -> Self {
        Self::new()
    }
}

impl MountainCar {
    pub fn new() -> Self {
        let constants = BTreeMap::from([
            ("min_position".to_string(), MIN_POSITION),
            ("max_position".to_string(), MAX_POSITION),
            ("max_speed".to_string(), MAX_SPEED),
            ("goal_position".to_string(), GOAL_POSITION),
            ("force".to_string(), FORCE),
            ("gravity".to_string(), GRAVITY),
        ]);
        Self {
            spec: EnvSpec {
                name: "mountain_car".into(),
                observation_dim: 2,
                action_count: 3,
                time_limit: TIME_LIMIT,
                bounds: vec![(MIN_POSITION, MAX_POSITION), (-MAX_SPEED, MAX_SPEED)],
                objective: Objective::LowerIsBetter,
                constants,
            },
            position: -0.5,
            velocity: 0.0,
            steps: 0,
        }
    }

    pub fn state(&self) -> (f64, f64) {
        (self.position, self.velocity)
    }

    pub fn set_state(&mut self, position: f64, velocity: f64) {
        self.position = position;
        self.velocity = velocity;
    }
}

impl Environment for MountainCar {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        self.position = rng.gen_range(-0.6..-0.4);
        self.velocity = 0.0;
        self.steps = 0;
        vec![self.position, self.velocity]
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        check_action(action, &self.spec)?;
        let push = action as f64 - 1.0;
        self.velocity += push * FORCE - GRAVITY * (3.0 * self.position).cos();
        self.velocity = self.velocity.clamp(-MAX_SPEED, MAX_SPEED);
        self.position += self.velocity;
        self.position = self.position.clamp(MIN_POSITION, MAX_POSITION);
        // inelastic left wall
        if self.position == MIN_POSITION && self.velocity < 0.0 {
            self.velocity = 0.0;
        }
        self.steps += 1;
        let terminal = self.position >= GOAL_POSITION;
        Ok(StepResult {
            observation: vec![self.position, self.velocity],
            reward: if terminal { 0.0 } else { -1.0 },
            terminal,
            truncated: !terminal && self.steps >= TIME_LIMIT,
        })
    }
}
