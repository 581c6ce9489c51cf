use std::collections::BTreeMap;

use rand::{Rng, RngCore};

use super::{check_action, clip_to, EnvSpec, Environment, Objective, StepResult};
use crate::error::Result;

pub const GRAVITY: f64 = 9.8;
pub const MASS_CART: f64 = 1.0;
pub const MASS_POLE: f64 = 0.1;
pub const HALF_LENGTH: f64 = 0.5;
pub const FORCE_MAG: f64 = 10.0;
pub const DT: f64 = 0.02;
pub const X_THRESHOLD: f64 = 2.4;
pub const THETA_THRESHOLD: f64 = 12.0 * 2.0 * std::f64::consts::PI / 360.0;
pub const CART_VELOCITY_CLIP: f64 = 3.0;
pub const POLE_VELOCITY_CLIP: f64 = 4.0;
pub const TIME_LIMIT: usize = 500;

/// Pole balanced on a cart, Euler-integrated; actions push left or right.
#[derive(Clone, Debug)]
pub struct CartPole {
    spec: EnvSpec,
    state: [f64; 4],
    steps: usize,
}

impl Default for CartPole {
    fn default() -> Self {
        Self::new()
    }
}

impl CartPole {
    pub fn new() -> Self {
        let constants = BTreeMap::from([
            ("gravity".to_string(), GRAVITY),
            ("mass_cart".to_string(), MASS_CART),
            ("mass_pole".to_string(), MASS_POLE),
            ("half_length".to_string(), HALF_LENGTH),
            ("force_mag".to_string(), FORCE_MAG),
            ("dt".to_string(), DT),
            ("x_threshold".to_string(), X_THRESHOLD),
            ("theta_threshold".to_string(), THETA_THRESHOLD),
        ]);
        Self {
            spec: EnvSpec {
                name: "cart_pole".into(),
                observation_dim: 4,
                action_count: 2,
                time_limit: TIME_LIMIT,
                bounds: vec![
                    (-X_THRESHOLD, X_THRESHOLD),
                    (-CART_VELOCITY_CLIP, CART_VELOCITY_CLIP),
                    (-THETA_THRESHOLD, THETA_THRESHOLD),
                    (-POLE_VELOCITY_CLIP, POLE_VELOCITY_CLIP),
                ],
                objective: Objective::HigherIsBetter,
                constants,
            },
            state: [0.0; 4],
            steps: 0,
        }
    }

    /// `[x, x_dot, theta, theta_dot]`, unclipped.
    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
    }

    fn observe(&self) -> Vec<f64> {
        let mut obs = self.state.to_vec();
        clip_to(&self.spec.bounds, &mut obs);
        obs
    }
}

impl Environment for CartPole {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        for s in &mut self.state {
            *s = rng.gen_range(-0.05..0.05);
        }
        self.steps = 0;
        self.observe()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        check_action(action, &self.spec)?;
        let [x, x_dot, theta, theta_dot] = self.state;
        let force = if action == 1 { FORCE_MAG } else { -FORCE_MAG };
        let total_mass = MASS_CART + MASS_POLE;
        let polemass_length = MASS_POLE * HALF_LENGTH;
        let (sin, cos) = theta.sin_cos();
        let temp = (force + polemass_length * theta_dot * theta_dot * sin) / total_mass;
        let theta_acc =
            (GRAVITY * sin - cos * temp) / (HALF_LENGTH * (4.0 / 3.0 - MASS_POLE * cos * cos / total_mass));
        let x_acc = temp - polemass_length * theta_acc * cos / total_mass;
        self.state = [
            x + DT * x_dot,
            x_dot + DT * x_acc,
            theta + DT * theta_dot,
            theta_dot + DT * theta_acc,
        ];
        self.steps += 1;
        let terminal = self.state[0].abs() > X_THRESHOLD || self.state[2].abs() > THETA_THRESHOLD;
        Ok(StepResult {
            observation: self.observe(),
            reward: if terminal { 0.0 } else { 1.0 },
            terminal,
            truncated: !terminal && self.steps >= TIME_LIMIT,
        })
    }
}
