use std::collections::BTreeMap;
use std::f64::consts::PI;

use rand::{Rng, RngCore};

use super::{check_action, EnvSpec, Environment, Objective, StepResult};
use crate::error::Result;

pub const DT: f64 = 0.2;
pub const LINK_LENGTH_1: f64 = 1.0;
pub const LINK_MASS_1: f64 = 1.0;
pub const LINK_MASS_2: f64 = 1.0;
pub const LINK_COM_1: f64 = 0.5;
pub const LINK_COM_2: f64 = 0.5;
pub const LINK_MOI: f64 = 1.0;
pub const GRAVITY: f64 = 9.8;
pub const MAX_VEL_1: f64 = 4.0 * PI;
pub const MAX_VEL_2: f64 = 9.0 * PI;
pub const TIME_LIMIT: usize = 500;

const TORQUES: [f64; 3] = [-1.0, 0.0, 1.0];

/// Two-link pendulum actuated at the elbow, integrated with one RK4 step per
/// action. The goal is to raise the tip one link length above the pivot.
#[derive(Clone, Debug)]
pub struct Acrobot {
    spec: EnvSpec,
    /// `[theta1, theta2, omega1, omega2]`
    state: [f64; 4],
    steps: usize,
}

impl Default for Acrobot {
    fn default() -> Self {
        Self::new()
    }
}

impl Acrobot {
    pub fn new() -> Self {
        let constants = BTreeMap::from([
            ("dt".to_string(), DT),
            ("link_length_1".to_string(), LINK_LENGTH_1),
            ("link_mass_1".to_string(), LINK_MASS_1),
            ("link_mass_2".to_string(), LINK_MASS_2),
            ("link_com_1".to_string(), LINK_COM_1),
            ("link_com_2".to_string(), LINK_COM_2),
            ("link_moi".to_string(), LINK_MOI),
            ("gravity".to_string(), GRAVITY),
            ("max_vel_1".to_string(), MAX_VEL_1),
            ("max_vel_2".to_string(), MAX_VEL_2),
        ]);
        Self {
            spec: EnvSpec {
                name: "acrobot".into(),
                observation_dim: 6,
                action_count: 3,
                time_limit: TIME_LIMIT,
                bounds: vec![
                    (-1.0, 1.0),
                    (-1.0, 1.0),
                    (-1.0, 1.0),
                    (-1.0, 1.0),
                    (-MAX_VEL_1, MAX_VEL_1),
                    (-MAX_VEL_2, MAX_VEL_2),
                ],
                objective: Objective::LowerIsBetter,
                constants,
            },
            state: [0.0; 4],
            steps: 0,
        }
    }

    pub fn state(&self) -> [f64; 4] {
        self.state
    }

    pub fn set_state(&mut self, state: [f64; 4]) {
        self.state = state;
    }

    fn observe(&self) -> Vec<f64> {
        let [t1, t2, w1, w2] = self.state;
        vec![t1.cos(), t1.sin(), t2.cos(), t2.sin(), w1, w2]
    }

    fn tip_height(&self) -> f64 {
        let [t1, t2, ..] = self.state;
        -t1.cos() - (t2 + t1).cos()
    }
}

fn derivatives(s: [f64; 4], torque: f64) -> [f64; 4] {
    let (m1, m2, l1) = (LINK_MASS_1, LINK_MASS_2, LINK_LENGTH_1);
    let (lc1, lc2) = (LINK_COM_1, LINK_COM_2);
    let (i1, i2) = (LINK_MOI, LINK_MOI);
    let g = GRAVITY;
    let [theta1, theta2, dtheta1, dtheta2] = s;

    let d1 = m1 * lc1 * lc1 + m2 * (l1 * l1 + lc2 * lc2 + 2.0 * l1 * lc2 * theta2.cos()) + i1 + i2;
    let d2 = m2 * (lc2 * lc2 + l1 * lc2 * theta2.cos()) + i2;
    let phi2 = m2 * lc2 * g * (theta1 + theta2 - PI / 2.0).cos();
    let phi1 = -m2 * l1 * lc2 * dtheta2 * dtheta2 * theta2.sin()
        - 2.0 * m2 * l1 * lc2 * dtheta2 * dtheta1 * theta2.sin()
        + (m1 * lc1 + m2 * l1) * g * (theta1 - PI / 2.0).cos()
        + phi2;
    let ddtheta2 = (torque + d2 / d1 * phi1 - m2 * l1 * lc2 * dtheta1 * dtheta1 * theta2.sin() - phi2)
        / (m2 * lc2 * lc2 + i2 - d2 * d2 / d1);
    let ddtheta1 = -(d2 * ddtheta2 + phi1) / d1;
    [dtheta1, dtheta2, ddtheta1, ddtheta2]
}

fn rk4(s: [f64; 4], torque: f64, dt: f64) -> [f64; 4] {
    let add = |a: [f64; 4], b: [f64; 4], h: f64| std::array::from_fn(|i| a[i] + h * b[i]);
    let k1 = derivatives(s, torque);
    let k2 = derivatives(add(s, k1, dt / 2.0), torque);
    let k3 = derivatives(add(s, k2, dt / 2.0), torque);
    let k4 = derivatives(add(s, k3, dt), torque);
    std::array::from_fn(|i| s[i] + dt / 6.0 * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i]))
}

fn wrap(x: f64) -> f64 {
    let span = 2.0 * PI;
    let mut x = x;
    while x > PI {
        x -= span;
    }
    while x < -PI {
        x += span;
    }
    x
}

impl Environment for Acrobot {
    fn spec(&self) -> &EnvSpec {
        &self.spec
    }

    fn reset(&mut self, rng: &mut dyn RngCore) -> Vec<f64> {
        for s in &mut self.state {
            *s = rng.gen_range(-0.1..0.1);
        }
        self.steps = 0;
        self.observe()
    }

    fn step(&mut self, action: usize) -> Result<StepResult> {
        check_action(action, &self.spec)?;
        let next = rk4(self.state, TORQUES[action], DT);
        self.state = [
            wrap(next[0]),
            wrap(next[1]),
            next[2].clamp(-MAX_VEL_1, MAX_VEL_1),
            next[3].clamp(-MAX_VEL_2, MAX_VEL_2),
        ];
        self.steps += 1;
        let terminal = self.tip_height() > 1.0;
        Ok(StepResult {
            observation: self.observe(),
            reward: if terminal { 0.0 } else { -1.0 },
            terminal,
            truncated: !terminal && self.steps >= TIME_LIMIT,
        })
    }
}
