//! Tuned configurations shipped with the crate.
//!
//! Letters follow the environment: `a` mountain car, `b` cart-pole, `c`
//! acrobot with two clustering layers and `d` acrobot with a single layer
//! (the tabular baseline has `a` to `c` only).

use crate::agent::AgentConfig;
use crate::baselines::TacConfig;
use crate::error::{Error, Result};
use crate::harness::config::{AgentSpec, ExperimentConfig};

pub const PROPOSED_A: &str = include_str!("../presets/proposed_a.toml");
pub const PROPOSED_B: &str = include_str!("../presets/proposed_b.toml");
pub const PROPOSED_C: &str = include_str!("../presets/proposed_c.toml");
pub const PROPOSED_D: &str = include_str!("../presets/proposed_d.toml");
pub const TAC_A: &str = include_str!("../presets/tac_a.toml");
pub const TAC_B: &str = include_str!("../presets/tac_b.toml");
pub const TAC_C: &str = include_str!("../presets/tac_c.toml");

pub fn proposed_source(letter: char) -> Result<&'static str> {
    match letter {
        'a' => Ok(PROPOSED_A),
        'b' => Ok(PROPOSED_B),
        'c' => Ok(PROPOSED_C),
        'd' => Ok(PROPOSED_D),
        _ => Err(Error::config("preset", format!("unknown preset `{letter}`, expected a-d"))),
    }
}

pub fn tac_source(letter: char) -> Result<&'static str> {
    match letter {
        'a' => Ok(TAC_A),
        'b' => Ok(TAC_B),
        'c' => Ok(TAC_C),
        _ => Err(Error::config("preset", format!("unknown TAC preset `{letter}`, expected a-c"))),
    }
}

pub fn proposed_experiment(letter: char) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml_str(proposed_source(letter)?)
}

pub fn tac_experiment(letter: char) -> Result<ExperimentConfig> {
    ExperimentConfig::from_toml_str(tac_source(letter)?)
}

pub fn proposed(letter: char) -> Result<AgentConfig> {
    match proposed_experiment(letter)?.agent {
        AgentSpec::Proposed(cfg) => Ok(cfg),
        _ => unreachable!("proposed presets describe the proposed agent"),
    }
}

pub fn tac(letter: char) -> Result<TacConfig> {
    match tac_experiment(letter)?.agent {
        AgentSpec::Tac(cfg) => Ok(cfg),
        _ => unreachable!("TAC presets describe the tabular agent"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::env::EnvKind;

    #[test]
    fn all_presets_parse() {
        for l in ['a', 'b', 'c', 'd'] {
            proposed_experiment(l).unwrap();
        }
        for l in ['a', 'b', 'c'] {
            tac_experiment(l).unwrap();
        }
        assert!(proposed('e').is_err());
        assert!(tac('d').is_err());
    }

    #[test]
    fn table_values() {
        let b = proposed('b').unwrap();
        assert_eq!(b.layer1.neurons, 100);
        assert_eq!(b.layer1.eta_td, 0.1);
        assert_eq!((b.layer1.eta.initial, b.layer1.eta.factor, b.layer1.eta.episodes), (1e-3, 1e-3, 100));
        assert_eq!((b.actor_critic.tau_a, b.actor_critic.tau_c), (50.0, 10.0));
        let c = proposed_experiment('c').unwrap();
        assert_eq!(c.environment, EnvKind::Acrobot);
        let tc = tac('c').unwrap();
        assert_eq!((tc.bins, tc.actor_critic.gamma), (10, 0.9));
    }
}
