use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// A rate that moves linearly from `initial` to `initial * factor` over
/// `episodes` episodes and stays there afterwards.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DecaySchedule {
    pub initial: f64,
    #[serde(default = "one")]
    pub factor: f64,
    #[serde(default)]
    pub episodes: usize,
}

fn one() -> f64 {
    1.0
}

impl DecaySchedule {
    pub fn new(initial: f64, factor: f64, episodes: usize) -> Self {
        Self {
            initial,
            factor,
            episodes,
        }
    }

    pub fn constant(value: f64) -> Self {
        Self::new(value, 1.0, 0)
    }

    pub fn value_at(&self, episode: usize) -> f64 {
        if self.episodes == 0 || self.factor == 1.0 {
            return self.initial;
        }
        let progress = (episode as f64 / self.episodes as f64).min(1.0);
        self.initial * (1.0 - (1.0 - self.factor) * progress)
    }

    /// Checks that every scheduled value is strictly positive and non-increasing.
    pub fn validate(&self, key: &str) -> Result<()> {
        if !(self.initial.is_finite() && self.initial > 0.0) {
            return Err(Error::config(
                format!("{key}.initial"),
                format!("must be finite and > 0, got {}", self.initial),
            ));
        }
        if !(self.factor > 0.0 && self.factor <= 1.0) {
            return Err(Error::config(
                format!("{key}.factor"),
                format!("must lie in (0, 1], got {}", self.factor),
            ));
        }
        if self.factor != 1.0 && self.episodes == 0 {
            return Err(Error::config(
                format!("{key}.episodes"),
                "a decaying schedule needs a decay time > 0",
            ));
        }
        Ok(())
    }
}
