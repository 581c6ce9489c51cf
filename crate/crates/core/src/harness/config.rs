use serde::{Deserialize, Serialize};

use crate::agent::AgentConfig;
use crate::baselines::TacConfig;
use crate::env::EnvKind;
use crate::error::{Error, Result};

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum AgentSpec {
    Proposed(AgentConfig),
    Tac(TacConfig),
    Random,
}

impl AgentSpec {
    pub fn kind(&self) -> &'static str {
        match self {
            AgentSpec::Proposed(_) => "proposed",
            AgentSpec::Tac(_) => "tac",
            AgentSpec::Random => "random",
        }
    }
}

/// One agent on one environment for a fixed number of episodes.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub id: String,
    pub environment: EnvKind,
    pub episodes: usize,
    /// Trailing episodes summarised by [`crate::harness::stats::summarize`].
    pub window: usize,
    pub agent: AgentSpec,
}

impl ExperimentConfig {
    pub fn from_toml_str(source: &str) -> Result<Self> {
        let value: toml::Value =
            toml::from_str(source).map_err(|e| Error::config("<document>", e.message().to_string()))?;
        Self::from_toml_value(value)
    }

    /// Deserialises with the failing key path in any schema error.
    pub fn from_toml_value(mut value: toml::Value) -> Result<Self> {
        let table = value
            .as_table_mut()
            .ok_or_else(|| Error::config("<document>", "expected a table"))?;
        let mut agent = table
            .remove("agent")
            .ok_or_else(|| Error::config("agent", "missing table"))?;
        let header: Header = with_path("", value)?;
        let agent_table = agent
            .as_table_mut()
            .ok_or_else(|| Error::config("agent", "expected a table"))?;
        let kind = match agent_table.remove("kind") {
            Some(toml::Value::String(k)) => k,
            Some(_) => return Err(Error::config("agent.kind", "expected a string")),
            None => return Err(Error::config("agent.kind", "missing field")),
        };
        let agent = match kind.as_str() {
            "proposed" => AgentSpec::Proposed(with_path("agent", agent)?),
            "tac" => AgentSpec::Tac(with_path("agent", agent)?),
            "random" if agent_table.is_empty() => AgentSpec::Random,
            "random" => return Err(Error::config("agent", "the random agent takes no parameters")),
            other => {
                return Err(Error::config(
                    "agent.kind",
                    format!("unknown agent `{other}`, expected proposed, tac or random"),
                ))
            }
        };
        let config = Self {
            id: header.id,
            environment: header.environment,
            episodes: header.episodes,
            window: header.window,
            agent,
        };
        config.validate()?;
        Ok(config)
    }

    pub fn from_path(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    pub fn to_toml_string(&self) -> String {
        toml::to_string(self).expect("experiment configs serialise to TOML")
    }

    pub fn validate(&self) -> Result<()> {
        if self.episodes == 0 {
            return Err(Error::config("episodes", "must be > 0"));
        }
        if self.window == 0 || self.window > self.episodes {
            return Err(Error::config(
                "window",
                format!("must be in 1..={} (got {})", self.episodes, self.window),
            ));
        }
        match &self.agent {
            AgentSpec::Proposed(cfg) => cfg.validate("agent"),
            AgentSpec::Tac(cfg) => cfg.validate("agent"),
            AgentSpec::Random => Ok(()),
        }
    }
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct Header {
    id: String,
    environment: EnvKind,
    episodes: usize,
    window: usize,
}

fn with_path<T: serde::de::DeserializeOwned>(prefix: &str, value: toml::Value) -> Result<T> {
    serde_path_to_error::deserialize(value).map_err(|e| {
        let path = e.path().to_string();
        let key = match (prefix.is_empty(), path == ".") {
            (true, true) => "<document>".to_string(),
            (true, false) => path,
            (false, true) => prefix.to_string(),
            (false, false) => format!("{prefix}.{path}"),
        };
        Error::config(key, e.into_inner().to_string())
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::presets;

    #[test]
    fn round_trips_through_toml() {
        for l in ['a', 'b', 'c', 'd'] {
            let cfg = presets::proposed_experiment(l).unwrap();
            let again = ExperimentConfig::from_toml_str(&cfg.to_toml_string()).unwrap();
            assert_eq!(cfg, again);
        }
        let tac = presets::tac_experiment('b').unwrap();
        assert_eq!(ExperimentConfig::from_toml_str(&tac.to_toml_string()).unwrap(), tac);
    }

    #[test]
    fn random_agent_config() {
        let cfg = ExperimentConfig::from_toml_str(
            "id = \"r\"\nenvironment = \"mountain_car\"\nepisodes = 10\nwindow = 5\n[agent]\nkind = \"random\"\n",
        )
        .unwrap();
        assert_eq!(cfg.agent, AgentSpec::Random);
    }

    #[test]
    fn schema_errors_name_the_key() {
        let src = presets::PROPOSED_B.replace("gamma = 0.95", "gamma = \"high\"");
        match ExperimentConfig::from_toml_str(&src).unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "agent.actor_critic.gamma"),
            e => panic!("{e}"),
        }
        let src = presets::PROPOSED_B.replace("window = 1000", "window = 5000");
        match ExperimentConfig::from_toml_str(&src).unwrap_err() {
            Error::Config { key, .. } => assert_eq!(key, "window"),
            e => panic!("{e}"),
        }
        let src = presets::PROPOSED_B.replace("eta_td = 0.1", "eta_td = 0.1\nbogus = 1");
        match ExperimentConfig::from_toml_str(&src).unwrap_err() {
            Error::Config { key, message } => {
                assert!(key.starts_with("agent"), "{key}");
                assert!(message.contains("bogus"), "{message}");
            }
            e => panic!("{e}"),
        }
    }
}
