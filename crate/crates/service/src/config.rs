use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use opprog_core::categorize::CategoryLexicon;
use opprog_core::datakit::parse_dataset;
use opprog_core::evalkit::MatchConfig;
use opprog_core::opcore::{load_constants, load_registry, ConstTable, OpRegistry};

use crate::{EventLog, Platform};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ServiceConfig {
    pub host: String,
    pub port: u16,
    /// Dataset served to annotators.
    pub problems: Option<PathBuf>,
    /// Append-only event log; replayed at startup when it exists.
    pub event_log: Option<PathBuf>,
    pub registry: Option<PathBuf>,
    pub constants: Option<PathBuf>,
    pub lexicon: Option<PathBuf>,
    pub gate_abs_tol: f64,
    pub gate_rel_tol: f64,
    pub trust_threshold: f64,
}

impl Default for ServiceConfig {
    fn default() -> Self {
        let gate = MatchConfig::default();
        ServiceConfig {
            host: "127.0.0.1".into(),
            port: 8080,
            problems: None,
            event_log: None,
            registry: None,
            constants: None,
            lexicon: None,
            gate_abs_tol: gate.abs_tol,
            gate_rel_tol: gate.rel_tol,
            trust_threshold: 0.8,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io { path: PathBuf, source: std::io::Error },
    #[error("config: {0}")]
    Parse(String),
    #[error("environment variable {name}: {message}")]
    Env { name: String, message: String },
}

pub const ENV_PREFIX: &str = "OPPROG_";

impl ServiceConfig {
    pub fn from_toml(text: &str) -> Result<Self, ConfigError> {
        toml::from_str(text).map_err(|e| ConfigError::Parse(e.to_string()))
    }

    pub fn from_file(path: &Path) -> Result<Self, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml(&text)
    }

    /// Applies `OPPROG_*` overrides from `vars` (usually `std::env::vars()`).
    pub fn apply_env<I: IntoIterator<Item = (String, String)>>(&mut self, vars: I) -> Result<(), ConfigError> {
        for (key, value) in vars {
            let Some(name) = key.strip_prefix(ENV_PREFIX) else {
                continue;
            };
            let bad = |message: String| ConfigError::Env {
                name: key.clone(),
                message,
            };
            match name {
                "HOST" => self.host = value,
                "PORT" => self.port = value.parse().map_err(|e| bad(format!("{e}")))?,
                "PROBLEMS" => self.problems = Some(value.into()),
                "EVENT_LOG" => self.event_log = Some(value.into()),
                "REGISTRY" => self.registry = Some(value.into()),
                "CONSTANTS" => self.constants = Some(value.into()),
                "LEXICON" => self.lexicon = Some(value.into()),
                "GATE_ABS_TOL" => self.gate_abs_tol = value.parse().map_err(|e| bad(format!("{e}")))?,
                "GATE_REL_TOL" => self.gate_rel_tol = value.parse().map_err(|e| bad(format!("{e}")))?,
                "TRUST_THRESHOLD" => self.trust_threshold = value.parse().map_err(|e| bad(format!("{e}")))?,
                _ => {}
            }
        }
        Ok(())
    }

    pub fn gate(&self) -> MatchConfig {
        MatchConfig {
            abs_tol: self.gate_abs_tol,
            rel_tol: self.gate_rel_tol,
            ..MatchConfig::default()
        }
    }

    pub fn check(&self) -> Result<(), ConfigError> {
        self.gate().check().map_err(ConfigError::Parse)?;
        if !(0.0..=1.0).contains(&self.trust_threshold) {
            return Err(ConfigError::Parse("trust_threshold must be within [0, 1]".into()));
        }
        Ok(())
    }
}

fn read(path: &Path) -> Result<String, ConfigError> {
    std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
        path: path.to_path_buf(),
        source,
    })
}

/// Loads data files named by `cfg` (shipped defaults otherwise) and replays
/// the event log if one exists.
pub fn build_platform(cfg: &ServiceConfig) -> Result<Platform, ConfigError> {
    cfg.check()?;
    let registry = match &cfg.registry {
        Some(p) => load_registry(&read(p)?).map_err(|e| ConfigError::Parse(format!("{}: {e}", p.display())))?,
        None => OpRegistry::shipped(),
    };
    let consts = match &cfg.constants {
        Some(p) => load_constants(&read(p)?).map_err(|e| ConfigError::Parse(format!("{}: {e}", p.display())))?,
        None => ConstTable::shipped(),
    };
    let lexicon = match &cfg.lexicon {
        Some(p) => {
            CategoryLexicon::parse(&read(p)?).map_err(|e| ConfigError::Parse(format!("{}: {e}", p.display())))?
        }
        None => CategoryLexicon::shipped(),
    };
    let problems = match &cfg.problems {
        Some(p) => parse_dataset(&read(p)?).map_err(ConfigError::Parse)?.0,
        None => Vec::new(),
    };
    let mut platform = Platform::new(problems, registry, consts, lexicon, cfg.gate(), cfg.trust_threshold);
    if let Some(path) = &cfg.event_log {
        let (log, existing) = EventLog::open(path).map_err(|source| ConfigError::Io {
            path: path.clone(),
            source,
        })?;
        platform = platform.with_log(log);
        platform
            .replay(&existing)
            .map_err(|e| ConfigError::Parse(format!("replaying {}: {e}", path.display())))?;
    }
    Ok(platform)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn file_then_env() {
        let mut c = ServiceConfig::from_toml("port = 9000\ntrust_threshold = 0.5\n").unwrap();
        assert_eq!(c.port, 9000);
        c.apply_env([
            ("OPPROG_PORT".to_string(), "9100".to_string()),
            ("HOME".to_string(), "/root".to_string()),
        ])
        .unwrap();
        assert_eq!(c.port, 9100);
        assert_eq!(c.trust_threshold, 0.5);
        assert_eq!(c.gate_abs_tol, 0.01);
    }

    #[test]
    fn rejects_unknown_keys_and_bad_values() {
        assert!(ServiceConfig::from_toml("prot = 1").is_err());
        let mut c = ServiceConfig::default();
        assert!(c.apply_env([("OPPROG_PORT".to_string(), "x".to_string())]).is_err());
        c.trust_threshold = 2.0;
        assert!(c.check().is_err());
    }
}
