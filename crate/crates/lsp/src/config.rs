//! Hub configuration: a `key = value` file.
//!
//! ```text
//! # comments and blank lines are ignored
//! dsl_prefix = ##
//! default_target = spark
//! downstream_cmd = pylsp --verbose
//! ```

use std::path::Path;

use tabledsl::Target;

pub const CONFIG_ENV: &str = "TABLEDSL_CONFIG";

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct HubConfig {
    pub dsl_prefix: String,
    pub default_target: Target,
    /// Program and arguments of a downstream language server.
    pub downstream_cmd: Option<Vec<String>>,
}

impl Default for HubConfig {
    fn default() -> HubConfig {
        HubConfig {
            dsl_prefix: "##".to_string(),
            default_target: Target::Pandas,
            downstream_cmd: None,
        }
    }
}

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },
    #[error("line {line}: expected `key = value`")]
    Syntax { line: usize },
    #[error("line {line}: unknown key `{key}`")]
    UnknownKey { line: usize, key: String },
    #[error("line {line}: invalid value for `{key}`: {value:?}")]
    InvalidValue {
        line: usize,
        key: &'static str,
        value: String,
    },
}

impl HubConfig {
    pub fn parse(text: &str) -> Result<HubConfig, ConfigError> {
        let mut config = HubConfig::default();
        for (i, raw) in text.lines().enumerate() {
            let line = i + 1;
            let trimmed = raw.trim();
            if trimmed.is_empty() || (trimmed.starts_with('#') && !trimmed.contains('=')) {
                continue;
            }
            let (key, value) = trimmed
                .split_once('=')
                .ok_or(ConfigError::Syntax { line })?;
            let (key, value) = (key.trim(), value.trim());
            match key {
                "dsl_prefix" => {
                    if value.is_empty() {
                        return Err(ConfigError::InvalidValue {
                            line,
                            key: "dsl_prefix",
                            value: value.into(),
                        });
                    }
                    config.dsl_prefix = value.to_string();
                }
                "default_target" => {
                    config.default_target =
                        Target::from_keyword(value).ok_or_else(|| ConfigError::InvalidValue {
                            line,
                            key: "default_target",
                            value: value.into(),
                        })?;
                }
                "downstream_cmd" => {
                    let argv: Vec<String> = value.split_whitespace().map(str::to_string).collect();
                    config.downstream_cmd = (!argv.is_empty()).then_some(argv);
                }
                other => {
                    return Err(ConfigError::UnknownKey {
                        line,
                        key: other.to_string(),
                    })
                }
            }
        }
        Ok(config)
    }

    pub fn load(path: &Path) -> Result<HubConfig, ConfigError> {
        let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Io {
            path: path.display().to_string(),
            source,
        })?;
        HubConfig::parse(&text)
    }

    /// Loads from `path`, else from `$TABLEDSL_CONFIG`, else defaults.
    pub fn resolve(path: Option<&Path>) -> Result<HubConfig, ConfigError> {
        match path {
            Some(path) => HubConfig::load(path),
            None => match std::env::var_os(CONFIG_ENV) {
                Some(env) => HubConfig::load(Path::new(&env)),
                None => Ok(HubConfig::default()),
            },
        }
    }
}
