//! Experiment spec files.
//!
//! A spec names an arm, its environment and actuator switch, and any
//! overrides of the evolution defaults:
//!
//! ```json
//! {
//!   "format_version": 1,
//!   "name": "experiment2_rough",
//!   "environment": { "kind": "rough", "seed": 7 },
//!   "linear_actuator_enabled": false,
//!   "overrides": { "runs": 20, "sim": { "duration": 30.0 } },
//!   "output_dir": "out/experiment2_rough"
//! }
//! ```
//!
//! Overrides are merged field by field onto the defaults, so nested
//! sections may be partial.

use std::path::{Path, PathBuf};

use morphevo_core::evolution::EvolutionConfig;
use morphevo_core::terrain::Environment;
use serde::{Deserialize, Serialize};
use serde_json::{Map, Value};

use crate::documents::{self, FORMAT_VERSION};
use crate::Error;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentSpec {
    pub format_version: u32,
    pub name: String,
    pub environment: Environment,
    pub linear_actuator_enabled: bool,
    #[serde(default = "empty_object")]
    pub overrides: Value,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

fn empty_object() -> Value {
    Value::Object(Map::new())
}

/// Scaled-down settings for a quick end-to-end check.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Smoke {
    pub mu: usize,
    pub lambda: usize,
    pub generations: usize,
    pub runs: usize,
}

pub const SMOKE: Smoke = Smoke {
    mu: 8,
    lambda: 4,
    generations: 5,
    runs: 2,
};

fn merge(base: &mut Value, patch: &Value, path: &str) -> Result<(), Error> {
    match (base, patch) {
        (Value::Object(b), Value::Object(p)) => {
            for (k, v) in p {
                let sub = if path.is_empty() { k.clone() } else { format!("{path}.{k}") };
                match b.get_mut(k) {
                    Some(slot) if slot.is_object() && v.is_object() => merge(slot, v, &sub)?,
                    Some(slot) => *slot = v.clone(),
                    None => return Err(Error::Config(format!("overrides.{sub}: unknown field"))),
                }
            }
            Ok(())
        }
        (_, _) => Err(Error::Config(format!("overrides{}: expected an object", if path.is_empty() { String::new() } else { format!(".{path}") }))),
    }
}

impl ExperimentSpec {
    pub fn load(path: &Path) -> Result<Self, Error> {
        let spec: ExperimentSpec = documents::read(path)?;
        spec.check()?;
        Ok(spec)
    }

    pub fn check(&self) -> Result<(), Error> {
        if self.format_version != FORMAT_VERSION {
            return Err(Error::Config(format!("format_version: unsupported value {}", self.format_version)));
        }
        let safe = !self.name.is_empty()
            && self
                .name
                .chars()
                .all(|c| c.is_ascii_alphanumeric() || c == '_' || c == '-' || c == '.')
            && !self.name.starts_with('.');
        if !safe {
            return Err(Error::Config(format!("name: `{}` is not a filesystem-safe name", self.name)));
        }
        self.environment
            .build()
            .map_err(|e| Error::Config(format!("environment: {e}")))?;
        self.config().map(|_| ())
    }

    /// The resolved evolution configuration.
    pub fn config(&self) -> Result<EvolutionConfig, Error> {
        let mut base = serde_json::to_value(EvolutionConfig::default()).expect("config serializes");
        merge(&mut base, &self.overrides, "")?;
        let mut config: EvolutionConfig =
            serde_json::from_value(base).map_err(|e| Error::Config(format!("overrides: {e}")))?;
        config.environment = self.environment;
        config.decode.linear_actuator_enabled = self.linear_actuator_enabled;
        if let Some(field) = config.invalid_field() {
            return Err(Error::Config(field));
        }
        Ok(config)
    }
}

/// Applies the smoke sizes.
pub fn smoke(mut config: EvolutionConfig) -> EvolutionConfig {
    config.mu = SMOKE.mu;
    config.lambda = SMOKE.lambda;
    config.generations = SMOKE.generations;
    config.runs = SMOKE.runs;
    config
}

#[cfg(test)]
mod tests {
    use super::*;

    fn spec(overrides: &str) -> ExperimentSpec {
        documents::from_str(&format!(
            r#"{{"format_version": 1, "name": "t", "environment": {{"kind": "plain"}},
                "linear_actuator_enabled": false, "overrides": {overrides}}}"#
        ))
        .unwrap()
    }

    #[test]
    fn defaults_without_overrides() {
        let c = spec("{}").config().unwrap();
        assert_eq!((c.mu, c.lambda, c.generations, c.runs), (100, 50, 300, 20));
        assert!(!c.linear_actuator_enabled());
    }

    #[test]
    fn nested_partial_override() {
        let c = spec(r#"{"mu": 20, "lambda": 10, "sim": {"duration": 10.0}}"#).config().unwrap();
        assert_eq!((c.mu, c.lambda), (20, 10));
        assert_eq!(c.sim.duration, 10.0);
        assert_eq!(c.sim.dt, 0.005);
    }

    #[test]
    fn errors_name_the_field() {
        let e = spec(r#"{"sim": {"dtt": 1}}"#).config().unwrap_err();
        assert!(e.to_string().contains("sim.dtt"), "{e}");
        let e = spec(r#"{"lambda": 0}"#).config().unwrap_err();
        assert!(e.to_string().contains("lambda"), "{e}");
        let e = spec(r#"{"sim": {"dt": -1.0}}"#).config().unwrap_err();
        assert!(e.to_string().contains("sim.dt"), "{e}");
        let mut s = spec("{}");
        s.name = "../x".into();
        assert!(s.check().unwrap_err().to_string().contains("name"));
    }
}
