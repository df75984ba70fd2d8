use std::collections::BTreeMap;
use std::path::PathBuf;

use serde::{Deserialize, Serialize};
use serde_json::Value;

use crate::error::{Error, Result};

pub const DEFAULT_CONFIG: &str = include_str!("../../configs/default.toml");

/// Parameters of one experiment run.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExperimentConfig {
    pub name: String,
    pub seed: u64,
    pub params: BTreeMap<String, Value>,
    #[serde(skip)]
    pub output_dir: Option<PathBuf>,
}

fn table_of(text: &str) -> Result<toml::Table> {
    Ok(text.parse::<toml::Table>()?)
}

fn to_json(v: &toml::Value) -> Result<Value> {
    Ok(serde_json::to_value(v)?)
}

impl ExperimentConfig {
    /// Shipped defaults for `id`, overlaid with the `[id]` table and the
    /// top-level `seed` of `user` when given. `seed` overrides both.
    pub fn load(id: &str, user: Option<&str>, seed: Option<u64>) -> Result<Self> {
        super::lookup(id)?;
        let defaults = table_of(DEFAULT_CONFIG)?;
        let mut cfg = Self::from_table(id, &defaults)?;
        if let Some(text) = user {
            let user = table_of(text)?;
            if let Some(s) = user.get("seed") {
                cfg.seed = seed_of(s)?;
            }
            if let Some(section) = user.get(id) {
                let section = section
                    .as_table()
                    .ok_or_else(|| Error::Config(format!("[{id}] must be a table")))?;
                for (k, v) in section {
                    if !cfg.params.contains_key(k) {
                        return Err(Error::Config(format!("unknown parameter `{k}` for {id}")));
                    }
                    cfg.params.insert(k.clone(), to_json(v)?);
                }
            }
        }
        if let Some(s) = seed {
            cfg.seed = s;
        }
        Ok(cfg)
    }

    fn from_table(id: &str, table: &toml::Table) -> Result<Self> {
        let seed = table
            .get("seed")
            .map(seed_of)
            .transpose()?
            .ok_or_else(|| Error::Config("missing top-level seed".into()))?;
        let mut params = BTreeMap::new();
        if let Some(section) = table.get(id).and_then(|v| v.as_table()) {
            for (k, v) in section {
                params.insert(k.clone(), to_json(v)?);
            }
        }
        Ok(Self {
            name: id.to_string(),
            seed,
            params,
            output_dir: None,
        })
    }

    fn get(&self, key: &str) -> Result<&Value> {
        self.params
            .get(key)
            .ok_or_else(|| Error::Config(format!("{}: missing parameter `{key}`", self.name)))
    }

    fn bad(&self, key: &str, want: &str) -> Error {
        Error::Config(format!("{}: parameter `{key}` must be {want}", self.name))
    }

    pub fn f64(&self, key: &str) -> Result<f64> {
        self.get(key)?.as_f64().ok_or_else(|| self.bad(key, "a number"))
    }

    pub fn usize(&self, key: &str) -> Result<usize> {
        self.get(key)?
            .as_u64()
            .map(|v| v as usize)
            .ok_or_else(|| self.bad(key, "a nonnegative integer"))
    }

    pub fn f64_list(&self, key: &str) -> Result<Vec<f64>> {
        self.get(key)?
            .as_array()
            .and_then(|a| a.iter().map(Value::as_f64).collect::<Option<Vec<_>>>())
            .ok_or_else(|| self.bad(key, "a list of numbers"))
    }

    pub fn usize_list(&self, key: &str) -> Result<Vec<usize>> {
        self.get(key)?
            .as_array()
            .and_then(|a| {
                a.iter()
                    .map(|v| v.as_u64().map(|u| u as usize))
                    .collect::<Option<Vec<_>>>()
            })
            .ok_or_else(|| self.bad(key, "a list of nonnegative integers"))
    }
}

fn seed_of(v: &toml::Value) -> Result<u64> {
    v.as_integer()
        .filter(|s| *s >= 0)
        .map(|s| s as u64)
        .ok_or_else(|| Error::Config("seed must be a nonnegative integer".into()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn defaults_cover_every_experiment() {
        for e in super::super::registry() {
            let cfg = ExperimentConfig::load(e.id, None, None).unwrap();
            assert!(!cfg.params.is_empty(), "{}", e.id);
        }
    }

    #[test]
    fn user_overrides() {
        let cfg = ExperimentConfig::load(
            "E7_taxis_length",
            Some("seed = 3\n[E7_taxis_length]\ntau = 2.0\n"),
            None,
        )
        .unwrap();
        assert_eq!(cfg.seed, 3);
        assert_eq!(cfg.f64("tau").unwrap(), 2.0);
        assert_eq!(cfg.usize("segments").unwrap(), 16);
        assert_eq!(
            ExperimentConfig::load("E7_taxis_length", None, Some(9))
                .unwrap()
                .seed,
            9
        );
        assert!(matches!(
            ExperimentConfig::load("E7_taxis_length", Some("[E7_taxis_length]\ntua = 1\n"), None),
            Err(Error::Config(_))
        ));
        assert!(matches!(
            ExperimentConfig::load("E0_nothing", None, None),
            Err(Error::UnknownExperiment(_))
        ));
    }
}
