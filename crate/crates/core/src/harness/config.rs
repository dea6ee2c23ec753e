//! Experiment configuration (TOML) and the bundled presets.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{CmabError, Result};
use crate::policies::PolicySpec;

use super::instances::InstanceSpec;

/// Presets shipped with the library: `(name, TOML text)`.
pub const PRESETS: &[(&str, &str)] = &[
    (
        "shortest_path_indep",
        include_str!("../../presets/shortest_path_indep.toml"),
    ),
    (
        "shortest_path_cond",
        include_str!("../../presets/shortest_path_cond.toml"),
    ),
    (
        "matching_gaussian",
        include_str!("../../presets/matching_gaussian.toml"),
    ),
    (
        "separated_msets",
        include_str!("../../presets/separated_msets.toml"),
    ),
    (
        "timing_table",
        include_str!("../../presets/timing_table.toml"),
    ),
    (
        "prior_comparison",
        include_str!("../../presets/prior_comparison.toml"),
    ),
    (
        "concentration_msets",
        include_str!("../../presets/concentration_msets.toml"),
    ),
];

pub fn preset(name: &str) -> Option<&'static str> {
    PRESETS.iter().find(|(n, _)| *n == name).map(|(_, t)| *t)
}

fn default_repetitions() -> usize {
    1
}

/// The configuration as written in the file.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct RawConfig {
    #[serde(default)]
    description: Option<String>,
    horizon: usize,
    #[serde(default = "default_repetitions")]
    repetitions: usize,
    #[serde(default)]
    seed: u64,
    #[serde(default)]
    timing: bool,
    #[serde(default)]
    couple_streams: bool,
    instance: toml::Table,
    #[serde(default)]
    variants: Vec<toml::Table>,
    policies: Vec<PolicySpec>,
}

/// One instance of a (possibly multi-variant) experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct Variant {
    /// Empty when the experiment has a single instance.
    pub label: String,
    pub instance: InstanceSpec,
}

/// A validated experiment.
#[derive(Debug, Clone, PartialEq)]
pub struct ExperimentConfig {
    pub description: Option<String>,
    pub horizon: usize,
    pub repetitions: usize,
    pub seed: u64,
    pub timing: bool,
    pub couple_streams: bool,
    pub variants: Vec<Variant>,
    pub policies: Vec<PolicySpec>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        Self::from_toml_in(text, None)
    }

    /// Relative `graph_file` entries are resolved against `base`.
    pub fn from_toml_in(text: &str, base: Option<&Path>) -> Result<Self> {
        let raw: RawConfig = toml::from_str(text).map_err(|e| CmabError::Config(e.to_string()))?;
        let mut variants = Vec::new();
        if raw.variants.is_empty() {
            variants.push(Variant {
                label: String::new(),
                instance: instance_from(raw.instance.clone(), base)?,
            });
        }
        for (k, over) in raw.variants.iter().enumerate() {
            let mut table = raw.instance.clone();
            let mut label = None;
            let mut parts = Vec::new();
            for (key, value) in over {
                if key == "label" {
                    label = Some(
                        value
                            .as_str()
                            .ok_or_else(|| {
                                CmabError::Config(format!("variant {k}: label must be a string"))
                            })?
                            .to_string(),
                    );
                    continue;
                }
                parts.push(format!("{key}={value}"));
                table.insert(key.clone(), value.clone());
            }
            variants.push(Variant {
                label: label.unwrap_or_else(|| parts.join(",")),
                instance: instance_from(table, base)?,
            });
        }
        let cfg = ExperimentConfig {
            description: raw.description,
            horizon: raw.horizon,
            repetitions: raw.repetitions,
            seed: raw.seed,
            timing: raw.timing,
            couple_streams: raw.couple_streams,
            variants,
            policies: raw.policies,
        };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config file; a name from [`PRESETS`] that is not an
    /// existing path loads that preset.
    pub fn load(path_or_preset: &str) -> Result<Self> {
        let path = Path::new(path_or_preset);
        if !path.exists() {
            if let Some(text) = preset(path_or_preset) {
                return Self::from_toml(text);
            }
        }
        let text = std::fs::read_to_string(path).map_err(|source| CmabError::Io {
            path: path.to_path_buf(),
            source,
        })?;
        Self::from_toml_in(&text, path.parent())
    }

    pub fn validate(&self) -> Result<()> {
        if self.horizon == 0 {
            return Err(CmabError::Config("horizon must be at least 1".into()));
        }
        if self.repetitions == 0 {
            return Err(CmabError::Config("repetitions must be at least 1".into()));
        }
        if self.policies.is_empty() {
            return Err(CmabError::Config("no policies configured".into()));
        }
        let mut names: Vec<String> = self.policies.iter().map(PolicySpec::name).collect();
        if let Some(bad) = names
            .iter()
            .find(|n| n.is_empty() || n.contains(['\n', '\r']))
        {
            return Err(CmabError::Config(format!("invalid policy label {bad:?}")));
        }
        names.sort();
        if let Some(w) = names.windows(2).find(|w| w[0] == w[1]) {
            return Err(CmabError::Config(format!(
                "policy name {:?} appears twice; set distinct labels",
                w[0]
            )));
        }
        let mut labels: Vec<&str> = self.variants.iter().map(|v| v.label.as_str()).collect();
        labels.sort_unstable();
        if labels.windows(2).any(|w| w[0] == w[1]) {
            return Err(CmabError::Config("variant labels must be distinct".into()));
        }
        Ok(())
    }

    /// Keeps only the named policies, in the order given.
    pub fn select_policies(&mut self, names: &[String]) -> Result<()> {
        let mut kept = Vec::with_capacity(names.len());
        for name in names {
            let spec = self
                .policies
                .iter()
                .find(|p| &p.name() == name)
                .ok_or_else(|| {
                    CmabError::Config(format!("no policy named {name:?} in the config"))
                })?;
            kept.push(spec.clone());
        }
        self.policies = kept;
        self.validate()
    }
}

fn instance_from(mut table: toml::Table, base: Option<&Path>) -> Result<InstanceSpec> {
    if let (Some(base), Some(toml::Value::String(f))) = (base, table.get("graph_file")) {
        let p = PathBuf::from(f);
        if p.is_relative() {
            let joined = base.join(p).to_string_lossy().into_owned();
            table.insert("graph_file".into(), toml::Value::String(joined));
        }
    }
    table
        .try_into()
        .map_err(|e: toml::de::Error| CmabError::Config(format!("instance: {e}")))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn presets_parse() {
        for (name, text) in PRESETS {
            let cfg = ExperimentConfig::from_toml(text).unwrap_or_else(|e| panic!("{name}: {e}"));
            assert!(cfg.horizon >= 1, "{name}");
        }
    }

    #[test]
    fn variants_override_the_instance() {
        let cfg = ExperimentConfig::from_toml(
            r#"
horizon = 10
[instance]
family = "matching-gaussian"
q = 3
c = 0.0
[[variants]]
c = 0.5
[[variants]]
label = "big"
q = 4
[[policies]]
kind = "cucb"
"#,
        )
        .unwrap();
        assert_eq!(cfg.variants.len(), 2);
        assert_eq!(cfg.variants[0].label, "c=0.5");
        assert_eq!(cfg.variants[1].label, "big");
        match &cfg.variants[1].instance {
            InstanceSpec::MatchingGaussian(m) => assert_eq!((m.q, m.c), (4, 0.0)),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn rejects_bad_configs() {
        let base = "[instance]\nfamily = \"bernoulli-msets\"\nn = 4\nm = 2\n[[policies]]\nkind = \"cts-beta\"\n";
        assert!(ExperimentConfig::from_toml(&format!("horizon = 5\n{base}")).is_ok());
        for bad in [
            format!("horizon = 0\n{base}"),
            format!("horizon = 5\nrepetitions = 0\n{base}"),
            format!("horizon = 5\nbogus = 1\n{base}"),
            format!("horizon = 5\n{base}[[policies]]\nkind = \"cts-beta\"\n"),
        ] {
            let e = ExperimentConfig::from_toml(&bad).unwrap_err();
            assert_eq!(e.kind(), "config", "{bad}");
        }
    }

    #[test]
    fn policy_selection() {
        let mut cfg = ExperimentConfig::load("matching_gaussian").unwrap();
        cfg.select_policies(&["escb".into(), "cucb".into()])
            .unwrap();
        let names: Vec<String> = cfg.policies.iter().map(PolicySpec::name).collect();
        assert_eq!(names, ["escb", "cucb"]);
        assert!(cfg.select_policies(&["nope".into()]).is_err());
    }
}
