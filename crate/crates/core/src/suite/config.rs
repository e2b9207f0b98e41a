use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::instance::{generate, read_graph, GeneratorConfig, WeightedGraph};
use crate::suite::preset::{Budget, Preset};

/// Where an instance comes from.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct InstanceSpec {
    pub id: String,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub path: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub generate: Option<GeneratorConfig>,
}

impl InstanceSpec {
    /// Loads or generates the graph; relative paths resolve against `base`.
    pub fn load(&self, base: &Path) -> Result<WeightedGraph> {
        match (&self.path, &self.generate) {
            (Some(p), None) => read_graph(base.join(p)),
            (None, Some(cfg)) => generate(cfg),
            _ => Err(Error::Config(format!(
                "instance '{}' needs exactly one of `path` or `generate`",
                self.id
            ))),
        }
    }
}

fn default_runs() -> usize {
    10
}

fn default_output() -> PathBuf {
    PathBuf::from("results")
}

/// A benchmark suite, read from TOML:
///
/// ```toml
/// base_seed = 0
/// runs = 10
/// output_dir = "results"
/// presets = ["dmrg-chi2", "gaoc", "cga-500"]
///
/// [[instances]]
/// id = "g10"
/// generate = { n = 10, seed = 1 }
///
/// [[instances]]
/// id = "mine"
/// path = "graphs/mine.edg"
///
/// [budget]
/// cga_generations = 200
/// ```
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SuiteConfig {
    pub instances: Vec<InstanceSpec>,
    #[serde(default = "all_presets")]
    pub presets: Vec<Preset>,
    #[serde(default = "default_runs")]
    pub runs: usize,
    #[serde(default)]
    pub base_seed: u64,
    #[serde(default = "default_output")]
    pub output_dir: PathBuf,
    #[serde(default)]
    pub budget: Budget,
}

fn all_presets() -> Vec<Preset> {
    Preset::ALL.to_vec()
}

impl SuiteConfig {
    pub fn from_toml(text: &str) -> Result<Self> {
        let cfg: SuiteConfig =
            toml::from_str(text).map_err(|e| Error::Config(format!("suite file: {e}")))?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn read(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml(&text)
    }

    pub fn validate(&self) -> Result<()> {
        if self.runs == 0 {
            return Err(Error::Config("runs must be at least 1".into()));
        }
        if self.instances.is_empty() || self.presets.is_empty() {
            return Err(Error::Config("suite needs instances and presets".into()));
        }
        let mut ids = std::collections::HashSet::new();
        for inst in &self.instances {
            let valid = !inst.id.is_empty()
                && inst
                    .id
                    .chars()
                    .all(|c| c.is_ascii_alphanumeric() || "-_.".contains(c));
            if !valid {
                return Err(Error::Config(format!(
                    "instance id '{}' must be non-empty [A-Za-z0-9._-]",
                    inst.id
                )));
            }
            if !ids.insert(inst.id.as_str()) {
                return Err(Error::Config(format!("duplicate instance id '{}'", inst.id)));
            }
            if inst.path.is_some() == inst.generate.is_some() {
                return Err(Error::Config(format!(
                    "instance '{}' needs exactly one of `path` or `generate`",
                    inst.id
                )));
            }
            if let Some(g) = &inst.generate {
                g.validate()?;
            }
        }
        let mut seen = std::collections::HashSet::new();
        if let Some(p) = self.presets.iter().find(|p| !seen.insert(**p)) {
            return Err(Error::Config(format!("preset '{p}' listed twice")));
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    const SAMPLE: &str = r#"
base_seed = 9
runs = 3
presets = ["dmrg-chi2", "cga-500"]

[[instances]]
id = "g10"
generate = { n = 10, seed = 1 }

[[instances]]
id = "file"
path = "x.edg"

[budget]
cga_generations = 20
"#;

    #[test]
    fn parses_sample() {
        let cfg = SuiteConfig::from_toml(SAMPLE).unwrap();
        assert_eq!(cfg.runs, 3);
        assert_eq!(cfg.base_seed, 9);
        assert_eq!(cfg.presets, vec![Preset::DmrgChi2, Preset::Cga500]);
        assert_eq!(cfg.instances[0].generate.as_ref().unwrap().edge_probability, 0.8);
        assert_eq!(cfg.output_dir, PathBuf::from("results"));
        assert_eq!(cfg.budget.cga_generations, Some(20));
    }

    #[test]
    fn defaults_to_every_preset_and_ten_runs() {
        let cfg = SuiteConfig::from_toml("[[instances]]\nid = \"a\"\ngenerate = { n = 5 }\n").unwrap();
        assert_eq!(cfg.presets.len(), 8);
        assert_eq!(cfg.runs, 10);
    }

    #[test]
    fn rejects_bad_suites() {
        for bad in [
            "runs = 0\n[[instances]]\nid = \"a\"\ngenerate = { n = 5 }",
            "presets = [\"nope\"]\n[[instances]]\nid = \"a\"\ngenerate = { n = 5 }",
            "[[instances]]\nid = \"a\"",
            "[[instances]]\nid = \"a b\"\ngenerate = { n = 5 }",
            "[[instances]]\nid = \"a\"\ngenerate = { n = 5 }\n[[instances]]\nid = \"a\"\ngenerate = { n = 6 }",
            "[[instances]]\nid = \"a\"\ngenerate = { n = 1 }",
            "typo = 1\n[[instances]]\nid = \"a\"\ngenerate = { n = 5 }",
        ] {
            assert!(matches!(SuiteConfig::from_toml(bad), Err(Error::Config(_))), "{bad}");
        }
    }
}
