// SPDX-License-Identifier: Apache-2.0

//! TOML run configuration.
//!
//! Sections: `[suite]`, `[sa]` (with `[sa.phase1]`, `[sa.phase2]`),
//! `[weights]`, `[pipelines]`, `[backend]`, `[adapter]`. Every field has a
//! default, so an empty file is a valid configuration. Relative paths are
//! resolved against the directory of the config file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::HarnessError;
use crate::evaluate::ToolAdapterConfig;
use crate::model::{PhaseSchedule, PpaWeights, RewardWeights, SaConfig};
use crate::objectives::DepthConfig;
use crate::pipelines::backend::{GenParams, ReplayOrder, WireConfig};

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SuiteSection {
    pub path: PathBuf,
    /// Benchmark ids to run; empty selects all.
    pub benchmarks: Vec<String>,
    pub runs_per_benchmark: u32,
    pub output_dir: PathBuf,
    pub archive: bool,
    pub parallelism: usize,
    /// Root with `default/` and per-benchmark template directories. Built-in
    /// templates are used when absent.
    pub templates: Option<PathBuf>,
    pub baselines: Option<PathBuf>,
    /// Replace existing run directories instead of failing.
    pub overwrite: bool,
}

impl Default for SuiteSection {
    fn default() -> Self {
        SuiteSection {
            path: "data/suite.toml".into(),
            benchmarks: Vec::new(),
            runs_per_benchmark: 5,
            output_dir: "runs".into(),
            archive: true,
            parallelism: 1,
            templates: None,
            baselines: None,
            overwrite: false,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct SaSection {
    pub rng_seed: u64,
    pub phase1_target: f64,
    pub phase1: PhaseSchedule,
    pub phase2: PhaseSchedule,
}

impl Default for SaSection {
    fn default() -> Self {
        let d = SaConfig::default();
        SaSection {
            rng_seed: d.rng_seed,
            phase1_target: d.phase1_target,
            phase1: d.phase1,
            phase2: d.phase2,
        }
    }
}

/// Overrides for one benchmark's normalization reference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ReferenceOverride {
    pub area_ref_um2: f64,
    pub power_ref_uw: f64,
    pub clock_period_ns: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WeightsSection {
    pub reward: RewardWeights,
    pub ppa: PpaWeights,
    pub depth: DepthConfig,
    /// Clock period used to normalize negative slack.
    pub clock_period_ns: f64,
    pub reference_overrides: BTreeMap<String, ReferenceOverride>,
}

impl Default for WeightsSection {
    fn default() -> Self {
        WeightsSection {
            reward: RewardWeights::default(),
            ppa: PpaWeights::default(),
            depth: DepthConfig::default(),
            clock_period_ns: 1.0,
            reference_overrides: BTreeMap::new(),
        }
    }
}

/// Which score feeds the bandit in Phase 1.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BanditRewardSource {
    /// The correctness reward J1.
    #[default]
    Reward,
    /// 1 when the candidate passes the gate.
    Gate,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PipelinesSection {
    pub reward_threshold: f64,
    pub generator_restart: bool,
    pub critique: bool,
    pub bandit_reward: BanditRewardSource,
}

impl Default for PipelinesSection {
    fn default() -> Self {
        PipelinesSection {
            reward_threshold: crate::pipelines::bandit::DEFAULT_THRESHOLD,
            generator_restart: false,
            critique: true,
            bandit_reward: BanditRewardSource::Reward,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BackendKind {
    #[default]
    Replay,
    Mock,
    Wire,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BackendSection {
    pub kind: BackendKind,
    /// `<replay_dir>/<benchmark>/` holds the fixtures; a `run<i>/`
    /// subdirectory, when present, overrides them for run `i`.
    pub replay_dir: PathBuf,
    pub replay_order: ReplayOrder,
    pub replay_cycle: bool,
    pub params: GenParams,
    pub wire: Option<WireConfig>,
}

impl Default for BackendSection {
    fn default() -> Self {
        BackendSection {
            kind: BackendKind::Replay,
            replay_dir: "data/fixtures".into(),
            replay_order: ReplayOrder::ByContract,
            replay_cycle: true,
            params: GenParams::default(),
            wire: None,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AdapterKind {
    #[default]
    Mock,
    Command,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct AdapterSection {
    pub kind: AdapterKind,
    #[serde(flatten)]
    pub tool: ToolAdapterConfig,
}

impl Default for AdapterSection {
    fn default() -> Self {
        AdapterSection {
            kind: AdapterKind::Mock,
            tool: ToolAdapterConfig::default(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub suite: SuiteSection,
    pub sa: SaSection,
    pub weights: WeightsSection,
    pub pipelines: PipelinesSection,
    pub backend: BackendSection,
    pub adapter: AdapterSection,
}

fn resolve(base: &Path, p: &mut PathBuf) {
    if p.is_relative() {
        *p = base.join(&*p);
    }
}

impl RunConfig {
    pub fn from_toml_str(text: &str) -> Result<Self, HarnessError> {
        toml::from_str(text).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Loads, resolves paths against the file's directory, and validates.
    pub fn load(path: &Path) -> Result<Self, HarnessError> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let mut cfg = Self::from_toml_str(&text)
            .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))?;
        let base = path.parent().unwrap_or(Path::new("."));
        cfg.resolve_paths(base);
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        resolve(base, &mut self.suite.path);
        resolve(base, &mut self.suite.output_dir);
        if let Some(p) = self.suite.templates.as_mut() {
            resolve(base, p);
        }
        if let Some(p) = self.suite.baselines.as_mut() {
            resolve(base, p);
        }
        resolve(base, &mut self.backend.replay_dir);
    }

    pub fn sa_config(&self) -> SaConfig {
        SaConfig {
            phase1: self.sa.phase1,
            phase2: self.sa.phase2,
            rng_seed: self.sa.rng_seed,
            phase1_target: self.sa.phase1_target,
            ppa_weights: self.weights.ppa,
            reward_weights: self.weights.reward,
        }
    }

    pub fn to_toml(&self) -> Result<String, HarnessError> {
        toml::to_string(self).map_err(|e| HarnessError::Config(e.to_string()))
    }

    /// Checks values and that referenced paths exist.
    pub fn validate(&self) -> Result<(), HarnessError> {
        let cfg = |m: String| Err(HarnessError::Config(m));
        self.sa_config()
            .validate()
            .map_err(|e| HarnessError::Config(e.to_string()))?;
        if self.suite.runs_per_benchmark == 0 {
            return cfg("runs_per_benchmark must be >= 1".into());
        }
        if self.suite.parallelism == 0 {
            return cfg("parallelism must be >= 1".into());
        }
        if !(self.weights.clock_period_ns.is_finite() && self.weights.clock_period_ns > 0.0) {
            return cfg("clock_period_ns must be > 0".into());
        }
        let t = self.pipelines.reward_threshold;
        if !(t > 0.0 && t < 1.0) {
            return cfg("reward_threshold must be in (0,1)".into());
        }
        crate::objectives::heuristic_depth(
            &crate::objectives::DepthRates {
                syntax: 1.0,
                reset: 1.0,
                pipeline: 1.0,
                logic: 1.0,
                hazard: 1.0,
            },
            &self.weights.depth,
        )
        .map_err(|e| HarnessError::Config(e.to_string()))?;
        if !self.suite.path.is_file() {
            return cfg(format!("suite file {} does not exist", self.suite.path.display()));
        }
        for p in [&self.suite.templates, &self.suite.baselines].into_iter().flatten() {
            if !p.exists() {
                return cfg(format!("{} does not exist", p.display()));
            }
        }
        match self.backend.kind {
            BackendKind::Replay if !self.backend.replay_dir.is_dir() => {
                return cfg(format!(
                    "replay_dir {} does not exist",
                    self.backend.replay_dir.display()
                ))
            }
            BackendKind::Wire if self.backend.wire.is_none() => {
                return cfg("backend.kind = \"wire\" needs a [backend.wire] table".into())
            }
            _ => {}
        }
        if self.adapter.kind == AdapterKind::Command {
            self.adapter
                .tool
                .validate()
                .map_err(|e| HarnessError::Config(e.to_string()))?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn empty_toml_is_defaults() {
        let c = RunConfig::from_toml_str("").unwrap();
        assert_eq!(c, RunConfig::default());
        assert_eq!(c.sa.phase1.t0, 1.20);
        assert_eq!(c.sa.phase2.cooling_alpha, 0.80);
        assert_eq!(c.suite.runs_per_benchmark, 5);
    }

    #[test]
    fn round_trip() {
        let c = RunConfig::default();
        let text = c.to_toml().unwrap();
        assert_eq!(RunConfig::from_toml_str(&text).unwrap(), c);
    }

    #[test]
    fn sections_parse() {
        let c = RunConfig::from_toml_str(
            r#"
[suite]
runs_per_benchmark = 1
[sa.phase1]
t0 = 2.0
cooling_alpha = 0.5
t_min = 0.1
max_iters = 3
[weights.ppa]
area = 0.5
power = 0.25
slack = 0.25
[backend]
kind = "mock"
[adapter]
kind = "command"
compile_cmd_template = "vlog {src}"
"#,
        )
        .unwrap();
        assert_eq!(c.sa.phase1.max_iters, 3);
        assert_eq!(c.backend.kind, BackendKind::Mock);
        assert_eq!(c.adapter.tool.compile_cmd_template, "vlog {src}");
        assert_eq!(c.adapter.tool.sim_cmd_template, ToolAdapterConfig::default().sim_cmd_template);
    }

    #[test]
    fn unknown_key_rejected() {
        assert!(RunConfig::from_toml_str("[suite]\nrunz = 3\n").is_err());
    }

    #[test]
    fn validation_catches_values() {
        let tmp = tempfile::tempdir().unwrap();
        let suite = tmp.path().join("suite.toml");
        std::fs::write(&suite, "").unwrap();
        let mut c = RunConfig::default();
        c.suite.path = suite;
        c.backend.kind = BackendKind::Mock;
        c.validate().unwrap();
        c.suite.runs_per_benchmark = 0;
        assert!(c.validate().is_err());
        c.suite.runs_per_benchmark = 1;
        c.sa.phase2.cooling_alpha = 1.5;
        assert!(c.validate().is_err());
    }
}
