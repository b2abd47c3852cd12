// SPDX-License-Identifier: Apache-2.0

//! Reading run archives and replaying them.
//!
//! A complete archive holds `manifest.json`, `config.toml`, `spec.json`,
//! `seeds.json`, `prompts/` and `trace.jsonl`. Replay feeds the archived
//! responses back in strict order and compares the new trace with the old
//! one byte for byte.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::config::{AdapterKind, RunConfig};
use super::run::{load_templates, run_benchmark, BenchmarkContext, RunResult};
use super::suite::testbench_path;
use super::HarnessError;
use crate::evaluate::{CommandAdapter, MockAdapter, ToolAdapter};
use crate::model::ProblemSpec;
use crate::pipelines::backend::{ReplayBackend, ReplayOrder};
use crate::pipelines::TemplateLibrary;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Manifest {
    pub run_id: String,
    pub status: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Seeds {
    pub base_seed: u64,
    pub run_index: u32,
    pub seed: u64,
}

fn read(path: &Path) -> Result<String, HarnessError> {
    std::fs::read_to_string(path).map_err(|e| HarnessError::io(path, e))
}

fn json<T: serde::de::DeserializeOwned>(path: &Path) -> Result<T, HarnessError> {
    serde_json::from_str(&read(path)?)
        .map_err(|e| HarnessError::Config(format!("{}: {e}", path.display())))
}

pub fn read_manifest(archive: &Path) -> Result<Manifest, HarnessError> {
    json(&archive.join("manifest.json"))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplayReport {
    pub run_id: String,
    pub replay_dir: PathBuf,
    /// The replayed trace equals the archived one byte for byte.
    pub identical: bool,
    /// 1-based line of the first differing trace event, if any.
    pub first_difference: Option<usize>,
    pub result: RunResult,
}

/// Re-executes the archived run into `out_dir/<run_id>` using only archived
/// responses.
pub fn replay_run(archive: &Path, out_dir: &Path) -> Result<ReplayReport, HarnessError> {
    let manifest = read_manifest(archive)?;
    if manifest.status != "complete" {
        return Err(HarnessError::Config(format!(
            "archive {} is {}, not complete",
            archive.display(),
            manifest.status
        )));
    }
    let mut cfg = RunConfig::from_toml_str(&read(&archive.join("config.toml"))?)?;
    let spec: ProblemSpec = json(&archive.join("spec.json"))?;
    let seeds: Seeds = json(&archive.join("seeds.json"))?;
    cfg.sa.rng_seed = seeds.base_seed;
    cfg.suite.overwrite = true;

    let templates = match load_templates(&cfg) {
        Ok(t) => t,
        Err(e) => {
            log::warn!("archived template root unavailable ({e}); using built-in templates");
            TemplateLibrary::builtin()
        }
    };
    let backend = ReplayBackend::open(&archive.join("prompts"), ReplayOrder::Strict, false)?;
    let adapter: Box<dyn ToolAdapter> = match cfg.adapter.kind {
        AdapterKind::Mock => Box::new(MockAdapter::directives()),
        AdapterKind::Command => Box::new(CommandAdapter::new(cfg.adapter.tool.clone())?),
    };
    let ctx = BenchmarkContext {
        spec: &spec,
        config: &cfg,
        templates: &templates,
        testbench: testbench_path(&cfg.suite.path, &spec),
    };
    let dir = out_dir.join(&manifest.run_id);
    let result = run_benchmark(&ctx, seeds.run_index, Box::new(backend), adapter.as_ref(), &dir)?;

    let old = read(&archive.join("trace.jsonl"))?;
    let new = read(&dir.join("trace.jsonl"))?;
    let first_difference = if old == new {
        None
    } else {
        let mut a = old.lines();
        let mut b = new.lines();
        let mut i = 1;
        loop {
            match (a.next(), b.next()) {
                (Some(x), Some(y)) if x == y => i += 1,
                _ => break Some(i),
            }
        }
    };
    Ok(ReplayReport {
        run_id: manifest.run_id,
        replay_dir: dir,
        identical: first_difference.is_none(),
        first_difference,
        result,
    })
}
