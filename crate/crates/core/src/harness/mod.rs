// SPDX-License-Identifier: Apache-2.0

//! Suite loading, two-phase runs, archives, replay, and report tables.

pub mod archive;
pub mod config;
pub mod report;
pub mod run;
pub mod suite;
pub mod trace;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use archive::{replay_run, ReplayReport};
pub use config::RunConfig;
pub use report::{render_reports, write_suite_outputs};
pub use run::{
    run_benchmark, run_specs, run_suite, score_candidate, BenchmarkContext, BenchmarkReport,
    RunResult, RunStatus, ScoreReport, SuiteReport,
};
pub use suite::{load_suite, parse_suite, Baselines};
pub use trace::{emit_trace_line, structured_trace_line};

use crate::evaluate::EvalError;
use crate::model::{ModelError, Phase};
use crate::objectives::ObjectiveError;
use crate::pipelines::backend::BackendError;
use crate::pipelines::bandit::BanditError;
use crate::pipelines::template::TemplateError;

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("configuration: {0}")]
    Config(String),
    #[error("{}:{line}: {message}", path.display())]
    Suite {
        path: PathBuf,
        line: usize,
        message: String,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("backend: {0}")]
    Backend(#[from] BackendError),
    #[error("evaluation: {0}")]
    Eval(#[from] EvalError),
    #[error("template: {0}")]
    Template(#[from] TemplateError),
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Objective(#[from] ObjectiveError),
    #[error(transparent)]
    Bandit(#[from] BanditError),
    #[error("[{phase}] iteration {iteration}: {message}")]
    Anneal {
        phase: Phase,
        iteration: u32,
        message: String,
    },
    /// A run ended on a tool, backend or environment failure, or a replay
    /// diverged from its archive.
    #[error("{0}")]
    Run(String),
    #[error("no feasible design")]
    NoFeasible,
}

impl HarnessError {
    pub fn io(path: &Path, source: std::io::Error) -> Self {
        HarnessError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Process exit status: 2 configuration, 3 environment or tool,
    /// 4 no feasible design.
    pub fn exit_code(&self) -> i32 {
        match self {
            HarnessError::Config(_) | HarnessError::Suite { .. } | HarnessError::Template(_) => 2,
            HarnessError::Eval(EvalError::Config(_)) => 2,
            HarnessError::Backend(BackendError::Config(_)) => 2,
            HarnessError::NoFeasible => 4,
            _ => 3,
        }
    }
}

pub(crate) fn write_file(path: &Path, contents: &str) -> Result<(), HarnessError> {
    if let Some(dir) = path.parent() {
        std::fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    std::fs::write(path, contents).map_err(|e| HarnessError::io(path, e))
}
