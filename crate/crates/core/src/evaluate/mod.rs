// SPDX-License-Identifier: Apache-2.0

//! Tool-in-the-loop evaluation: compile, simulate, structural lint, gating,
//! synthesis, and report parsing.
//!
//! The functions here own the per-candidate workdir files and enforce the
//! stage order. Adapters ([`CommandAdapter`], [`MockAdapter`]) only run
//! tools.

pub mod adapter;
pub mod lint;
pub mod mock;
pub mod ppa;

use std::path::{Path, PathBuf};

use thiserror::Error;

pub use adapter::{
    CandidateWorkdir, CommandAdapter, InvocationCounts, ReportPaths, ReportTexts, Stage, StageRun,
    StageStatus, StageTimeouts, ToolAdapter, ToolAdapterConfig,
};
pub use lint::{structural_check, Rule, RuleOutcome, StructuralCheckResult, Verdict};
pub use mock::{MockAdapter, MockOutcome};
pub use ppa::{parse_ppa, ParsedPpa, PpaParseError, PpaPatterns};

use crate::model::Candidate;
use crate::pipelines::template::has_module_token;
use crate::pipelines::LogPatterns;

#[derive(Debug, Error)]
pub enum EvalError {
    #[error("tool configuration: {0}")]
    Config(String),
    #[error("cannot launch `{program}`: {source}")]
    Spawn {
        program: String,
        #[source]
        source: std::io::Error,
    },
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("tool environment: {0}")]
    Environment(String),
    /// A stage was called out of order. This is a framework bug, never a
    /// candidate failure.
    #[error("stage precondition violated: {0}")]
    Logic(&'static str),
    #[error("synthesis failed")]
    Synthesis { log: String },
    #[error(transparent)]
    Parse(#[from] PpaParseError),
}

impl EvalError {
    pub(crate) fn io(path: &Path, source: std::io::Error) -> Self {
        EvalError::Io {
            path: path.to_path_buf(),
            source,
        }
    }

    /// Environment errors abort a run; the others are candidate outcomes or
    /// bugs.
    pub fn is_environment(&self) -> bool {
        matches!(
            self,
            EvalError::Spawn { .. } | EvalError::Io { .. } | EvalError::Environment(_)
        )
    }
}

/// The gating indicator: 1 iff compile and simulation both succeeded.
pub fn gate(compile_ok: bool, sim_ok: bool) -> bool {
    compile_ok && sim_ok
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CompileResult {
    pub compile_ok: bool,
    pub raw_log: String,
    pub warn_count: u32,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SimResult {
    pub sim_ok: bool,
    pub raw_log: String,
}

/// Appends a classified failure line so the feedback packet always has an
/// error to point at, even when the tool printed none.
fn with_trailer(stage: Stage, run: &StageRun) -> String {
    let mut log = run.log.clone();
    let line = match run.status {
        StageStatus::Exited { success: true, .. } => return log,
        StageStatus::Exited { code: Some(c), .. } => {
            format!("error: {} failed (exit status {c})", stage.as_str())
        }
        StageStatus::Exited { code: None, .. } => {
            format!("error: {} terminated by signal", stage.as_str())
        }
        StageStatus::TimedOut { after_ms } => {
            format!("error: {} timed out after {after_ms} ms [TIMEOUT]", stage.as_str())
        }
    };
    if !log.is_empty() && !log.ends_with('\n') {
        log.push('\n');
    }
    log.push_str(&line);
    log.push('\n');
    log
}

/// Writes the source into the workdir and compiles it. A response with no
/// `module` declaration fails without invoking the tool.
pub fn compile_check(
    adapter: &dyn ToolAdapter,
    candidate: &Candidate,
    wd: &CandidateWorkdir,
    tb: Option<&Path>,
    patterns: &LogPatterns,
) -> Result<CompileResult, EvalError> {
    if candidate.source.trim().is_empty() {
        return Err(EvalError::Logic("compile_check on an empty source"));
    }
    wd.write(&wd.design(), &candidate.source)?;
    let (compile_ok, raw_log) = if has_module_token(&candidate.source) {
        let run = adapter.compile(wd, tb)?;
        (run.status.success(), with_trailer(Stage::Compile, &run))
    } else {
        (
            false,
            "error: response contains no module declaration\n".to_string(),
        )
    };
    wd.write(&wd.compile_log(), &raw_log)?;
    let warn_count = patterns.warning_count(&raw_log);
    Ok(CompileResult {
        compile_ok,
        raw_log,
        warn_count,
    })
}

/// Runs the testbench. Calling this after a failed compile is a logic error.
pub fn simulate(
    adapter: &dyn ToolAdapter,
    compiled: &CompileResult,
    wd: &CandidateWorkdir,
    tb: Option<&Path>,
    patterns: &LogPatterns,
) -> Result<SimResult, EvalError> {
    if !compiled.compile_ok {
        return Err(EvalError::Logic("simulate after a failed compile"));
    }
    let run = adapter.simulate(wd, tb)?;
    let raw_log = with_trailer(Stage::Sim, &run);
    let sim_ok = run.status.success() && !patterns.has_error(&raw_log);
    wd.write(&wd.sim_log(), &raw_log)?;
    Ok(SimResult { sim_ok, raw_log })
}

/// Synthesizes a gated candidate and stores the three reports under
/// `synth/`. Calling this with `gate == false` is a logic error.
pub fn synthesize(
    adapter: &dyn ToolAdapter,
    wd: &CandidateWorkdir,
    gate: bool,
) -> Result<ReportTexts, EvalError> {
    if !gate {
        return Err(EvalError::Logic("synthesize on an ungated candidate"));
    }
    let (run, texts) = adapter.synthesize(wd)?;
    let log = with_trailer(Stage::Synth, &run);
    wd.write(&wd.synth_dir().join("synth.log"), &log)?;
    let Some(texts) = texts.filter(|_| run.status.success()) else {
        return Err(EvalError::Synthesis { log });
    };
    let dir = wd.synth_dir();
    wd.write(&dir.join("timing.rpt"), &texts.timing)?;
    wd.write(&dir.join("area.rpt"), &texts.area)?;
    wd.write(&dir.join("power.rpt"), &texts.power)?;
    Ok(texts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{Phase, Role};

    fn cand(src: &str) -> Candidate {
        Candidate::new(0, "b", src, Role::Generator, None, Phase::P1, 0).unwrap()
    }

    #[test]
    fn gate_truth_table() {
        assert!(gate(true, true));
        assert!(!gate(true, false));
        assert!(!gate(false, true));
        assert!(!gate(false, false));
    }

    #[test]
    fn stage_order_enforced() {
        let tmp = tempfile::tempdir().unwrap();
        let a = MockAdapter::directives();
        let pats = LogPatterns::default();
        let wd = CandidateWorkdir::create(tmp.path(), 0).unwrap();
        let c = compile_check(&a, &cand("// mock: compile=0\nmodule m; endmodule"), &wd, None, &pats).unwrap();
        assert!(!c.compile_ok);
        assert!(pats.has_error(&c.raw_log));
        assert!(c.raw_log.ends_with("error: compile failed (exit status 1)\n"));
        assert!(matches!(simulate(&a, &c, &wd, None, &pats), Err(EvalError::Logic(_))));
        assert!(matches!(synthesize(&a, &wd, false), Err(EvalError::Logic(_))));
        assert_eq!(a.invocations().synth, 0);
        assert_eq!(a.invocations().sim, 0);
    }

    #[test]
    fn full_flow_writes_layout() {
        let tmp = tempfile::tempdir().unwrap();
        let a = MockAdapter::directives();
        let pats = LogPatterns::default();
        let wd = CandidateWorkdir::create(tmp.path(), 7).unwrap();
        let src = "// mock: area=59.9 leak=10 internal=40.9 switch=30 wns=0.2\nmodule m; endmodule\n";
        let c = compile_check(&a, &cand(src), &wd, None, &pats).unwrap();
        let s = simulate(&a, &c, &wd, None, &pats).unwrap();
        assert!(gate(c.compile_ok, s.sim_ok));
        let r = synthesize(&a, &wd, true).unwrap();
        let p = parse_ppa(&r.timing, &r.area, &r.power, &PpaPatterns::default()).unwrap();
        assert_eq!(p.area_um2, 59.9);
        assert!((p.power_total_uw() - 80.9).abs() < 1e-9);
        assert_eq!(p.wns_ns, 0.2);
        for f in ["design.sv", "compile.log", "sim.log", "synth/timing.rpt", "synth/area.rpt", "synth/power.rpt", "commands.log"] {
            assert!(wd.root().join(f).is_file(), "{f}");
        }
        assert_eq!(std::fs::read_to_string(wd.design()).unwrap(), src);
    }

    #[test]
    fn no_module_token_skips_tool() {
        let tmp = tempfile::tempdir().unwrap();
        let a = MockAdapter::directives();
        let wd = CandidateWorkdir::create(tmp.path(), 0).unwrap();
        let c = compile_check(&a, &cand("I cannot help with that."), &wd, None, &LogPatterns::default()).unwrap();
        assert!(!c.compile_ok);
        assert_eq!(a.invocations().compile, 0);
    }

    #[test]
    fn sim_error_pattern_fails_even_on_exit_zero() {
        struct Noisy;
        impl ToolAdapter for Noisy {
            fn compile(&self, _: &CandidateWorkdir, _: Option<&Path>) -> Result<StageRun, EvalError> {
                Ok(StageRun {
                    status: StageStatus::Exited { code: Some(0), success: true },
                    log: String::new(),
                })
            }
            fn simulate(&self, _: &CandidateWorkdir, _: Option<&Path>) -> Result<StageRun, EvalError> {
                Ok(StageRun {
                    status: StageStatus::Exited { code: Some(0), success: true },
                    log: "ASSERTION FAILED: q != expected @ 40 ns\n".into(),
                })
            }
            fn synthesize(&self, _: &CandidateWorkdir) -> Result<(StageRun, Option<ReportTexts>), EvalError> {
                unreachable!()
            }
            fn invocations(&self) -> InvocationCounts {
                InvocationCounts::default()
            }
        }
        let tmp = tempfile::tempdir().unwrap();
        let wd = CandidateWorkdir::create(tmp.path(), 0).unwrap();
        let pats = LogPatterns::default();
        let c = compile_check(&Noisy, &cand("module m; endmodule"), &wd, None, &pats).unwrap();
        let s = simulate(&Noisy, &c, &wd, None, &pats).unwrap();
        assert!(!s.sim_ok);
    }

    #[test]
    fn synthesis_failure_carries_log() {
        let tmp = tempfile::tempdir().unwrap();
        let a = MockAdapter::directives();
        let pats = LogPatterns::default();
        let wd = CandidateWorkdir::create(tmp.path(), 0).unwrap();
        let c = compile_check(&a, &cand("// mock: synth=0\nmodule m; endmodule"), &wd, None, &pats).unwrap();
        simulate(&a, &c, &wd, None, &pats).unwrap();
        match synthesize(&a, &wd, true) {
            Err(EvalError::Synthesis { log }) => assert!(log.contains("mock synthesis failure")),
            other => panic!("{other:?}"),
        }
    }
}
