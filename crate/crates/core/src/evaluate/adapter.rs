// SPDX-License-Identifier: Apache-2.0

//! Tool adapter configuration, per-candidate workdirs, and the
//! process-backed adapter.

use std::fs::{self, OpenOptions};
use std::io::{Read, Write};
use std::path::{Path, PathBuf};
use std::process::{Command, Stdio};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::mpsc;
use std::thread;
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::json;
use wait_timeout::ChildExt;

use super::lint::Rule;
use super::ppa::PpaPatterns;
use super::EvalError;
use crate::pipelines::LogPatternConfig;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Stage {
    Compile,
    Sim,
    Synth,
}

impl Stage {
    pub fn as_str(self) -> &'static str {
        match self {
            Stage::Compile => "compile",
            Stage::Sim => "sim",
            Stage::Synth => "synth",
        }
    }

    /// Placeholders a template for this stage must contain.
    pub fn required_placeholders(self) -> &'static [&'static str] {
        match self {
            Stage::Compile => &["{src}"],
            Stage::Sim => &["{out}"],
            Stage::Synth => &["{src}"],
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ReportPaths {
    pub timing: PathBuf,
    pub area: PathBuf,
    pub power: PathBuf,
}

impl Default for ReportPaths {
    fn default() -> Self {
        ReportPaths {
            timing: "synth/timing.rpt".into(),
            area: "synth/area.rpt".into(),
            power: "synth/power.rpt".into(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StageTimeouts {
    pub compile_s: f64,
    pub sim_s: f64,
    pub synth_s: f64,
}

impl Default for StageTimeouts {
    fn default() -> Self {
        StageTimeouts {
            compile_s: 60.0,
            sim_s: 120.0,
            synth_s: 600.0,
        }
    }
}

impl StageTimeouts {
    pub fn get(&self, stage: Stage) -> f64 {
        match stage {
            Stage::Compile => self.compile_s,
            Stage::Sim => self.sim_s,
            Stage::Synth => self.synth_s,
        }
    }
}

/// Everything the evaluation layer needs to drive a tool flow.
///
/// Templates are split like a POSIX shell command line (no shell is
/// involved) and placeholders are substituted per argument: `{src}` the
/// candidate source, `{tb}` the benchmark testbench, `{workdir}` the
/// candidate workdir, `{out}` the build output (`<workdir>/build` for
/// compile and sim, `<workdir>/synth` for synthesis).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ToolAdapterConfig {
    pub compile_cmd_template: String,
    pub sim_cmd_template: String,
    pub synth_cmd_template: String,
    pub success_exit_codes: Vec<i32>,
    #[serde(flatten)]
    pub log_patterns: LogPatternConfig,
    pub report_paths: ReportPaths,
    pub timeouts: StageTimeouts,
    pub env_allowlist: Vec<String>,
    pub ppa_patterns: PpaPatterns,
    pub lint_rules: Vec<Rule>,
    pub feedback_context_lines: usize,
}

impl Default for ToolAdapterConfig {
    fn default() -> Self {
        ToolAdapterConfig {
            compile_cmd_template: "iverilog -g2012 -o {out} {src} {tb}".into(),
            sim_cmd_template: "vvp -n {out}".into(),
            synth_cmd_template: "yosys -q -s {workdir}/synth.ys {src}".into(),
            success_exit_codes: vec![0],
            log_patterns: LogPatternConfig::default(),
            report_paths: ReportPaths::default(),
            timeouts: StageTimeouts::default(),
            env_allowlist: vec!["PATH".into(), "HOME".into(), "LANG".into()],
            ppa_patterns: PpaPatterns::default(),
            lint_rules: Rule::ALL.to_vec(),
            feedback_context_lines: crate::pipelines::feedback::DEFAULT_CONTEXT_LINES,
        }
    }
}

impl ToolAdapterConfig {
    pub fn template(&self, stage: Stage) -> &str {
        match stage {
            Stage::Compile => &self.compile_cmd_template,
            Stage::Sim => &self.sim_cmd_template,
            Stage::Synth => &self.synth_cmd_template,
        }
    }

    pub fn validate(&self) -> Result<(), EvalError> {
        for stage in [Stage::Compile, Stage::Sim, Stage::Synth] {
            let t = self.template(stage);
            let argv = shlex::split(t).ok_or_else(|| {
                EvalError::Config(format!("{} template has unbalanced quoting", stage.as_str()))
            })?;
            if argv.is_empty() {
                return Err(EvalError::Config(format!("{} template is empty", stage.as_str())));
            }
            for p in stage.required_placeholders() {
                if !t.contains(p) {
                    return Err(EvalError::Config(format!(
                        "{} template lacks required placeholder {p}",
                        stage.as_str()
                    )));
                }
            }
            let t_s = self.timeouts.get(stage);
            if !(t_s.is_finite() && t_s > 0.0) {
                return Err(EvalError::Config(format!(
                    "{} timeout must be > 0, got {t_s}",
                    stage.as_str()
                )));
            }
        }
        if self.success_exit_codes.is_empty() {
            return Err(EvalError::Config("success_exit_codes is empty".into()));
        }
        crate::pipelines::LogPatterns::compile(&self.log_patterns)
            .map_err(|e| EvalError::Config(format!("log pattern: {e}")))?;
        Ok(())
    }
}

/// `runs/<run_id>/cand_<id>/` and the files inside it.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CandidateWorkdir {
    root: PathBuf,
}

impl CandidateWorkdir {
    fn path_for(run_dir: &Path, candidate_id: u64) -> PathBuf {
        run_dir.join(format!("cand_{candidate_id}"))
    }

    /// Creates a fresh workdir. Fails if it already exists, so two
    /// candidates can never share one.
    pub fn create(run_dir: &Path, candidate_id: u64) -> Result<Self, EvalError> {
        fs::create_dir_all(run_dir).map_err(|e| EvalError::io(run_dir, e))?;
        let root = Self::path_for(run_dir, candidate_id);
        fs::create_dir(&root).map_err(|e| EvalError::io(&root, e))?;
        Ok(CandidateWorkdir { root })
    }

    /// Reopens a workdir created earlier in the same run.
    pub fn open(run_dir: &Path, candidate_id: u64) -> Result<Self, EvalError> {
        let root = Self::path_for(run_dir, candidate_id);
        if !root.is_dir() {
            return Err(EvalError::io(
                &root,
                std::io::Error::new(std::io::ErrorKind::NotFound, "workdir missing"),
            ));
        }
        Ok(CandidateWorkdir { root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }
    pub fn design(&self) -> PathBuf {
        self.root.join("design.sv")
    }
    pub fn compile_log(&self) -> PathBuf {
        self.root.join("compile.log")
    }
    pub fn sim_log(&self) -> PathBuf {
        self.root.join("sim.log")
    }
    pub fn build_out(&self) -> PathBuf {
        self.root.join("build")
    }
    pub fn synth_dir(&self) -> PathBuf {
        self.root.join("synth")
    }
    pub fn commands_log(&self) -> PathBuf {
        self.root.join("commands.log")
    }

    pub fn write(&self, path: &Path, contents: &str) -> Result<(), EvalError> {
        if let Some(parent) = path.parent() {
            fs::create_dir_all(parent).map_err(|e| EvalError::io(parent, e))?;
        }
        fs::write(path, contents).map_err(|e| EvalError::io(path, e))
    }

    pub fn read(&self, path: &Path) -> Result<String, EvalError> {
        fs::read_to_string(path).map_err(|e| EvalError::io(path, e))
    }

    /// Appends one JSON line to `commands.log`.
    pub fn log_command(&self, entry: &serde_json::Value) -> Result<(), EvalError> {
        let path = self.commands_log();
        let mut f = OpenOptions::new()
            .create(true)
            .append(true)
            .open(&path)
            .map_err(|e| EvalError::io(&path, e))?;
        writeln!(f, "{entry}").map_err(|e| EvalError::io(&path, e))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(tag = "status", rename_all = "snake_case")]
pub enum StageStatus {
    Exited { code: Option<i32>, success: bool },
    TimedOut { after_ms: u64 },
}

impl StageStatus {
    pub fn success(self) -> bool {
        matches!(self, StageStatus::Exited { success: true, .. })
    }
}

/// One tool invocation: classified status and the captured log.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct StageRun {
    pub status: StageStatus,
    pub log: String,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ReportTexts {
    pub timing: String,
    pub area: String,
    pub power: String,
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct InvocationCounts {
    pub compile: usize,
    pub sim: usize,
    pub synth: usize,
}

#[derive(Debug, Default)]
pub(crate) struct Counters {
    compile: AtomicUsize,
    sim: AtomicUsize,
    synth: AtomicUsize,
}

impl Counters {
    pub(crate) fn bump(&self, stage: Stage) {
        let c = match stage {
            Stage::Compile => &self.compile,
            Stage::Sim => &self.sim,
            Stage::Synth => &self.synth,
        };
        c.fetch_add(1, Ordering::SeqCst);
    }

    pub(crate) fn snapshot(&self) -> InvocationCounts {
        InvocationCounts {
            compile: self.compile.load(Ordering::SeqCst),
            sim: self.sim.load(Ordering::SeqCst),
            synth: self.synth.load(Ordering::SeqCst),
        }
    }
}

/// The three tool stages. Implementations must tolerate concurrent calls
/// against distinct workdirs. The free functions in [`crate::evaluate`]
/// write sources and logs and enforce stage preconditions; adapters only
/// run tools.
pub trait ToolAdapter: Send + Sync {
    /// Compiles `<workdir>/design.sv`.
    fn compile(&self, wd: &CandidateWorkdir, tb: Option<&Path>) -> Result<StageRun, EvalError>;

    fn simulate(&self, wd: &CandidateWorkdir, tb: Option<&Path>) -> Result<StageRun, EvalError>;

    /// Report texts are `None` when the run failed.
    fn synthesize(&self, wd: &CandidateWorkdir)
        -> Result<(StageRun, Option<ReportTexts>), EvalError>;

    fn invocations(&self) -> InvocationCounts;
}

/// Runs real tools from command templates.
#[derive(Debug)]
pub struct CommandAdapter {
    cfg: ToolAdapterConfig,
    counters: Counters,
}

impl CommandAdapter {
    pub fn new(cfg: ToolAdapterConfig) -> Result<Self, EvalError> {
        cfg.validate()?;
        Ok(CommandAdapter {
            cfg,
            counters: Counters::default(),
        })
    }

    pub fn config(&self) -> &ToolAdapterConfig {
        &self.cfg
    }

    fn argv(&self, stage: Stage, wd: &CandidateWorkdir, tb: Option<&Path>) -> Result<Vec<String>, EvalError> {
        let template = self.cfg.template(stage);
        let parts = shlex::split(template)
            .ok_or_else(|| EvalError::Config(format!("{} template has unbalanced quoting", stage.as_str())))?;
        let out = match stage {
            Stage::Synth => wd.synth_dir(),
            _ => wd.build_out(),
        };
        let abs = |p: &Path| std::path::absolute(p).unwrap_or_else(|_| p.to_path_buf());
        let src = abs(&wd.design()).display().to_string();
        let workdir = abs(wd.root()).display().to_string();
        let out = abs(&out).display().to_string();
        let tb = tb.map(|p| abs(p).display().to_string());
        parts
            .into_iter()
            .map(|arg| {
                if arg.contains("{tb}") && tb.is_none() {
                    return Err(EvalError::Config(format!(
                        "{} template uses {{tb}} but the benchmark has no testbench",
                        stage.as_str()
                    )));
                }
                Ok(arg
                    .replace("{src}", &src)
                    .replace("{workdir}", &workdir)
                    .replace("{out}", &out)
                    .replace("{tb}", tb.as_deref().unwrap_or_default()))
            })
            .collect()
    }

    fn run(&self, stage: Stage, wd: &CandidateWorkdir, tb: Option<&Path>) -> Result<StageRun, EvalError> {
        let argv = self.argv(stage, wd, tb)?;
        let env: Vec<(String, String)> = self
            .cfg
            .env_allowlist
            .iter()
            .filter_map(|k| std::env::var(k).ok().map(|v| (k.clone(), v)))
            .collect();
        if stage == Stage::Synth {
            fs::create_dir_all(wd.synth_dir()).map_err(|e| EvalError::io(&wd.synth_dir(), e))?;
        }
        self.counters.bump(stage);
        let mut child = Command::new(&argv[0])
            .args(&argv[1..])
            .current_dir(wd.root())
            .env_clear()
            .envs(env.iter().map(|(k, v)| (k, v)))
            .stdin(Stdio::null())
            .stdout(Stdio::piped())
            .stderr(Stdio::piped())
            .spawn()
            .map_err(|source| EvalError::Spawn {
                program: argv[0].clone(),
                source,
            })?;
        // Readers report through channels so a grandchild that keeps a pipe
        // open after a timeout kill cannot hang the run.
        let pump = |r: Option<Box<dyn Read + Send>>| {
            let (tx, rx) = mpsc::channel();
            thread::spawn(move || {
                let mut buf = Vec::new();
                if let Some(mut r) = r {
                    let _ = r.read_to_end(&mut buf);
                }
                let _ = tx.send(buf);
            });
            rx
        };
        let out_rx = pump(child.stdout.take().map(|s| Box::new(s) as Box<dyn Read + Send>));
        let err_rx = pump(child.stderr.take().map(|s| Box::new(s) as Box<dyn Read + Send>));
        let timeout = Duration::from_secs_f64(self.cfg.timeouts.get(stage));
        let waited = child
            .wait_timeout(timeout)
            .map_err(|e| EvalError::Environment(format!("waiting on {}: {e}", argv[0])))?;
        let status = match waited {
            Some(st) => StageStatus::Exited {
                code: st.code(),
                success: st.code().is_some_and(|c| self.cfg.success_exit_codes.contains(&c)),
            },
            None => {
                let _ = child.kill();
                let _ = child.wait();
                StageStatus::TimedOut {
                    after_ms: timeout.as_millis() as u64,
                }
            }
        };
        let collect = |rx: mpsc::Receiver<Vec<u8>>| match status {
            StageStatus::TimedOut { .. } => rx.recv_timeout(Duration::from_secs(1)).unwrap_or_default(),
            StageStatus::Exited { .. } => rx.recv().unwrap_or_default(),
        };
        let mut bytes = collect(out_rx);
        bytes.extend(collect(err_rx));
        let log = String::from_utf8_lossy(&bytes).into_owned();
        wd.log_command(&json!({
            "stage": stage.as_str(),
            "argv": argv,
            "env": env.iter().map(|(k, v)| (k.clone(), v.clone())).collect::<std::collections::BTreeMap<_, _>>(),
            "result": status,
        }))?;
        Ok(StageRun { status, log })
    }
}

impl ToolAdapter for CommandAdapter {
    fn compile(&self, wd: &CandidateWorkdir, tb: Option<&Path>) -> Result<StageRun, EvalError> {
        self.run(Stage::Compile, wd, tb)
    }

    fn simulate(&self, wd: &CandidateWorkdir, tb: Option<&Path>) -> Result<StageRun, EvalError> {
        self.run(Stage::Sim, wd, tb)
    }

    fn synthesize(&self, wd: &CandidateWorkdir) -> Result<(StageRun, Option<ReportTexts>), EvalError> {
        let run = self.run(Stage::Synth, wd, None)?;
        if !run.status.success() {
            return Ok((run, None));
        }
        let read = |rel: &Path| {
            let p = wd.root().join(rel);
            fs::read_to_string(&p).map_err(|e| EvalError::io(&p, e))
        };
        let paths = &self.cfg.report_paths;
        let texts = ReportTexts {
            timing: read(&paths.timing)?,
            area: read(&paths.area)?,
            power: read(&paths.power)?,
        };
        Ok((run, Some(texts)))
    }

    fn invocations(&self) -> InvocationCounts {
        self.counters.snapshot()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_config_validates() {
        ToolAdapterConfig::default().validate().unwrap();
    }

    #[test]
    fn missing_placeholder_rejected() {
        let cfg = ToolAdapterConfig {
            compile_cmd_template: "iverilog -o out design.sv".into(),
            ..Default::default()
        };
        assert!(matches!(cfg.validate(), Err(EvalError::Config(m)) if m.contains("{src}")));
        let cfg = ToolAdapterConfig {
            timeouts: StageTimeouts {
                sim_s: 0.0,
                ..Default::default()
            },
            ..Default::default()
        };
        assert!(cfg.validate().is_err());
    }

    #[test]
    fn workdirs_are_exclusive() {
        let tmp = tempfile::tempdir().unwrap();
        let wd = CandidateWorkdir::create(tmp.path(), 3).unwrap();
        assert!(wd.root().ends_with("cand_3"));
        assert!(CandidateWorkdir::create(tmp.path(), 3).is_err());
        assert_eq!(CandidateWorkdir::open(tmp.path(), 3).unwrap(), wd);
        assert!(CandidateWorkdir::open(tmp.path(), 4).is_err());
    }

    #[cfg(unix)]
    fn shell_cfg(compile: &str) -> ToolAdapterConfig {
        ToolAdapterConfig {
            compile_cmd_template: compile.into(),
            sim_cmd_template: "sh -c 'echo sim {out}'".into(),
            synth_cmd_template: "sh -c 'echo synth {src}'".into(),
            timeouts: StageTimeouts {
                compile_s: 0.5,
                ..Default::default()
            },
            ..Default::default()
        }
    }

    #[cfg(unix)]
    #[test]
    fn command_exit_status_and_log() {
        let tmp = tempfile::tempdir().unwrap();
        let wd = CandidateWorkdir::create(tmp.path(), 0).unwrap();
        let a = CommandAdapter::new(shell_cfg("sh -c 'echo compiling {src}; echo oops >&2; exit 3'")).unwrap();
        let run = a.compile(&wd, None).unwrap();
        assert_eq!(
            run.status,
            StageStatus::Exited {
                code: Some(3),
                success: false
            }
        );
        assert!(run.log.contains("design.sv"));
        assert!(run.log.contains("oops"));
        assert_eq!(a.invocations().compile, 1);
        let logged = fs::read_to_string(wd.commands_log()).unwrap();
        assert!(logged.contains("\"stage\":\"compile\""));
        assert!(logged.contains("\"env\""));
    }

    #[cfg(unix)]
    #[test]
    fn command_timeout() {
        let tmp = tempfile::tempdir().unwrap();
        let wd = CandidateWorkdir::create(tmp.path(), 0).unwrap();
        let a = CommandAdapter::new(shell_cfg("sh -c 'exec sleep 5' {src}")).unwrap();
        let run = a.compile(&wd, None).unwrap();
        assert!(matches!(run.status, StageStatus::TimedOut { .. }));
    }

    #[test]
    fn spawn_failure_is_environment_error() {
        let tmp = tempfile::tempdir().unwrap();
        let wd = CandidateWorkdir::create(tmp.path(), 0).unwrap();
        let cfg = ToolAdapterConfig {
            compile_cmd_template: "definitely-not-a-real-tool-xyz {src}".into(),
            ..Default::default()
        };
        let a = CommandAdapter::new(cfg).unwrap();
        assert!(matches!(a.compile(&wd, None), Err(EvalError::Spawn { .. })));
    }
}
