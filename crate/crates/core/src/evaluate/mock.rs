// SPDX-License-Identifier: Apache-2.0

//! A deterministic in-process adapter.
//!
//! Two modes:
//!
//! * **Directives** (default): outcomes come from `// mock:` comments in the
//!   candidate source, e.g. `// mock: compile=1 sim=0 warn=2`, and
//!   `// mock: area=59.9 leak=10 internal=40.9 switch=30 wns=0.2`. Missing
//!   keys fall back to lexical analysis of the source.
//! * **Scripted**: a queue of [`MockOutcome`]s, one consumed per compile call.
//!
//! Each workdir remembers the outcome chosen at compile time, so sim and
//! synth for that candidate stay consistent.

use std::collections::{HashMap, VecDeque};
use std::path::{Path, PathBuf};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::adapter::{
    CandidateWorkdir, Counters, InvocationCounts, ReportTexts, Stage, StageRun, StageStatus,
    ToolAdapter,
};
use super::lint::{lexically_balanced, structural_check, Rule};
use super::ppa::{render_reports, ParsedPpa};
use super::EvalError;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MockOutcome {
    pub compile_ok: bool,
    pub sim_ok: bool,
    #[serde(default)]
    pub warn_count: u32,
    #[serde(default)]
    pub ppa: Option<ParsedPpa>,
    #[serde(default = "yes")]
    pub synth_ok: bool,
}

fn yes() -> bool {
    true
}

impl MockOutcome {
    pub fn pass() -> Self {
        MockOutcome {
            compile_ok: true,
            sim_ok: true,
            warn_count: 0,
            ppa: None,
            synth_ok: true,
        }
    }

    pub fn compile_fail() -> Self {
        MockOutcome {
            compile_ok: false,
            sim_ok: false,
            ..Self::pass()
        }
    }

    pub fn sim_fail() -> Self {
        MockOutcome {
            sim_ok: false,
            ..Self::pass()
        }
    }

    pub fn with_ppa(mut self, ppa: ParsedPpa) -> Self {
        self.ppa = Some(ppa);
        self
    }
}

#[derive(Debug)]
enum Mode {
    Directives,
    Scripted(Mutex<VecDeque<MockOutcome>>),
}

#[derive(Debug)]
pub struct MockAdapter {
    mode: Mode,
    chosen: Mutex<HashMap<PathBuf, MockOutcome>>,
    counters: Counters,
}

impl Default for MockAdapter {
    fn default() -> Self {
        Self::directives()
    }
}

impl MockAdapter {
    pub fn directives() -> Self {
        MockAdapter {
            mode: Mode::Directives,
            chosen: Mutex::default(),
            counters: Counters::default(),
        }
    }

    pub fn scripted(outcomes: impl IntoIterator<Item = MockOutcome>) -> Self {
        MockAdapter {
            mode: Mode::Scripted(Mutex::new(outcomes.into_iter().collect())),
            chosen: Mutex::default(),
            counters: Counters::default(),
        }
    }

    fn outcome_for(&self, wd: &CandidateWorkdir) -> Result<MockOutcome, EvalError> {
        if let Some(o) = self.chosen.lock().expect("mock lock").get(wd.root()) {
            return Ok(o.clone());
        }
        let source = wd.read(&wd.design())?;
        let o = match &self.mode {
            Mode::Directives => outcome_from_source(&source)?,
            Mode::Scripted(q) => q
                .lock()
                .expect("mock lock")
                .pop_front()
                .ok_or_else(|| EvalError::Environment("mock script exhausted".into()))?,
        };
        self.chosen
            .lock()
            .expect("mock lock")
            .insert(wd.root().to_path_buf(), o.clone());
        Ok(o)
    }

    fn record(&self, stage: Stage, wd: &CandidateWorkdir, status: StageStatus) -> Result<(), EvalError> {
        self.counters.bump(stage);
        wd.log_command(&json!({
            "stage": stage.as_str(),
            "argv": ["mock", stage.as_str()],
            "env": {},
            "result": status,
        }))
    }
}

fn exited(success: bool) -> StageStatus {
    StageStatus::Exited {
        code: Some(if success { 0 } else { 1 }),
        success,
    }
}

fn flag(key: &str, v: &str) -> Result<bool, EvalError> {
    match v {
        "1" | "pass" | "true" | "ok" => Ok(true),
        "0" | "fail" | "false" => Ok(false),
        _ => Err(EvalError::Config(format!("mock directive {key}={v}: expected 0 or 1"))),
    }
}

fn real(key: &str, v: &str) -> Result<f64, EvalError> {
    v.parse::<f64>()
        .ok()
        .filter(|x| x.is_finite())
        .ok_or_else(|| EvalError::Config(format!("mock directive {key}={v}: expected a number")))
}

/// Deterministic PPA for sources without PPA directives, scaled by token
/// count so larger designs cost more.
fn derived_ppa(source: &str) -> ParsedPpa {
    let tokens = source
        .lines()
        .map(|l| l.split("//").next().unwrap_or(""))
        .flat_map(str::split_whitespace)
        .count() as f64;
    let area = (10.0 + 1.5 * tokens).round();
    ParsedPpa {
        area_um2: area,
        power_uw: [
            (area * 0.15 * 10.0).round() / 10.0,
            (area * 0.6 * 10.0).round() / 10.0,
            (area * 0.45 * 10.0).round() / 10.0,
        ],
        wns_ns: ((0.5 - 0.002 * tokens) * 1000.0).round() / 1000.0,
    }
}

/// Reads `// mock:` directives, falling back to source analysis.
pub fn outcome_from_source(source: &str) -> Result<MockOutcome, EvalError> {
    let mut kv: Vec<(String, String)> = Vec::new();
    for line in source.lines() {
        let Some(rest) = line.trim_start().strip_prefix("//").map(str::trim_start) else {
            continue;
        };
        let Some(rest) = rest.strip_prefix("mock:") else { continue };
        for item in rest.split(|c: char| c.is_whitespace() || c == ',').filter(|s| !s.is_empty()) {
            let (k, v) = item
                .split_once('=')
                .ok_or_else(|| EvalError::Config(format!("mock directive {item:?} lacks '='")))?;
            kv.push((k.to_string(), v.to_string()));
        }
    }
    let get = |k: &str| kv.iter().rev().find(|(key, _)| key == k).map(|(_, v)| v.as_str());

    let compile_ok = match get("compile") {
        Some(v) => flag("compile", v)?,
        None => lexically_balanced(source),
    };
    let sim_ok = compile_ok
        && match get("sim") {
            Some(v) => flag("sim", v)?,
            None => !structural_check(source, &Rule::ALL).any_fail(),
        };
    let warn_count = match get("warn") {
        Some(v) => v
            .parse()
            .map_err(|_| EvalError::Config(format!("mock directive warn={v}: expected a count")))?,
        None => 0,
    };
    let mut ppa = derived_ppa(source);
    if let Some(v) = get("area") {
        ppa.area_um2 = real("area", v)?;
    }
    for (i, k) in ["leak", "internal", "switch"].into_iter().enumerate() {
        if let Some(v) = get(k) {
            ppa.power_uw[i] = real(k, v)?;
        }
    }
    if let Some(v) = get("wns") {
        ppa.wns_ns = real("wns", v)?;
    }
    let synth_ok = match get("synth") {
        Some(v) => flag("synth", v)?,
        None => true,
    };
    Ok(MockOutcome {
        compile_ok,
        sim_ok,
        warn_count,
        ppa: Some(ppa),
        synth_ok,
    })
}

impl ToolAdapter for MockAdapter {
    fn compile(&self, wd: &CandidateWorkdir, _tb: Option<&Path>) -> Result<StageRun, EvalError> {
        let o = self.outcome_for(wd)?;
        let status = exited(o.compile_ok);
        self.record(Stage::Compile, wd, status)?;
        let mut log = String::from("mock compile: design.sv\n");
        for i in 0..o.warn_count {
            log.push_str(&format!("Warning-[MOCK-W{i}] design.sv: mock lint warning {i}\n"));
        }
        if !o.compile_ok {
            log.push_str("Error-[MOCK-SE] design.sv: syntax error\n");
        }
        Ok(StageRun { status, log })
    }

    fn simulate(&self, wd: &CandidateWorkdir, _tb: Option<&Path>) -> Result<StageRun, EvalError> {
        let o = self.outcome_for(wd)?;
        let status = exited(o.sim_ok);
        self.record(Stage::Sim, wd, status)?;
        let log = if o.sim_ok {
            "mock sim: all checks passed\nTEST PASSED\n".to_string()
        } else {
            "mock sim: running testbench\nAssertion failed: mock check at time 100 ns\n".to_string()
        };
        Ok(StageRun { status, log })
    }

    fn synthesize(&self, wd: &CandidateWorkdir) -> Result<(StageRun, Option<ReportTexts>), EvalError> {
        let o = self.outcome_for(wd)?;
        let status = exited(o.synth_ok);
        self.record(Stage::Synth, wd, status)?;
        if !o.synth_ok {
            let log = "mock synth: elaborating\nError: mock synthesis failure\n".to_string();
            return Ok((StageRun { status, log }, None));
        }
        let ppa = match o.ppa {
            Some(p) => p,
            None => derived_ppa(&wd.read(&wd.design())?),
        };
        let (timing, area, power) = render_reports(&ppa);
        let run = StageRun {
            status,
            log: "mock synth: reports written\n".to_string(),
        };
        Ok((run, Some(ReportTexts { timing, area, power })))
    }

    fn invocations(&self) -> InvocationCounts {
        self.counters.snapshot()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn directives_parse() {
        let src = "// mock: compile=1 sim=0 warn=2\n// mock: area=59.9, leak=10 internal=40.9 switch=30 wns=0.2\nmodule m; endmodule\n";
        let o = outcome_from_source(src).unwrap();
        assert!(o.compile_ok);
        assert!(!o.sim_ok);
        assert_eq!(o.warn_count, 2);
        let p = o.ppa.unwrap();
        assert_eq!(p.area_um2, 59.9);
        assert_eq!(p.power_uw, [10.0, 40.9, 30.0]);
        assert_eq!(p.wns_ns, 0.2);
    }

    #[test]
    fn defaults_from_source() {
        let o = outcome_from_source("module m(input logic a); endmodule").unwrap();
        assert!(o.compile_ok && o.sim_ok);
        let o = outcome_from_source("module m(input logic a);").unwrap();
        assert!(!o.compile_ok && !o.sim_ok);
        let bad = "module m; always_ff @(posedge clk) begin if (rst) s <= 0; else case (s) 0: s <= 1; endcase end endmodule";
        let o = outcome_from_source(bad).unwrap();
        assert!(o.compile_ok && !o.sim_ok);
    }

    #[test]
    fn bad_directive() {
        assert!(outcome_from_source("// mock: compile=maybe\n").is_err());
        assert!(outcome_from_source("// mock: compile\n").is_err());
    }

    #[test]
    fn scripted_queue() {
        let tmp = tempfile::tempdir().unwrap();
        let a = MockAdapter::scripted([MockOutcome::compile_fail(), MockOutcome::pass()]);
        for (id, want) in [(0, false), (1, true)] {
            let wd = CandidateWorkdir::create(tmp.path(), id).unwrap();
            wd.write(&wd.design(), "module m; endmodule").unwrap();
            assert_eq!(a.compile(&wd, None).unwrap().status.success(), want);
        }
        let wd = CandidateWorkdir::create(tmp.path(), 2).unwrap();
        wd.write(&wd.design(), "module m; endmodule").unwrap();
        assert!(matches!(a.compile(&wd, None), Err(EvalError::Environment(_))));
        assert_eq!(a.invocations().compile, 2);
    }
}
