// SPDX-License-Identifier: Apache-2.0

//! Two-phase runs and suite execution.

use std::cell::{Cell, RefCell};
use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::sync::atomic::{AtomicUsize, Ordering};
use std::sync::Mutex;

use serde::{Deserialize, Serialize};
use serde_json::json;

use super::config::{AdapterKind, BackendKind, BanditRewardSource, RunConfig};
use super::suite::{load_suite, testbench_path, Baselines};
use super::trace::{emit_trace_line, phase_header, structured_trace_line, summary_line};
use super::{write_file, HarnessError};
use crate::anneal::{
    phase_rng, phase_switch, run_sa, stream_rng, EventDetail, Evaluation, PpaPoint, SaRng,
    StepError, TraceEvent, BANDIT_STREAM,
};
use crate::evaluate::{
    compile_check, parse_ppa, simulate, structural_check, synthesize, CandidateWorkdir,
    CommandAdapter, EvalError, InvocationCounts, MockAdapter, ParsedPpa, Rule,
    StructuralCheckResult, ToolAdapter, Verdict,
};
use crate::model::{
    Candidate, ComponentRates, CorrectnessMetrics, EvalReport, FeedbackPacket, Phase, PpaReport,
    ProblemSpec, Role,
};
use crate::objectives::{
    correctness_metrics, correctness_reward, ppa_cost, select_best_feasible, with_depth,
    NormalizationRef, RawPpa,
};
use crate::pipelines::backend::{
    ArchivingBackend, GenerationBackend, GenerationRequest, MockBackend, ReplayBackend,
    WireBackend,
};
use crate::pipelines::feedback::build_feedback_packet;
use crate::pipelines::template::{render_prompt, strip_code_fence, TemplateLibrary};
use crate::pipelines::{parse_critique, select_pipeline, update_bandit, BanditState, LogPatterns};

pub const PHASE1_ARTIFACT: &str = "out_phase1_best.sv";
pub const PHASE2_ARTIFACT: &str = "out_phase2_best.sv";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RunStatus {
    /// Both phases ran.
    Complete,
    /// Phase 1 ended without a design fit for PPA refinement.
    NoFeasible,
    /// Aborted by an environment or configuration error.
    Failed,
}

/// The design a run reports for correctness: highest reward among
/// candidates that compiled.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FinalDesign {
    pub candidate_id: u64,
    pub reward: f64,
    pub gate: bool,
    pub struct_pass: bool,
}

/// Counts over every Phase-1 candidate of a run, for the depth score.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct ComponentCounts {
    pub candidates: u32,
    pub reset_ok: u32,
    pub pipeline_ok: u32,
    pub hazard_ok: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase1Summary {
    pub best_candidate_id: u64,
    pub best_score: f64,
    pub best_gate: bool,
    pub final_design: Option<FinalDesign>,
    pub components: ComponentCounts,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Phase2Summary {
    pub seed_candidate_id: u64,
    pub reference: NormalizationRef,
    pub best_candidate_id: u64,
    pub selected_iteration: u32,
    pub best_ppa: PpaReport,
    pub evaluations: u32,
    pub gated_evaluations: u32,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub run_id: String,
    pub benchmark_id: String,
    pub run_index: u32,
    pub seed: u64,
    pub status: RunStatus,
    pub error: Option<String>,
    pub phase1: Option<Phase1Summary>,
    pub phase2: Option<Phase2Summary>,
    pub trace: Vec<TraceEvent>,
    pub invocations: InvocationCounts,
}

/// The PPA row a benchmark reports: the run whose Phase-2 best has the
/// lowest cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PpaRow {
    pub run_index: u32,
    pub candidate_id: u64,
    pub area_um2: f64,
    pub power_uw: f64,
    pub wns_ns: f64,
    pub j_ppa: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub id: String,
    pub runs: Vec<RunResult>,
    pub correctness: Option<CorrectnessMetrics>,
    pub ppa: Option<PpaRow>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SuiteReport {
    pub base_seed: u64,
    pub runs_per_benchmark: u32,
    pub benchmarks: Vec<BenchmarkReport>,
}

impl SuiteReport {
    /// Canonical serialization; byte-identical for identical runs.
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("suite report serializes")
    }

    pub fn any_feasible(&self) -> bool {
        self.benchmarks.iter().any(|b| b.ppa.is_some())
    }

    pub fn failed_runs(&self) -> impl Iterator<Item = &RunResult> {
        self.benchmarks
            .iter()
            .flat_map(|b| &b.runs)
            .filter(|r| r.status == RunStatus::Failed)
    }
}

pub fn run_id(benchmark_id: &str, run_index: u32) -> String {
    format!("{benchmark_id}_run{run_index}")
}

/// What one benchmark run needs besides its backend and adapter.
pub struct BenchmarkContext<'a> {
    pub spec: &'a ProblemSpec,
    pub config: &'a RunConfig,
    pub templates: &'a TemplateLibrary,
    pub testbench: Option<PathBuf>,
}

struct P1Record {
    candidate: Candidate,
    report: EvalReport,
    lint: StructuralCheckResult,
}

struct P2Record {
    candidate_id: u64,
    gate: bool,
    ppa: Option<PpaReport>,
}

/// Mutable state shared by the mutate and evaluate closures of a run.
struct Runner<'a> {
    ctx: &'a BenchmarkContext<'a>,
    backend: RefCell<&'a mut dyn GenerationBackend>,
    adapter: &'a dyn ToolAdapter,
    run_dir: &'a Path,
    patterns: LogPatterns,
    bandit: RefCell<BanditState>,
    bandit_rng: RefCell<SaRng>,
    pending_arm: Cell<Option<Role>>,
    next_id: Cell<u64>,
    p1: RefCell<Vec<P1Record>>,
    p2: RefCell<Vec<P2Record>>,
    failure: RefCell<Option<HarnessError>>,
}

fn ppa_point(p: &PpaReport) -> PpaPoint {
    PpaPoint {
        area_um2: p.area_um2(),
        power_uw: p.power_total_uw(),
        wns_ns: p.wns_ns(),
    }
}

impl<'a> Runner<'a> {
    fn cfg(&self) -> &RunConfig {
        self.ctx.config
    }

    /// Keeps the typed error for the caller and hands the controller a
    /// boxed copy of its message.
    fn step<T>(&self, r: Result<T, HarnessError>) -> Result<T, StepError> {
        r.map_err(|e| {
            let msg: StepError = e.to_string().into();
            self.failure.borrow_mut().get_or_insert(e);
            msg
        })
    }

    fn generate(
        &self,
        role: Role,
        iteration: u32,
        rtl: Option<&str>,
        feedback: Option<&FeedbackPacket>,
    ) -> Result<String, HarnessError> {
        let template = self.ctx.templates.get(&self.ctx.spec.id, role);
        let (system, user) = render_prompt(template, self.ctx.spec, rtl, feedback)?;
        let req = GenerationRequest {
            role,
            iteration,
            system: &system,
            user: &user,
            params: self.cfg().backend.params,
        };
        Ok(self.backend.borrow_mut().generate(&req)?)
    }

    fn candidate(
        &self,
        response: &str,
        role: Role,
        parent: Option<u64>,
        phase: Phase,
        iteration: u32,
    ) -> Result<Candidate, HarnessError> {
        let (mut source, _) = strip_code_fence(response);
        if source.trim().is_empty() {
            source = "// empty response\n".to_string();
        }
        let id = self.next_id.get();
        self.next_id.set(id + 1);
        Ok(Candidate::new(
            id,
            self.ctx.spec.id.clone(),
            source,
            role,
            parent,
            phase,
            iteration,
        )?)
    }

    fn initial(&self) -> Result<Candidate, HarnessError> {
        let response = self.generate(Role::Generator, 0, None, None)?;
        self.candidate(&response, Role::Generator, None, Phase::P1, 0)
    }

    fn mutate(
        &self,
        phase: Phase,
        current: &Candidate,
        feedback: &FeedbackPacket,
        iteration: u32,
    ) -> Result<Candidate, HarnessError> {
        let role = select_pipeline(&self.bandit.borrow(), &mut *self.bandit_rng.borrow_mut());
        self.pending_arm.set(Some(role));
        if role == Role::Generator {
            let response = self.generate(role, iteration, None, None)?;
            return self.candidate(&response, role, None, phase, iteration);
        }
        let response = self.generate(role, iteration, Some(&current.source), Some(feedback))?;
        self.candidate(&response, role, Some(current.candidate_id), phase, iteration)
    }

    fn reward_arm(&self, reward: f64) -> Result<(), HarnessError> {
        let Some(role) = self.pending_arm.take() else {
            return Ok(());
        };
        let next = update_bandit(&self.bandit.borrow(), role, reward)?;
        *self.bandit.borrow_mut() = next;
        Ok(())
    }

    fn critique(&self, candidate: &Candidate, iteration: u32) -> Result<Option<crate::model::CritiqueScores>, HarnessError> {
        let raw = self.generate(Role::Critique, iteration, Some(&candidate.source), None)?;
        match parse_critique(&raw) {
            Ok(s) => Ok(Some(s)),
            Err(e) => {
                log::warn!("candidate {}: unusable critique: {e}", candidate.candidate_id);
                Ok(None)
            }
        }
    }

    fn tb(&self) -> Option<&Path> {
        self.ctx.testbench.as_deref()
    }

    fn eval_p1(&self, candidate: &Candidate, iteration: u32) -> Result<Evaluation, HarnessError> {
        let cfg = self.cfg();
        let tool = &cfg.adapter.tool;
        let wd = CandidateWorkdir::create(self.run_dir, candidate.candidate_id)?;
        let compiled = compile_check(self.adapter, candidate, &wd, self.tb(), &self.patterns)?;
        let sim = if compiled.compile_ok {
            Some(simulate(self.adapter, &compiled, &wd, self.tb(), &self.patterns)?)
        } else {
            None
        };
        let sim_ok = sim.as_ref().is_some_and(|s| s.sim_ok);
        let lint = structural_check(&candidate.source, &tool.lint_rules);
        let critique = if cfg.pipelines.critique {
            self.critique(candidate, iteration)?
        } else {
            None
        };
        let mut feedback = build_feedback_packet(
            &compiled.raw_log,
            sim.as_ref().map_or("", |s| s.raw_log.as_str()),
            &self.patterns,
            tool.feedback_context_lines,
        );
        feedback
            .warnings
            .extend(lint.findings().into_iter().map(|f| format!("lint: {f}")));
        let reward = correctness_reward(
            compiled.compile_ok,
            sim_ok,
            compiled.warn_count,
            critique.as_ref(),
            &cfg.weights.reward,
        )?;
        let report = EvalReport::new(
            compiled.compile_ok,
            sim_ok,
            compiled.warn_count,
            critique,
            reward,
            feedback.clone(),
        )?;
        let arm_reward = match cfg.pipelines.bandit_reward {
            BanditRewardSource::Reward => reward,
            BanditRewardSource::Gate => f64::from(u8::from(report.gate())),
        };
        self.reward_arm(arm_reward)?;
        write_file(
            &wd.root().join("eval.json"),
            &serde_json::to_string_pretty(&json!({ "report": &report, "lint": &lint }))
                .expect("eval report serializes"),
        )?;
        self.p1.borrow_mut().push(P1Record {
            candidate: candidate.clone(),
            report,
            lint,
        });
        Ok(Evaluation {
            score: reward,
            feedback,
            detail: EventDetail::P1 {
                compile: compiled.compile_ok,
                sim: sim_ok,
            },
        })
    }

    fn ppa_report(&self, parsed: &ParsedPpa, reference: &NormalizationRef) -> Result<PpaReport, HarnessError> {
        let norm = ppa_cost(
            RawPpa {
                area_um2: parsed.area_um2,
                power_total_uw: parsed.power_total_uw(),
                wns_ns: parsed.wns_ns,
            },
            Some(reference),
            &self.cfg().weights.ppa,
        )?;
        Ok(PpaReport::new(parsed.area_um2, parsed.power_uw, parsed.wns_ns, norm)?)
    }

    fn synth_and_parse(&self, wd: &CandidateWorkdir) -> Result<Result<ParsedPpa, String>, HarnessError> {
        match synthesize(self.adapter, wd, true) {
            Ok(texts) => Ok(Ok(parse_ppa(
                &texts.timing,
                &texts.area,
                &texts.power,
                &self.cfg().adapter.tool.ppa_patterns,
            )
            .map_err(EvalError::from)?)),
            Err(EvalError::Synthesis { log }) => Ok(Err(log)),
            Err(e) => Err(e.into()),
        }
    }

    fn eval_p2(
        &self,
        candidate: &Candidate,
        reference: &NormalizationRef,
        seed: &(u64, PpaReport),
    ) -> Result<Evaluation, HarnessError> {
        if candidate.candidate_id == seed.0 {
            self.p2.borrow_mut().push(P2Record {
                candidate_id: seed.0,
                gate: true,
                ppa: Some(seed.1.clone()),
            });
            let mut feedback = FeedbackPacket::default();
            feedback.warnings.push(ppa_summary(&seed.1));
            return Ok(Evaluation {
                score: -seed.1.j_ppa(),
                feedback,
                detail: EventDetail::P2 {
                    compile: true,
                    sim: true,
                    ppa: Some(ppa_point(&seed.1)),
                },
            });
        }
        let tool = &self.cfg().adapter.tool;
        let wd = CandidateWorkdir::create(self.run_dir, candidate.candidate_id)?;
        let compiled = compile_check(self.adapter, candidate, &wd, self.tb(), &self.patterns)?;
        let sim = if compiled.compile_ok {
            Some(simulate(self.adapter, &compiled, &wd, self.tb(), &self.patterns)?)
        } else {
            None
        };
        let sim_ok = sim.as_ref().is_some_and(|s| s.sim_ok);
        let gate = crate::evaluate::gate(compiled.compile_ok, sim_ok);
        let mut feedback = build_feedback_packet(
            &compiled.raw_log,
            sim.as_ref().map_or("", |s| s.raw_log.as_str()),
            &self.patterns,
            tool.feedback_context_lines,
        );
        let ppa = if gate {
            match self.synth_and_parse(&wd)? {
                Ok(parsed) => Some(self.ppa_report(&parsed, reference)?),
                Err(log) => {
                    let last = log.lines().last().unwrap_or("synthesis failed");
                    feedback.warnings.push(format!("synthesis: {last}"));
                    None
                }
            }
        } else {
            None
        };
        let parent_cost = candidate
            .parent_id
            .and_then(|p| {
                self.p2
                    .borrow()
                    .iter()
                    .find(|r| r.candidate_id == p)
                    .and_then(|r| r.ppa.as_ref().map(PpaReport::j_ppa))
            })
            .unwrap_or(seed.1.j_ppa());
        let improved = ppa.as_ref().is_some_and(|p| p.j_ppa() < parent_cost);
        self.reward_arm(if improved { 1.0 } else { 0.0 })?;
        if let Some(p) = &ppa {
            feedback.warnings.push(ppa_summary(p));
        }
        let score = ppa.as_ref().map_or(f64::NEG_INFINITY, |p| -p.j_ppa());
        let detail = EventDetail::P2 {
            compile: compiled.compile_ok,
            sim: sim_ok,
            ppa: ppa.as_ref().map(ppa_point),
        };
        self.p2.borrow_mut().push(P2Record {
            candidate_id: candidate.candidate_id,
            gate,
            ppa,
        });
        Ok(Evaluation {
            score,
            feedback,
            detail,
        })
    }
}

fn ppa_summary(p: &PpaReport) -> String {
    format!(
        "ppa: area={:.3} um2, power={:.3} uW, wns={:.3} ns, cost={:.4}",
        p.area_um2(),
        p.power_total_uw(),
        p.wns_ns(),
        p.j_ppa()
    )
}

fn components(records: &[P1Record]) -> ComponentCounts {
    let mut c = ComponentCounts::default();
    for r in records {
        c.candidates += 1;
        c.reset_ok += u32::from(r.lint.satisfied(Rule::Reset));
        c.pipeline_ok += u32::from(r.lint.satisfied(Rule::PipelineConsistency));
        c.hazard_ok += u32::from(r.report.critique().is_some_and(|s| s.hazard.value() == 1.0));
    }
    c
}

fn final_design(records: &[P1Record]) -> Option<FinalDesign> {
    let mut best: Option<&P1Record> = None;
    for r in records.iter().filter(|r| r.report.compile_ok()) {
        if best.is_none_or(|b| r.report.correctness_reward() > b.report.correctness_reward()) {
            best = Some(r);
        }
    }
    best.map(|r| FinalDesign {
        candidate_id: r.candidate.candidate_id,
        reward: r.report.correctness_reward(),
        gate: r.report.gate(),
        struct_pass: r.report.gate()
            && !r.lint.any_fail(),
    })
}

/// Partial results of a run; filled as far as the run got.
#[derive(Default)]
struct Progress {
    phase1: Option<Phase1Summary>,
    phase2: Option<Phase2Summary>,
    trace_p1: Vec<TraceEvent>,
    trace_p2: Vec<TraceEvent>,
    p1_best: Option<(Candidate, f64)>,
    p2_best: Option<(Candidate, f64)>,
}

fn execute(runner: &Runner<'_>, seed: u64, progress: &mut Progress) -> Result<RunStatus, HarnessError> {
    let cfg = runner.cfg();
    let sa = cfg.sa_config();

    let take_failure = |e: crate::anneal::SaError| -> HarnessError {
        runner.failure.borrow_mut().take().unwrap_or(HarnessError::Anneal {
            phase: e.phase,
            iteration: e.iteration,
            message: e.source.to_string(),
        })
    };

    // Phase 1.
    let initial = runner.initial()?;
    let mut rng = phase_rng(seed, Phase::P1);
    let outcome = run_sa(
        initial,
        &sa.phase1,
        Phase::P1,
        0,
        &mut rng,
        |cur, fb, k| runner.step(runner.mutate(Phase::P1, cur, fb, k)),
        |cand, k| runner.step(runner.eval_p1(cand, k)),
        &mut crate::anneal::NullSink,
    );
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            progress.trace_p1 = e.trace.clone();
            return Err(take_failure(e));
        }
    };
    progress.trace_p1 = outcome.trace.clone();
    let records = runner.p1.borrow();
    let best_record = records
        .iter()
        .find(|r| r.candidate.candidate_id == outcome.best.candidate_id)
        .expect("best candidate was evaluated");
    let best_gate = best_record.report.gate();
    let best_score = best_record.report.correctness_reward();
    progress.phase1 = Some(Phase1Summary {
        best_candidate_id: outcome.best.candidate_id,
        best_score,
        best_gate,
        final_design: final_design(&records),
        components: components(&records),
    });
    drop(records);
    progress.p1_best = Some((outcome.best.clone(), best_score));

    if !phase_switch(best_score, best_gate, sa.phase1_target) {
        return Ok(RunStatus::NoFeasible);
    }

    // Normalization reference from the seed's synthesis (or the config).
    let seed_cand = outcome.best.clone();
    let wd = CandidateWorkdir::open(runner.run_dir, seed_cand.candidate_id)?;
    let parsed = match runner.synth_and_parse(&wd)? {
        Ok(p) => p,
        Err(log) => {
            log::warn!(
                "{}: seed synthesis failed: {}",
                runner.ctx.spec.id,
                log.lines().last().unwrap_or_default()
            );
            return Ok(RunStatus::NoFeasible);
        }
    };
    let reference = match cfg.weights.reference_overrides.get(&runner.ctx.spec.id) {
        Some(o) => NormalizationRef::new(
            runner.ctx.spec.id.clone(),
            o.area_ref_um2,
            o.power_ref_uw,
            o.clock_period_ns,
        )?,
        None => NormalizationRef::new(
            runner.ctx.spec.id.clone(),
            parsed.area_um2,
            parsed.power_total_uw(),
            cfg.weights.clock_period_ns,
        )?,
    };
    let seed_ppa = (seed_cand.candidate_id, runner.ppa_report(&parsed, &reference)?);

    // Phase 2 continues the iteration count where Phase 1 stopped.
    let offset = progress.trace_p1.last().map_or(0, |e| e.iteration);
    let mut rng = phase_rng(seed, Phase::P2);
    let outcome = run_sa(
        seed_cand,
        &sa.phase2,
        Phase::P2,
        offset,
        &mut rng,
        |cur, fb, k| runner.step(runner.mutate(Phase::P2, cur, fb, k)),
        |cand, _k| runner.step(runner.eval_p2(cand, &reference, &seed_ppa)),
        &mut crate::anneal::NullSink,
    );
    let outcome = match outcome {
        Ok(o) => o,
        Err(e) => {
            progress.trace_p2 = e.trace.clone();
            return Err(take_failure(e));
        }
    };
    progress.trace_p2 = outcome.trace.clone();
    let records = runner.p2.borrow();
    let feasible: Vec<(bool, f64)> = records
        .iter()
        .map(|r| (r.ppa.is_some(), r.ppa.as_ref().map_or(f64::INFINITY, PpaReport::j_ppa)))
        .collect();
    let idx = select_best_feasible(&feasible).expect("the seed is feasible");
    debug_assert_eq!(records[idx].candidate_id, outcome.best.candidate_id);
    let best = records
        .iter()
        .find(|r| r.candidate_id == outcome.best.candidate_id)
        .and_then(|r| r.ppa.clone())
        .expect("best Phase-2 candidate has PPA");
    let selected_iteration = outcome
        .trace
        .iter()
        .find(|e| e.decision == crate::anneal::Decision::Selected)
        .map_or(offset, |e| e.iteration);
    progress.phase2 = Some(Phase2Summary {
        seed_candidate_id: seed_ppa.0,
        reference,
        best_candidate_id: outcome.best.candidate_id,
        selected_iteration,
        best_ppa: best.clone(),
        evaluations: records.len() as u32,
        gated_evaluations: records.iter().filter(|r| r.gate).count() as u32,
    });
    progress.p2_best = Some((outcome.best, best.j_ppa()));
    Ok(RunStatus::Complete)
}

/// Human trace text: phase headers, one line per event, summary lines.
pub fn render_trace_text(trace: &[TraceEvent], p1_best: Option<f64>, p2_best: Option<f64>) -> String {
    let mut out = String::new();
    for phase in [Phase::P1, Phase::P2] {
        let events: Vec<_> = trace.iter().filter(|e| e.phase == phase).collect();
        if events.is_empty() {
            continue;
        }
        if !out.is_empty() {
            out.push('\n');
        }
        out.push_str(phase_header(phase));
        out.push('\n');
        for e in events {
            out.push_str(&emit_trace_line(e));
            out.push('\n');
        }
        let (best, artifact) = match phase {
            Phase::P1 => (p1_best, PHASE1_ARTIFACT),
            Phase::P2 => (p2_best, PHASE2_ARTIFACT),
        };
        out.push_str(&summary_line(phase, best, artifact));
        out.push('\n');
    }
    out
}

fn prepare_run_dir(dir: &Path, overwrite: bool) -> Result<(), HarnessError> {
    if dir.exists() {
        if !overwrite {
            return Err(HarnessError::Config(format!(
                "run directory {} already exists (set suite.overwrite to replace it)",
                dir.display()
            )));
        }
        fs::remove_dir_all(dir).map_err(|e| HarnessError::io(dir, e))?;
    }
    fs::create_dir_all(dir).map_err(|e| HarnessError::io(dir, e))
}

fn write_manifest(dir: &Path, run_id: &str, status: &str) -> Result<(), HarnessError> {
    write_file(
        &dir.join("manifest.json"),
        &serde_json::to_string_pretty(&json!({ "run_id": run_id, "status": status }))
            .expect("manifest serializes"),
    )
}

/// Executes one run of one benchmark in `run_dir`.
///
/// Environment and tool errors end the run and are recorded in the result.
/// An `Err` means the run's own outputs could not be written.
pub fn run_benchmark(
    ctx: &BenchmarkContext<'_>,
    run_index: u32,
    backend: Box<dyn GenerationBackend>,
    adapter: &dyn ToolAdapter,
    run_dir: &Path,
) -> Result<RunResult, HarnessError> {
    let cfg = ctx.config;
    let id = run_id(&ctx.spec.id, run_index);
    let seed = cfg.sa.rng_seed.wrapping_add(u64::from(run_index));
    prepare_run_dir(run_dir, cfg.suite.overwrite)?;
    let mut backend: Box<dyn GenerationBackend> = if cfg.suite.archive {
        write_manifest(run_dir, &id, "incomplete")?;
        write_file(&run_dir.join("config.toml"), &cfg.to_toml()?)?;
        write_file(
            &run_dir.join("spec.json"),
            &serde_json::to_string_pretty(ctx.spec).expect("spec serializes"),
        )?;
        write_file(
            &run_dir.join("seeds.json"),
            &serde_json::to_string_pretty(&json!({
                "base_seed": cfg.sa.rng_seed,
                "run_index": run_index,
                "seed": seed,
                "streams": { "phase1": Phase::P1.stream(), "phase2": Phase::P2.stream(), "bandit": BANDIT_STREAM },
            }))
            .expect("seeds serialize"),
        )?;
        Box::new(ArchivingBackend::new(backend, id.clone(), Some(run_dir.join("prompts")))?)
    } else {
        backend
    };

    let bandit = BanditState::standard(cfg.pipelines.generator_restart, cfg.pipelines.reward_threshold)?;
    let patterns = LogPatterns::compile(&cfg.adapter.tool.log_patterns)
        .map_err(|e| HarnessError::Config(format!("log pattern: {e}")))?;
    let runner = Runner {
        ctx,
        backend: RefCell::new(backend.as_mut()),
        adapter,
        run_dir,
        patterns,
        bandit: RefCell::new(bandit),
        bandit_rng: RefCell::new(stream_rng(seed, BANDIT_STREAM)),
        pending_arm: Cell::new(None),
        next_id: Cell::new(0),
        p1: RefCell::new(Vec::new()),
        p2: RefCell::new(Vec::new()),
        failure: RefCell::new(None),
    };
    let mut progress = Progress::default();
    let outcome = execute(&runner, seed, &mut progress);
    drop(runner);

    let (status, error) = match outcome {
        Ok(s) => (s, None),
        Err(e) => {
            log::error!("{id}: {e}");
            (RunStatus::Failed, Some(e.to_string()))
        }
    };
    let mut trace = progress.trace_p1;
    trace.extend(progress.trace_p2);

    if let Some((c, _)) = &progress.p1_best {
        write_file(&run_dir.join(PHASE1_ARTIFACT), &c.source)?;
    }
    if let Some((c, _)) = &progress.p2_best {
        write_file(&run_dir.join(PHASE2_ARTIFACT), &c.source)?;
    }
    let text = render_trace_text(
        &trace,
        progress.p1_best.as_ref().map(|b| b.1),
        progress.p2_best.as_ref().map(|b| b.1),
    );
    write_file(&run_dir.join("trace.txt"), &text)?;
    let jsonl: String = trace
        .iter()
        .map(|e| structured_trace_line(&id, e) + "\n")
        .collect();
    write_file(&run_dir.join("trace.jsonl"), &jsonl)?;

    let result = RunResult {
        run_id: id.clone(),
        benchmark_id: ctx.spec.id.clone(),
        run_index,
        seed,
        status,
        error,
        phase1: progress.phase1,
        phase2: progress.phase2,
        trace,
        invocations: adapter.invocations(),
    };
    write_file(
        &run_dir.join("result.json"),
        &serde_json::to_string_pretty(&result).expect("run result serializes"),
    )?;
    if cfg.suite.archive {
        let status = if result.status == RunStatus::Failed { "failed" } else { "complete" };
        write_manifest(run_dir, &id, status)?;
    }
    Ok(result)
}

/// Backend and adapter for one run.
pub type RunTools = (Box<dyn GenerationBackend>, Box<dyn ToolAdapter>);

/// Builds the tools for one run.
pub type RunFactory<'f> = dyn Fn(&ProblemSpec, u32) -> Result<RunTools, HarnessError> + Sync + 'f;

/// Fixture directory for a run: `<replay_dir>/<bench>/run<i>` if present,
/// else `<replay_dir>/<bench>`.
pub fn replay_dir_for(cfg: &RunConfig, benchmark_id: &str, run_index: u32) -> PathBuf {
    let base = cfg.backend.replay_dir.join(benchmark_id);
    let per_run = base.join(format!("run{run_index}"));
    if per_run.is_dir() {
        per_run
    } else {
        base
    }
}

/// The factory implied by the `[backend]` and `[adapter]` sections.
pub fn configured_factory(cfg: &RunConfig) -> impl Fn(&ProblemSpec, u32) -> Result<RunTools, HarnessError> + Sync + '_ {
    move |spec, run_index| {
        let backend: Box<dyn GenerationBackend> = match cfg.backend.kind {
            BackendKind::Mock => Box::new(MockBackend::new(spec.clone())),
            BackendKind::Replay => Box::new(ReplayBackend::open(
                &replay_dir_for(cfg, &spec.id, run_index),
                cfg.backend.replay_order,
                cfg.backend.replay_cycle,
            )?),
            BackendKind::Wire => {
                let wire = cfg
                    .backend
                    .wire
                    .clone()
                    .ok_or_else(|| HarnessError::Config("missing [backend.wire]".into()))?;
                Box::new(WireBackend::new(wire)?)
            }
        };
        let adapter: Box<dyn ToolAdapter> = match cfg.adapter.kind {
            AdapterKind::Mock => Box::new(MockAdapter::directives()),
            AdapterKind::Command => Box::new(CommandAdapter::new(cfg.adapter.tool.clone())?),
        };
        Ok((backend, adapter))
    }
}

fn aggregate(
    spec: &ProblemSpec,
    runs: Vec<RunResult>,
    cfg: &RunConfig,
    baselines: Option<&Baselines>,
) -> Result<BenchmarkReport, HarnessError> {
    let finished: Vec<&Phase1Summary> = runs.iter().filter_map(|r| r.phase1.as_ref()).collect();
    let correctness = if finished.is_empty() {
        None
    } else {
        let n = finished.len() as u32;
        let syntax = finished.iter().filter(|p| p.final_design.is_some()).count() as u32;
        let structural = finished
            .iter()
            .filter(|p| p.final_design.as_ref().is_some_and(|f| f.struct_pass))
            .count() as u32;
        let base = baselines.and_then(|b| b.struct_pct(&spec.id));
        let metrics = correctness_metrics(n, syntax, structural, base)?;
        let mut totals = ComponentCounts::default();
        for p in &finished {
            totals.candidates += p.components.candidates;
            totals.reset_ok += p.components.reset_ok;
            totals.pipeline_ok += p.components.pipeline_ok;
            totals.hazard_ok += p.components.hazard_ok;
        }
        let frac = |k: u32| f64::from(k) / f64::from(totals.candidates.max(1));
        let rates = ComponentRates {
            s_reset: frac(totals.reset_ok),
            s_pipeline: frac(totals.pipeline_ok),
            s_hazard: frac(totals.hazard_ok),
        };
        Some(with_depth(metrics, rates, &cfg.weights.depth)?)
    };
    let mut ppa: Option<PpaRow> = None;
    for r in &runs {
        let Some(p2) = &r.phase2 else { continue };
        let p = &p2.best_ppa;
        if ppa.as_ref().is_none_or(|row| p.j_ppa() < row.j_ppa) {
            ppa = Some(PpaRow {
                run_index: r.run_index,
                candidate_id: p2.best_candidate_id,
                area_um2: p.area_um2(),
                power_uw: p.power_total_uw(),
                wns_ns: p.wns_ns(),
                j_ppa: p.j_ppa(),
            });
        }
    }
    Ok(BenchmarkReport {
        id: spec.id.clone(),
        runs,
        correctness,
        ppa,
    })
}

/// Runs every `(benchmark, run)` pair with up to `suite.parallelism`
/// workers, then aggregates. Output order is deterministic.
pub fn run_specs(
    cfg: &RunConfig,
    specs: &[ProblemSpec],
    templates: &TemplateLibrary,
    baselines: Option<&Baselines>,
    factory: &RunFactory<'_>,
) -> Result<SuiteReport, HarnessError> {
    let runs = cfg.suite.runs_per_benchmark;
    let jobs: Vec<(usize, u32)> = (0..specs.len())
        .flat_map(|s| (0..runs).map(move |r| (s, r)))
        .collect();
    let results: Mutex<Vec<Option<Result<RunResult, HarnessError>>>> =
        Mutex::new((0..jobs.len()).map(|_| None).collect());
    let next = AtomicUsize::new(0);
    let workers = cfg.suite.parallelism.min(jobs.len()).max(1);

    let work = || loop {
        let i = next.fetch_add(1, Ordering::SeqCst);
        let Some(&(s, r)) = jobs.get(i) else { break };
        let spec = &specs[s];
        let ctx = BenchmarkContext {
            spec,
            config: cfg,
            templates,
            testbench: testbench_path(&cfg.suite.path, spec),
        };
        let dir = cfg.suite.output_dir.join(run_id(&spec.id, r));
        let res = factory(spec, r).and_then(|(backend, adapter)| {
            run_benchmark(&ctx, r, backend, adapter.as_ref(), &dir)
        });
        let res = match res {
            // A backend or adapter that cannot even be built fails the run,
            // not the suite.
            Err(e) if !matches!(e, HarnessError::Io { .. }) && !dir.join("result.json").exists() => {
                log::error!("{}: {e}", run_id(&spec.id, r));
                Ok(RunResult {
                    run_id: run_id(&spec.id, r),
                    benchmark_id: spec.id.clone(),
                    run_index: r,
                    seed: cfg.sa.rng_seed.wrapping_add(u64::from(r)),
                    status: RunStatus::Failed,
                    error: Some(e.to_string()),
                    phase1: None,
                    phase2: None,
                    trace: Vec::new(),
                    invocations: InvocationCounts::default(),
                })
            }
            other => other,
        };
        results.lock().expect("results lock")[i] = Some(res);
    };
    if workers == 1 {
        work();
    } else {
        std::thread::scope(|scope| {
            for _ in 0..workers {
                scope.spawn(work);
            }
        });
    }

    let mut by_spec: BTreeMap<usize, Vec<RunResult>> = BTreeMap::new();
    for (slot, &(s, _)) in results.into_inner().expect("results lock").into_iter().zip(&jobs) {
        let r = slot.expect("every job ran")?;
        by_spec.entry(s).or_default().push(r);
    }
    let benchmarks = specs
        .iter()
        .enumerate()
        .map(|(i, spec)| aggregate(spec, by_spec.remove(&i).unwrap_or_default(), cfg, baselines))
        .collect::<Result<Vec<_>, _>>()?;
    Ok(SuiteReport {
        base_seed: cfg.sa.rng_seed,
        runs_per_benchmark: runs,
        benchmarks,
    })
}

/// Selects benchmarks by the config filter. Unknown ids are warned about.
pub fn select_specs(cfg: &RunConfig, specs: Vec<ProblemSpec>) -> Vec<ProblemSpec> {
    let filter = &cfg.suite.benchmarks;
    if filter.is_empty() {
        return specs;
    }
    for id in filter {
        if !specs.iter().any(|s| &s.id == id) {
            log::warn!("benchmark filter `{id}` matches nothing in the suite");
        }
    }
    specs.into_iter().filter(|s| filter.contains(&s.id)).collect()
}

pub fn load_templates(cfg: &RunConfig) -> Result<TemplateLibrary, HarnessError> {
    Ok(match &cfg.suite.templates {
        Some(root) => TemplateLibrary::load(root)?,
        None => TemplateLibrary::builtin(),
    })
}

/// Loads the suite, templates, and baselines named by `cfg`, runs the
/// selected benchmarks, and writes `suite_report.json` plus both tables to
/// the output directory.
pub fn run_suite(cfg: &RunConfig) -> Result<SuiteReport, HarnessError> {
    let specs = select_specs(cfg, load_suite(&cfg.suite.path)?);
    let templates = load_templates(cfg)?;
    let baselines = cfg.suite.baselines.as_deref().map(Baselines::load).transpose()?;
    let factory = configured_factory(cfg);
    let report = run_specs(cfg, &specs, &templates, baselines.as_ref(), &factory)?;
    super::report::write_suite_outputs(&cfg.suite.output_dir, &report, baselines.as_ref())?;
    Ok(report)
}

/// One-shot Phase-1 style evaluation of a source file, plus synthesis when
/// the candidate is gated.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScoreReport {
    pub benchmark_id: String,
    pub report: EvalReport,
    pub lint: StructuralCheckResult,
    pub ppa: Option<ParsedPpa>,
}

pub fn score_candidate(
    cfg: &RunConfig,
    spec: &ProblemSpec,
    source: &str,
    adapter: &dyn ToolAdapter,
    workdir: &Path,
) -> Result<ScoreReport, HarnessError> {
    let patterns = LogPatterns::compile(&cfg.adapter.tool.log_patterns)
        .map_err(|e| HarnessError::Config(format!("log pattern: {e}")))?;
    let candidate = Candidate::new(0, spec.id.clone(), source, Role::Generator, None, Phase::P1, 0)?;
    let wd = CandidateWorkdir::create(workdir, 0)?;
    let tb = testbench_path(&cfg.suite.path, spec);
    let compiled = compile_check(adapter, &candidate, &wd, tb.as_deref(), &patterns)?;
    let sim = if compiled.compile_ok {
        Some(simulate(adapter, &compiled, &wd, tb.as_deref(), &patterns)?)
    } else {
        None
    };
    let sim_ok = sim.as_ref().is_some_and(|s| s.sim_ok);
    let feedback = build_feedback_packet(
        &compiled.raw_log,
        sim.as_ref().map_or("", |s| s.raw_log.as_str()),
        &patterns,
        cfg.adapter.tool.feedback_context_lines,
    );
    let reward = correctness_reward(compiled.compile_ok, sim_ok, compiled.warn_count, None, &cfg.weights.reward)?;
    let report = EvalReport::new(compiled.compile_ok, sim_ok, compiled.warn_count, None, reward, feedback)?;
    let lint = structural_check(source, &cfg.adapter.tool.lint_rules);
    let ppa = if report.gate() {
        match synthesize(adapter, &wd, true) {
            Ok(t) => Some(
                parse_ppa(&t.timing, &t.area, &t.power, &cfg.adapter.tool.ppa_patterns)
                    .map_err(EvalError::from)?,
            ),
            Err(EvalError::Synthesis { .. }) => None,
            Err(e) => return Err(e.into()),
        }
    } else {
        None
    };
    Ok(ScoreReport {
        benchmark_id: spec.id.clone(),
        report,
        lint,
        ppa,
    })
}

/// Pass/fail per lint rule, for display.
pub fn lint_summary(lint: &StructuralCheckResult) -> Vec<(Rule, Verdict)> {
    lint.outcomes.iter().map(|(r, o)| (*r, o.verdict)).collect()
}
