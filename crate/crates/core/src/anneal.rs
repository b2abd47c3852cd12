// SPDX-License-Identifier: Apache-2.0

//! The unified simulated-annealing controller shared by both phases.
//!
//! Scores inside the controller are always higher-is-better. Phase 2 costs
//! are negated on the way in by [`internalize_score`], so a single Metropolis
//! rule serves both phases. An evaluation may return `f64::NEG_INFINITY` to
//! mark an infeasible candidate; such a candidate is rejected without
//! consuming a random draw.

use std::error::Error as StdError;
use std::fmt;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{Candidate, FeedbackPacket, Phase, PhaseSchedule};

/// Seedable, portable generator used for every stochastic decision.
pub type SaRng = ChaCha8Rng;

/// Child stream for the pipeline bandit; phases use [`Phase::stream`].
pub const BANDIT_STREAM: u64 = 3;

/// Derives the generator for one stream of a run: the ChaCha key comes from
/// the run seed and the stream id selects an independent keystream.
pub fn stream_rng(seed: u64, stream: u64) -> SaRng {
    let mut rng = SaRng::seed_from_u64(seed);
    rng.set_stream(stream);
    rng
}

pub fn phase_rng(seed: u64, phase: Phase) -> SaRng {
    stream_rng(seed, phase.stream())
}

#[derive(Debug, Clone, PartialEq, Error)]
pub enum AnnealError {
    #[error("delta must be finite, got {0}")]
    NonFiniteDelta(f64),
    #[error("temperature must be positive and finite, got {0}")]
    BadTemperature(f64),
    #[error("cooling factor must be in (0,1), got {0}")]
    BadAlpha(f64),
}

/// Metropolis acceptance: always accept `delta >= 0`, otherwise accept with
/// probability `exp(delta / temperature)` using one uniform draw.
pub fn accept<R: Rng + ?Sized>(delta: f64, temperature: f64, rng: &mut R) -> Result<bool, AnnealError> {
    if !delta.is_finite() {
        return Err(AnnealError::NonFiniteDelta(delta));
    }
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(AnnealError::BadTemperature(temperature));
    }
    if delta >= 0.0 {
        return Ok(true);
    }
    let p = (delta / temperature).exp();
    Ok(rng.random::<f64>() < p)
}

/// Geometric cooling step.
pub fn cool(temperature: f64, cooling_alpha: f64) -> Result<f64, AnnealError> {
    if !(temperature.is_finite() && temperature > 0.0) {
        return Err(AnnealError::BadTemperature(temperature));
    }
    if !(cooling_alpha > 0.0 && cooling_alpha < 1.0) {
        return Err(AnnealError::BadAlpha(cooling_alpha));
    }
    Ok(cooling_alpha * temperature)
}

/// Maps a raw phase score onto the controller's maximize scale: identity for
/// the Phase-1 reward, negation for the Phase-2 cost. Self-inverse.
pub fn internalize_score(mode: Phase, raw: f64) -> f64 {
    match mode {
        Phase::P1 => raw,
        Phase::P2 => -raw,
    }
}

/// Whether the Phase-1 result may enter PPA refinement.
pub fn phase_switch(best_score: f64, gate: bool, phase1_target: f64) -> bool {
    gate && best_score >= phase1_target
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Decision {
    #[serde(rename = "ACCEPT")]
    Accept,
    #[serde(rename = "REJECT")]
    Reject,
    #[serde(rename = "SELECTED")]
    Selected,
}

impl Decision {
    pub fn keyword(self) -> &'static str {
        match self {
            Decision::Accept => "ACCEPT",
            Decision::Reject => "REJECT",
            Decision::Selected => "SELECTED",
        }
    }
}

impl fmt::Display for Decision {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.keyword())
    }
}

/// Synthesis figures shown on a Phase-2 trace line.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpaPoint {
    pub area_um2: f64,
    pub power_uw: f64,
    pub wns_ns: f64,
}

/// Phase-specific metrics carried by a trace event.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum EventDetail {
    P1 { compile: bool, sim: bool },
    /// `ppa` is absent when the candidate never reached (or failed) synthesis.
    P2 {
        compile: bool,
        sim: bool,
        ppa: Option<PpaPoint>,
    },
}

/// One evaluated candidate.
///
/// `temperature` is the controller temperature after the iteration's cooling
/// step, so iteration `k` of a phase shows `T0 * alpha^k`. `score` is on the
/// raw phase scale (reward in P1, cost in P2) and is `None` for infeasible
/// candidates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceEvent {
    pub phase: Phase,
    pub iteration: u32,
    pub candidate_id: u64,
    pub temperature: f64,
    pub score: Option<f64>,
    pub detail: EventDetail,
    pub decision: Decision,
}

/// Append-only receiver of finalized trace events.
pub trait TraceSink {
    fn record(&mut self, event: &TraceEvent);
}

impl TraceSink for Vec<TraceEvent> {
    fn record(&mut self, event: &TraceEvent) {
        self.push(event.clone());
    }
}

/// Discards every event.
pub struct NullSink;

impl TraceSink for NullSink {
    fn record(&mut self, _event: &TraceEvent) {}
}

/// What an evaluation hands back to the controller.
#[derive(Debug, Clone, PartialEq)]
pub struct Evaluation {
    /// Internal (maximize) score, or `NEG_INFINITY` for infeasible.
    pub score: f64,
    pub feedback: FeedbackPacket,
    pub detail: EventDetail,
}

pub type StepError = Box<dyn StdError + Send + Sync>;

/// A run aborted by a failing mutate or evaluate step. The trace holds every
/// event finalized before the failure.
#[derive(Debug)]
pub struct SaError {
    pub phase: Phase,
    pub iteration: u32,
    pub source: StepError,
    pub trace: Vec<TraceEvent>,
}

impl fmt::Display for SaError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "[{}] iteration {}: {}", self.phase, self.iteration, self.source)
    }
}

impl StdError for SaError {
    fn source(&self) -> Option<&(dyn StdError + 'static)> {
        Some(self.source.as_ref())
    }
}

/// Controller state for one phase.
#[derive(Debug, Clone)]
pub struct SaRun {
    pub current: Candidate,
    pub current_score: f64,
    pub best: Candidate,
    pub best_score: f64,
    pub temperature: f64,
    pub iteration: u32,
    pub mode: Phase,
    pub decisions: Vec<TraceEvent>,
}

#[derive(Debug, Clone)]
pub struct SaOutcome {
    pub best: Candidate,
    /// Internal scale; see [`internalize_score`].
    pub best_score: f64,
    pub trace: Vec<TraceEvent>,
    /// Number of loop iterations that evaluated a neighbor.
    pub iterations_run: u32,
}

impl SaOutcome {
    /// Best score on the raw phase scale, `None` if nothing was feasible.
    pub fn best_raw(&self, mode: Phase) -> Option<f64> {
        self.best_score
            .is_finite()
            .then(|| internalize_score(mode, self.best_score))
    }
}

fn raw_score(mode: Phase, internal: f64) -> Option<f64> {
    internal.is_finite().then(|| internalize_score(mode, internal))
}

fn check_score(score: f64) -> Result<(), StepError> {
    if score.is_nan() || score == f64::INFINITY {
        return Err(format!("evaluation returned invalid score {score}").into());
    }
    Ok(())
}

/// Runs one phase of the annealing loop.
///
/// Evaluates `initial`, then for `k = 1..=max_iters` stops once the
/// temperature falls below `t_min`; otherwise mutates the current design with
/// the latest accepted feedback, evaluates the neighbor, applies [`accept`],
/// records a new best on strict improvement, and cools. Iterations are
/// numbered from `iteration_offset`. At the end the best candidate's event is
/// marked `SELECTED` and every event is handed to `sink` in iteration order.
#[allow(clippy::too_many_arguments)]
pub fn run_sa<M, E>(
    initial: Candidate,
    schedule: &PhaseSchedule,
    mode: Phase,
    iteration_offset: u32,
    rng: &mut SaRng,
    mut mutate: M,
    mut evaluate: E,
    sink: &mut dyn TraceSink,
) -> Result<SaOutcome, SaError>
where
    M: FnMut(&Candidate, &FeedbackPacket, u32) -> Result<Candidate, StepError>,
    E: FnMut(&Candidate, u32) -> Result<Evaluation, StepError>,
{
    let fail = |iteration: u32, source: StepError, trace: Vec<TraceEvent>| SaError {
        phase: mode,
        iteration,
        source,
        trace,
    };
    if let Err(e) = schedule.validate() {
        return Err(fail(iteration_offset, Box::new(e), Vec::new()));
    }

    let first = evaluate(&initial, iteration_offset)
        .and_then(|ev| check_score(ev.score).map(|_| ev))
        .map_err(|e| fail(iteration_offset, e, Vec::new()))?;
    let mut run = SaRun {
        current: initial.clone(),
        current_score: first.score,
        best: initial.clone(),
        best_score: first.score,
        temperature: schedule.t0,
        iteration: iteration_offset,
        mode,
        decisions: vec![TraceEvent {
            phase: mode,
            iteration: iteration_offset,
            candidate_id: initial.candidate_id,
            temperature: schedule.t0,
            score: raw_score(mode, first.score),
            detail: first.detail,
            decision: Decision::Accept,
        }],
    };
    let mut logs = first.feedback;
    let mut iterations_run = 0;

    for k in 1..=schedule.max_iters {
        if run.temperature < schedule.t_min {
            break;
        }
        let iteration = iteration_offset + k;
        run.iteration = iteration;

        let neighbor = match mutate(&run.current, &logs, iteration) {
            Ok(c) => c,
            Err(e) => return Err(fail(iteration, e, run.decisions)),
        };
        let eval = match evaluate(&neighbor, iteration).and_then(|ev| check_score(ev.score).map(|_| ev)) {
            Ok(ev) => ev,
            Err(e) => return Err(fail(iteration, e, run.decisions)),
        };

        let accepted = if eval.score == f64::NEG_INFINITY {
            false
        } else {
            let delta = eval.score - run.current_score;
            if delta >= 0.0 {
                true
            } else {
                accept(delta, run.temperature, rng)
                    .map_err(|e| fail(iteration, Box::new(e), run.decisions.clone()))?
            }
        };

        let event_score = raw_score(mode, eval.score);
        let detail = eval.detail;
        let candidate_id = neighbor.candidate_id;
        if accepted {
            run.current = neighbor;
            run.current_score = eval.score;
            logs = eval.feedback;
        }
        if run.current_score > run.best_score {
            run.best = run.current.clone();
            run.best_score = run.current_score;
        }
        run.temperature = cool(run.temperature, schedule.cooling_alpha)
            .map_err(|e| fail(iteration, Box::new(e), run.decisions.clone()))?;
        iterations_run += 1;

        run.decisions.push(TraceEvent {
            phase: mode,
            iteration,
            candidate_id,
            temperature: run.temperature,
            score: event_score,
            detail,
            decision: if accepted { Decision::Accept } else { Decision::Reject },
        });
    }

    // The best design is always a visited current state, so its event exists.
    if let Some(ev) = run
        .decisions
        .iter_mut()
        .find(|ev| ev.candidate_id == run.best.candidate_id && ev.decision == Decision::Accept)
    {
        ev.decision = Decision::Selected;
    }
    for ev in &run.decisions {
        sink.record(ev);
    }
    Ok(SaOutcome {
        best: run.best,
        best_score: run.best_score,
        trace: run.decisions,
        iterations_run,
    })
}
