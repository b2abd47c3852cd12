// SPDX-License-Identifier: Apache-2.0

//! Two-phase simulated annealing over LLM-generated RTL.
//!
//! Phase 1 searches for a functionally correct design under compile and
//! simulation gating. Phase 2 refines area, power, and timing of that design
//! while keeping every accepted candidate gated. Text generation and tool
//! execution sit behind traits ([`pipelines::GenerationBackend`],
//! [`evaluate::ToolAdapter`]) with deterministic replay and mock
//! implementations, so the whole control loop runs offline.
//!
//! Module map:
//!
//! * [`model`]: shared value types.
//! * [`anneal`]: the annealing controller.
//! * [`objectives`]: rewards, PPA cost, correctness metrics.
//! * [`pipelines`]: prompts, critique parsing, bandit, backends.
//! * [`evaluate`]: tool adapters, structural lint, report parsing.
//! * [`harness`]: configuration, suite runs, traces, reports, archives.
//!
//! See the `examples/` directory of this crate for one runnable program
//! per capability.

pub mod anneal;
pub mod evaluate;
pub mod harness;
pub mod model;
pub mod objectives;
pub mod pipelines;

pub use anneal::{run_sa, Decision, SaOutcome, TraceEvent};
pub use model::{
    Candidate, CritiqueScores, EvalReport, FeedbackPacket, Phase, PpaReport, ProblemSpec, Role,
    SaConfig,
};
