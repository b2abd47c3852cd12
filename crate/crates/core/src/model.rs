// SPDX-License-Identifier: Apache-2.0

//! Domain types shared by every stage of the search.
//!
//! All types are immutable value objects with a canonical JSON form whose
//! field names match the struct fields. Types with cross-field invariants
//! (gating, power totalization, critique levels) validate on construction
//! and again on deserialization, so an invalid value cannot be built either
//! way.

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Violation of a domain invariant at construction time.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum ModelError {
    #[error("problem spec `{id}`: {reason}")]
    InvalidSpec { id: String, reason: String },
    #[error("critique score {0} is not one of 0.0, 0.5, 1.0")]
    CritiqueLevel(f64),
    #[error("eval report: {0}")]
    EvalReport(&'static str),
    #[error("ppa report: {0}")]
    PpaReport(String),
    #[error("sa config: {0}")]
    SaConfig(String),
    #[error("candidate: {0}")]
    Candidate(&'static str),
}

/// Search phase: correctness (P1) or PPA refinement (P2).
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Phase {
    P1,
    P2,
}

impl Phase {
    pub fn tag(self) -> &'static str {
        match self {
            Phase::P1 => "P1",
            Phase::P2 => "P2",
        }
    }

    /// Index of the RNG child stream owned by this phase.
    pub fn stream(self) -> u64 {
        match self {
            Phase::P1 => 1,
            Phase::P2 => 2,
        }
    }
}

impl fmt::Display for Phase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.tag())
    }
}

/// The LLM roles. `Critique` scores candidates; the other three produce them.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Role {
    Generator,
    ConservativeMutator,
    AggressiveMutator,
    Critique,
}

impl Role {
    pub const ALL: [Role; 4] = [
        Role::Generator,
        Role::ConservativeMutator,
        Role::AggressiveMutator,
        Role::Critique,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            Role::Generator => "generator",
            Role::ConservativeMutator => "conservative_mutator",
            Role::AggressiveMutator => "aggressive_mutator",
            Role::Critique => "critique",
        }
    }

    pub fn parse(s: &str) -> Option<Role> {
        Role::ALL.into_iter().find(|r| r.as_str() == s)
    }

    /// Roles whose output is RTL source.
    pub fn produces_rtl(self) -> bool {
        !matches!(self, Role::Critique)
    }
}

impl fmt::Display for Role {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum PortDirection {
    In,
    Out,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Port {
    pub name: String,
    pub direction: PortDirection,
    pub width_bits: u32,
}

/// A benchmark problem statement.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ProblemSpec {
    pub id: String,
    pub title: String,
    pub description: String,
    pub module_name: String,
    pub ports: Vec<Port>,
    #[serde(default)]
    pub constraints: Vec<String>,
    #[serde(default)]
    pub testbench_ref: String,
}

impl ProblemSpec {
    /// Checks the per-record invariants. Suite-level id uniqueness is
    /// checked by the suite loader.
    pub fn validate(&self) -> Result<(), ModelError> {
        let fail = |reason: &str| {
            Err(ModelError::InvalidSpec {
                id: self.id.clone(),
                reason: reason.to_string(),
            })
        };
        if self.id.trim().is_empty() {
            return fail("id is empty");
        }
        if self.description.trim().is_empty() {
            return fail("description is empty");
        }
        if self.module_name.trim().is_empty() {
            return fail("module_name is empty");
        }
        if self.ports.is_empty() {
            return fail("ports is empty");
        }
        if let Some(p) = self.ports.iter().find(|p| p.width_bits == 0) {
            return fail(&format!("port `{}` has width 0", p.name));
        }
        Ok(())
    }

    /// One-line port list, e.g. `input clk, input [3:0] a, output y`.
    pub fn port_list(&self) -> String {
        self.ports
            .iter()
            .map(|p| {
                let dir = match p.direction {
                    PortDirection::In => "input",
                    PortDirection::Out => "output",
                };
                if p.width_bits > 1 {
                    format!("{dir} [{}:0] {}", p.width_bits - 1, p.name)
                } else {
                    format!("{dir} {}", p.name)
                }
            })
            .collect::<Vec<_>>()
            .join(", ")
    }
}

/// An RTL design state with its provenance.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "CandidateRepr")]
pub struct Candidate {
    pub candidate_id: u64,
    pub benchmark_id: String,
    pub source: String,
    pub origin_role: Role,
    pub parent_id: Option<u64>,
    pub phase: Phase,
    pub iteration: u32,
}

#[derive(Deserialize)]
struct CandidateRepr {
    candidate_id: u64,
    benchmark_id: String,
    source: String,
    origin_role: Role,
    parent_id: Option<u64>,
    phase: Phase,
    iteration: u32,
}

impl TryFrom<CandidateRepr> for Candidate {
    type Error = ModelError;

    fn try_from(r: CandidateRepr) -> Result<Self, Self::Error> {
        Candidate::new(
            r.candidate_id,
            r.benchmark_id,
            r.source,
            r.origin_role,
            r.parent_id,
            r.phase,
            r.iteration,
        )
    }
}

impl Candidate {
    pub fn new(
        candidate_id: u64,
        benchmark_id: impl Into<String>,
        source: impl Into<String>,
        origin_role: Role,
        parent_id: Option<u64>,
        phase: Phase,
        iteration: u32,
    ) -> Result<Self, ModelError> {
        match (origin_role, parent_id) {
            (Role::Critique, _) => return Err(ModelError::Candidate("critique does not produce candidates")),
            (Role::Generator, Some(_)) => {
                return Err(ModelError::Candidate("generator candidates have no parent"))
            }
            (_, None) if origin_role != Role::Generator => {
                return Err(ModelError::Candidate("mutated candidates need a parent"))
            }
            _ => {}
        }
        Ok(Candidate {
            candidate_id,
            benchmark_id: benchmark_id.into(),
            source: source.into(),
            origin_role,
            parent_id,
            phase,
            iteration,
        })
    }
}

/// A single critique level, restricted to {0.0, 0.5, 1.0}.
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Serialize, Deserialize)]
#[serde(try_from = "f64", into = "f64")]
pub struct CritiqueLevel(f64);

impl CritiqueLevel {
    pub const ZERO: CritiqueLevel = CritiqueLevel(0.0);
    pub const HALF: CritiqueLevel = CritiqueLevel(0.5);
    pub const ONE: CritiqueLevel = CritiqueLevel(1.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

impl TryFrom<f64> for CritiqueLevel {
    type Error = ModelError;

    fn try_from(v: f64) -> Result<Self, Self::Error> {
        // Exact comparison: anything else is a contract violation.
        if v == 0.0 || v == 0.5 || v == 1.0 {
            Ok(CritiqueLevel(v))
        } else {
            Err(ModelError::CritiqueLevel(v))
        }
    }
}

impl From<CritiqueLevel> for f64 {
    fn from(l: CritiqueLevel) -> f64 {
        l.0
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CritiqueScores {
    pub syntax: CritiqueLevel,
    pub reset: CritiqueLevel,
    pub logic: CritiqueLevel,
    pub hazard: CritiqueLevel,
}

impl CritiqueScores {
    pub fn new(syntax: f64, reset: f64, logic: f64, hazard: f64) -> Result<Self, ModelError> {
        Ok(CritiqueScores {
            syntax: syntax.try_into()?,
            reset: reset.try_into()?,
            logic: logic.try_into()?,
            hazard: hazard.try_into()?,
        })
    }

    pub fn mean(&self) -> f64 {
        (self.syntax.0 + self.reset.0 + self.logic.0 + self.hazard.0) / 4.0
    }
}

/// Tool feedback threaded into the next mutation prompt.
#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct FeedbackPacket {
    pub compile_errors: Vec<String>,
    pub sim_failures: Vec<String>,
    pub warnings: Vec<String>,
    pub timestamps_or_ids: Vec<String>,
    pub log_slice: String,
}

impl FeedbackPacket {
    pub fn has_errors(&self) -> bool {
        !self.compile_errors.is_empty() || !self.sim_failures.is_empty()
    }

    pub fn is_empty(&self) -> bool {
        !self.has_errors()
            && self.warnings.is_empty()
            && self.timestamps_or_ids.is_empty()
            && self.log_slice.is_empty()
    }
}

/// Phase-1 evaluation outcome.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "EvalReportRepr")]
pub struct EvalReport {
    compile_ok: bool,
    sim_ok: bool,
    warn_count: u32,
    critique: Option<CritiqueScores>,
    gate: bool,
    correctness_reward: f64,
    feedback: FeedbackPacket,
}

#[derive(Deserialize)]
struct EvalReportRepr {
    compile_ok: bool,
    sim_ok: bool,
    warn_count: u32,
    critique: Option<CritiqueScores>,
    gate: bool,
    correctness_reward: f64,
    feedback: FeedbackPacket,
}

impl TryFrom<EvalReportRepr> for EvalReport {
    type Error = ModelError;

    fn try_from(r: EvalReportRepr) -> Result<Self, Self::Error> {
        let report = EvalReport::new(
            r.compile_ok,
            r.sim_ok,
            r.warn_count,
            r.critique,
            r.correctness_reward,
            r.feedback,
        )?;
        if report.gate != r.gate {
            return Err(ModelError::EvalReport("gate must equal compile_ok && sim_ok"));
        }
        Ok(report)
    }
}

impl EvalReport {
    /// Builds a report; the gate is derived, never supplied.
    pub fn new(
        compile_ok: bool,
        sim_ok: bool,
        warn_count: u32,
        critique: Option<CritiqueScores>,
        correctness_reward: f64,
        feedback: FeedbackPacket,
    ) -> Result<Self, ModelError> {
        if sim_ok && !compile_ok {
            return Err(ModelError::EvalReport("sim_ok requires compile_ok"));
        }
        if !(0.0..=1.0).contains(&correctness_reward) {
            return Err(ModelError::EvalReport("correctness_reward outside [0,1]"));
        }
        if correctness_reward == 1.0 && !(compile_ok && sim_ok) {
            return Err(ModelError::EvalReport(
                "a perfect reward requires compile and sim success",
            ));
        }
        if feedback.log_slice.is_empty() == feedback.has_errors() {
            return Err(ModelError::EvalReport(
                "log_slice must be present exactly when errors are",
            ));
        }
        Ok(EvalReport {
            compile_ok,
            sim_ok,
            warn_count,
            critique,
            gate: crate::evaluate::gate(compile_ok, sim_ok),
            correctness_reward,
            feedback,
        })
    }

    pub fn compile_ok(&self) -> bool {
        self.compile_ok
    }
    pub fn sim_ok(&self) -> bool {
        self.sim_ok
    }
    pub fn warn_count(&self) -> u32 {
        self.warn_count
    }
    pub fn critique(&self) -> Option<&CritiqueScores> {
        self.critique.as_ref()
    }
    pub fn gate(&self) -> bool {
        self.gate
    }
    pub fn correctness_reward(&self) -> f64 {
        self.correctness_reward
    }
    pub fn feedback(&self) -> &FeedbackPacket {
        &self.feedback
    }
}

/// Synthesis outcome with its normalized cost terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "PpaReportRepr")]
pub struct PpaReport {
    area_um2: f64,
    power_leak_uw: f64,
    power_internal_uw: f64,
    power_switch_uw: f64,
    power_total_uw: f64,
    wns_ns: f64,
    area_norm: f64,
    power_norm: f64,
    slack_penalty_norm: f64,
    j_ppa: f64,
}

#[derive(Deserialize)]
struct PpaReportRepr {
    area_um2: f64,
    power_leak_uw: f64,
    power_internal_uw: f64,
    power_switch_uw: f64,
    power_total_uw: f64,
    wns_ns: f64,
    area_norm: f64,
    power_norm: f64,
    slack_penalty_norm: f64,
    j_ppa: f64,
}

impl TryFrom<PpaReportRepr> for PpaReport {
    type Error = ModelError;

    fn try_from(r: PpaReportRepr) -> Result<Self, Self::Error> {
        let report = PpaReport::new(
            r.area_um2,
            [r.power_leak_uw, r.power_internal_uw, r.power_switch_uw],
            r.wns_ns,
            NormalizedPpa {
                area_norm: r.area_norm,
                power_norm: r.power_norm,
                slack_penalty_norm: r.slack_penalty_norm,
                j_ppa: r.j_ppa,
            },
        )?;
        if report.power_total_uw != r.power_total_uw {
            return Err(ModelError::PpaReport(
                "power_total_uw is not the sum of its components".into(),
            ));
        }
        Ok(report)
    }
}

/// The normalized terms returned by the PPA cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalizedPpa {
    pub area_norm: f64,
    pub power_norm: f64,
    pub slack_penalty_norm: f64,
    pub j_ppa: f64,
}

impl PpaReport {
    /// `power` is (leakage, internal, switching); the total is computed here.
    pub fn new(
        area_um2: f64,
        power: [f64; 3],
        wns_ns: f64,
        norm: NormalizedPpa,
    ) -> Result<Self, ModelError> {
        let nonneg = |name: &str, v: f64| {
            if v.is_finite() && v >= 0.0 {
                Ok(())
            } else {
                Err(ModelError::PpaReport(format!("{name} must be finite and >= 0, got {v}")))
            }
        };
        nonneg("area_um2", area_um2)?;
        nonneg("power_leak_uw", power[0])?;
        nonneg("power_internal_uw", power[1])?;
        nonneg("power_switch_uw", power[2])?;
        nonneg("area_norm", norm.area_norm)?;
        nonneg("power_norm", norm.power_norm)?;
        nonneg("slack_penalty_norm", norm.slack_penalty_norm)?;
        nonneg("j_ppa", norm.j_ppa)?;
        if !wns_ns.is_finite() {
            return Err(ModelError::PpaReport("wns_ns must be finite".into()));
        }
        if wns_ns >= 0.0 && norm.slack_penalty_norm != 0.0 {
            return Err(ModelError::PpaReport(
                "slack penalty must be zero when timing is met".into(),
            ));
        }
        Ok(PpaReport {
            area_um2,
            power_leak_uw: power[0],
            power_internal_uw: power[1],
            power_switch_uw: power[2],
            power_total_uw: crate::objectives::sum_power(power),
            wns_ns,
            area_norm: norm.area_norm,
            power_norm: norm.power_norm,
            slack_penalty_norm: norm.slack_penalty_norm,
            j_ppa: norm.j_ppa,
        })
    }

    pub fn area_um2(&self) -> f64 {
        self.area_um2
    }
    pub fn power_components_uw(&self) -> [f64; 3] {
        [self.power_leak_uw, self.power_internal_uw, self.power_switch_uw]
    }
    pub fn power_total_uw(&self) -> f64 {
        self.power_total_uw
    }
    pub fn wns_ns(&self) -> f64 {
        self.wns_ns
    }
    pub fn normalized(&self) -> NormalizedPpa {
        NormalizedPpa {
            area_norm: self.area_norm,
            power_norm: self.power_norm,
            slack_penalty_norm: self.slack_penalty_norm,
            j_ppa: self.j_ppa,
        }
    }
    pub fn j_ppa(&self) -> f64 {
        self.j_ppa
    }
}

/// Weights of the Phase-2 cost: area, power, slack.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PpaWeights {
    pub area: f64,
    pub power: f64,
    pub slack: f64,
}

impl Default for PpaWeights {
    fn default() -> Self {
        PpaWeights {
            area: 1.0 / 3.0,
            power: 1.0 / 3.0,
            slack: 1.0 / 3.0,
        }
    }
}

impl PpaWeights {
    pub fn validate(&self) -> Result<(), ModelError> {
        let w = [self.area, self.power, self.slack];
        if w.iter().any(|v| !v.is_finite() || *v < 0.0) {
            return Err(ModelError::SaConfig("ppa weights must be finite and >= 0".into()));
        }
        if (w.iter().sum::<f64>() - 1.0).abs() > 1e-9 {
            return Err(ModelError::SaConfig("ppa weights must sum to 1".into()));
        }
        Ok(())
    }
}

/// Weights of the Phase-1 correctness reward.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RewardWeights {
    pub compile: f64,
    pub sim: f64,
    pub warn: f64,
    pub critique: f64,
}

impl Default for RewardWeights {
    fn default() -> Self {
        RewardWeights {
            compile: 0.40,
            sim: 0.40,
            warn: 0.10,
            critique: 0.10,
        }
    }
}

/// Annealing schedule for one phase.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PhaseSchedule {
    pub t0: f64,
    pub cooling_alpha: f64,
    pub t_min: f64,
    pub max_iters: u32,
}

impl PhaseSchedule {
    pub fn phase1_default() -> Self {
        PhaseSchedule {
            t0: 1.20,
            cooling_alpha: 0.75,
            t_min: 0.01,
            max_iters: 6,
        }
    }

    pub fn phase2_default() -> Self {
        PhaseSchedule {
            t0: 0.26,
            cooling_alpha: 0.80,
            t_min: 0.01,
            max_iters: 4,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        if !(self.t0.is_finite() && self.t0 > 0.0) {
            return Err(ModelError::SaConfig(format!("t0 must be > 0, got {}", self.t0)));
        }
        if !(self.cooling_alpha > 0.0 && self.cooling_alpha < 1.0) {
            return Err(ModelError::SaConfig(format!(
                "cooling_alpha must be in (0,1), got {}",
                self.cooling_alpha
            )));
        }
        if !(self.t_min >= 0.0 && self.t_min < self.t0) {
            return Err(ModelError::SaConfig(format!(
                "t_min must satisfy 0 <= t_min < t0, got {}",
                self.t_min
            )));
        }
        if self.max_iters == 0 {
            return Err(ModelError::SaConfig("max_iters must be positive".into()));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SaConfig {
    pub phase1: PhaseSchedule,
    pub phase2: PhaseSchedule,
    pub rng_seed: u64,
    pub phase1_target: f64,
    pub ppa_weights: PpaWeights,
    pub reward_weights: RewardWeights,
}

impl Default for SaConfig {
    fn default() -> Self {
        SaConfig {
            phase1: PhaseSchedule::phase1_default(),
            phase2: PhaseSchedule::phase2_default(),
            rng_seed: 0,
            phase1_target: 0.95,
            ppa_weights: PpaWeights::default(),
            reward_weights: RewardWeights::default(),
        }
    }
}

impl SaConfig {
    pub fn schedule(&self, phase: Phase) -> &PhaseSchedule {
        match phase {
            Phase::P1 => &self.phase1,
            Phase::P2 => &self.phase2,
        }
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        self.phase1.validate()?;
        self.phase2.validate()?;
        self.ppa_weights.validate()?;
        if !(self.phase1_target > 0.0 && self.phase1_target <= 1.0) {
            return Err(ModelError::SaConfig("phase1_target must be in (0,1]".into()));
        }
        crate::objectives::validate_reward_weights(&self.reward_weights)
            .map_err(|e| ModelError::SaConfig(e.to_string()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum DepthBand {
    Low,
    LowMedium,
    Medium,
    High,
}

impl fmt::Display for DepthBand {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            DepthBand::Low => "Low",
            DepthBand::LowMedium => "Low-Medium",
            DepthBand::Medium => "Medium",
            DepthBand::High => "High",
        })
    }
}

/// Satisfaction rates feeding the depth score, each a fraction in [0,1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ComponentRates {
    pub s_reset: f64,
    pub s_pipeline: f64,
    pub s_hazard: f64,
}

/// Correctness percentages across a set of runs. Percentages are unrounded.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CorrectnessMetrics {
    pub n_total: u32,
    pub n_syntax_pass: u32,
    pub n_struct_pass: u32,
    pub s_syntax: f64,
    pub s_struct: f64,
    pub s_logic: f64,
    pub delta_struct: Option<f64>,
    pub g_rel: Option<f64>,
    pub depth_score: Option<f64>,
    pub depth_band: Option<DepthBand>,
    pub depth_weights: [f64; 5],
    pub component_rates: Option<ComponentRates>,
}

#[cfg(test)]
mod tests {
    use super::*;

    fn feedback_ok() -> FeedbackPacket {
        FeedbackPacket::default()
    }

    #[test]
    fn eval_report_derives_gate() {
        let r = EvalReport::new(true, true, 0, None, 0.9, feedback_ok()).unwrap();
        assert!(r.gate());
        let r = EvalReport::new(true, false, 0, None, 0.5, feedback_ok()).unwrap();
        assert!(!r.gate());
    }

    #[test]
    fn eval_report_rejects_sim_without_compile() {
        assert!(EvalReport::new(false, true, 0, None, 0.5, feedback_ok()).is_err());
    }

    #[test]
    fn eval_report_rejects_perfect_reward_without_gate() {
        assert!(EvalReport::new(true, false, 0, None, 1.0, feedback_ok()).is_err());
    }

    #[test]
    fn eval_report_deserialize_rejects_forged_gate() {
        let r = EvalReport::new(true, false, 0, None, 0.5, feedback_ok()).unwrap();
        let json = serde_json::to_string(&r).unwrap().replace("\"gate\":false", "\"gate\":true");
        assert!(serde_json::from_str::<EvalReport>(&json).is_err());
    }

    #[test]
    fn critique_level_is_exact() {
        assert!(CritiqueLevel::try_from(0.5).is_ok());
        assert!(CritiqueLevel::try_from(0.7).is_err());
        assert!(CritiqueLevel::try_from(0.5000001).is_err());
        assert!(serde_json::from_str::<CritiqueLevel>("0.25").is_err());
    }

    #[test]
    fn ppa_report_totals_power() {
        let r = PpaReport::new(
            59.9,
            [10.0, 40.9, 30.0],
            0.2,
            NormalizedPpa {
                area_norm: 1.0,
                power_norm: 1.0,
                slack_penalty_norm: 0.0,
                j_ppa: 0.5,
            },
        )
        .unwrap();
        assert_eq!(r.power_total_uw(), 10.0 + 40.9 + 30.0);
    }

    #[test]
    fn ppa_report_rejects_penalty_with_met_timing() {
        let norm = NormalizedPpa {
            area_norm: 1.0,
            power_norm: 1.0,
            slack_penalty_norm: 0.1,
            j_ppa: 1.0,
        };
        assert!(PpaReport::new(1.0, [1.0, 1.0, 1.0], 0.0, norm).is_err());
    }

    #[test]
    fn candidate_parent_rule() {
        assert!(Candidate::new(0, "b", "m", Role::Generator, None, Phase::P1, 0).is_ok());
        assert!(Candidate::new(1, "b", "m", Role::Generator, Some(0), Phase::P1, 1).is_err());
        assert!(Candidate::new(1, "b", "m", Role::AggressiveMutator, None, Phase::P1, 1).is_err());
        assert!(Candidate::new(1, "b", "m", Role::Critique, None, Phase::P1, 1).is_err());
    }

    #[test]
    fn spec_validation() {
        let mut s = ProblemSpec {
            id: "x".into(),
            title: "X".into(),
            description: "d".into(),
            module_name: "x".into(),
            ports: vec![Port {
                name: "clk".into(),
                direction: PortDirection::In,
                width_bits: 1,
            }],
            constraints: vec![],
            testbench_ref: String::new(),
        };
        assert!(s.validate().is_ok());
        s.ports[0].width_bits = 0;
        assert!(s.validate().is_err());
        s.ports.clear();
        assert!(s.validate().is_err());
    }

    #[test]
    fn sa_config_validation() {
        let mut c = SaConfig::default();
        assert!(c.validate().is_ok());
        c.phase1.t_min = 2.0;
        assert!(c.validate().is_err());
        let mut c = SaConfig::default();
        c.ppa_weights.area = 0.5;
        assert!(c.validate().is_err());
    }
}
