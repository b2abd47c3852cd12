// SPDX-License-Identifier: Apache-2.0

//! Scoring: the Phase-1 correctness reward, the normalized Phase-2 PPA cost,
//! and the suite-level correctness, gain, and depth metrics.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{
    ComponentRates, CorrectnessMetrics, CritiqueScores, DepthBand, NormalizedPpa, PpaWeights,
    RewardWeights,
};

const WEIGHT_TOL: f64 = 1e-9;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ObjectiveError {
    #[error("config error: {0}")]
    Config(String),
    #[error("argument error: {0}")]
    Argument(String),
    #[error("normalization reference is not established")]
    MissingReference,
    #[error("relative gain is undefined for a zero baseline")]
    UndefinedGain,
}

pub fn validate_reward_weights(w: &RewardWeights) -> Result<(), ObjectiveError> {
    let all = [w.compile, w.sim, w.warn, w.critique];
    if all.iter().any(|v| !v.is_finite() || *v < 0.0) {
        return Err(ObjectiveError::Config("reward weights must be finite and >= 0".into()));
    }
    if (all.iter().sum::<f64>() - 1.0).abs() > WEIGHT_TOL {
        return Err(ObjectiveError::Config(format!(
            "reward weights sum to {}, expected 1",
            all.iter().sum::<f64>()
        )));
    }
    Ok(())
}

/// Phase-1 correctness reward J1.
///
/// `w_c*compile + w_s*sim + w_w/(1+warn) + w_q*mean(critique)`, with an absent
/// critique contributing zero. The result lies in [0,1] because the weights
/// sum to one and every term is in [0,1].
pub fn correctness_reward(
    compile_ok: bool,
    sim_ok: bool,
    warn_count: u32,
    critique: Option<&CritiqueScores>,
    weights: &RewardWeights,
) -> Result<f64, ObjectiveError> {
    validate_reward_weights(weights)?;
    let flag = |b: bool| if b { 1.0 } else { 0.0 };
    let warn_term = 1.0 / (1.0 + f64::from(warn_count));
    let critique_term = critique.map_or(0.0, CritiqueScores::mean);
    let j = weights.compile * flag(compile_ok)
        + weights.sim * flag(sim_ok)
        + weights.warn * warn_term
        + weights.critique * critique_term;
    // Float summation of weights that sum to 1 can land an ulp outside.
    Ok(j.clamp(0.0, 1.0))
}

pub(crate) fn sum_power(components: [f64; 3]) -> f64 {
    components[0] + components[1] + components[2]
}

/// Total power as the sum of leakage, internal, and switching power.
pub fn total_power(leak_uw: f64, internal_uw: f64, switch_uw: f64) -> Result<f64, ObjectiveError> {
    for (name, v) in [("leak", leak_uw), ("internal", internal_uw), ("switch", switch_uw)] {
        if !v.is_finite() || v < 0.0 {
            return Err(ObjectiveError::Argument(format!(
                "{name} power must be finite and >= 0, got {v}"
            )));
        }
    }
    Ok(sum_power([leak_uw, internal_uw, switch_uw]))
}

/// Per-benchmark normalization reference for the PPA cost.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NormalizationRef {
    pub benchmark_id: String,
    pub area_ref_um2: f64,
    pub power_ref_uw: f64,
    pub clock_period_ns: f64,
}

impl NormalizationRef {
    pub fn new(
        benchmark_id: impl Into<String>,
        area_ref_um2: f64,
        power_ref_uw: f64,
        clock_period_ns: f64,
    ) -> Result<Self, ObjectiveError> {
        for (name, v) in [
            ("area_ref_um2", area_ref_um2),
            ("power_ref_uw", power_ref_uw),
            ("clock_period_ns", clock_period_ns),
        ] {
            if !v.is_finite() || v <= 0.0 {
                return Err(ObjectiveError::Argument(format!("{name} must be > 0, got {v}")));
            }
        }
        Ok(NormalizationRef {
            benchmark_id: benchmark_id.into(),
            area_ref_um2,
            power_ref_uw,
            clock_period_ns,
        })
    }
}

/// Raw synthesis figures fed into the cost.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RawPpa {
    pub area_um2: f64,
    pub power_total_uw: f64,
    pub wns_ns: f64,
}

/// Normalized PPA cost. Errors if the reference has not been established.
pub fn ppa_cost(
    raw: RawPpa,
    reference: Option<&NormalizationRef>,
    weights: &PpaWeights,
) -> Result<NormalizedPpa, ObjectiveError> {
    weights
        .validate()
        .map_err(|e| ObjectiveError::Config(e.to_string()))?;
    let reference = reference.ok_or(ObjectiveError::MissingReference)?;
    if !(raw.area_um2.is_finite() && raw.power_total_uw.is_finite() && raw.wns_ns.is_finite()) {
        return Err(ObjectiveError::Argument("non-finite PPA figure".into()));
    }
    let area_norm = raw.area_um2 / reference.area_ref_um2;
    let power_norm = raw.power_total_uw / reference.power_ref_uw;
    let slack_penalty_norm = (-raw.wns_ns).max(0.0) / reference.clock_period_ns;
    let j_ppa =
        weights.area * area_norm + weights.power * power_norm + weights.slack * slack_penalty_norm;
    Ok(NormalizedPpa {
        area_norm,
        power_norm,
        slack_penalty_norm,
        j_ppa,
    })
}

/// Index of the cheapest gated entry, earliest on ties. `None` when no
/// entry is feasible.
pub fn select_best_feasible(candidates: &[(bool, f64)]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for (i, &(gate, cost)) in candidates.iter().enumerate() {
        if !gate || cost.is_nan() {
            continue;
        }
        match best {
            Some((_, c)) if cost >= c => {}
            _ => best = Some((i, cost)),
        }
    }
    best.map(|(i, _)| i)
}

/// Relative gain in percent, or `UndefinedGain` for a zero baseline.
pub fn relative_gain(ours_pct: f64, baseline_pct: f64) -> Result<f64, ObjectiveError> {
    if baseline_pct == 0.0 {
        return Err(ObjectiveError::UndefinedGain);
    }
    Ok(100.0 * (ours_pct - baseline_pct) / baseline_pct)
}

/// Syntax/structural/logic percentages and, when a baseline is supplied, the
/// absolute and relative structural gains. A zero baseline leaves the
/// relative gain undefined (`None`) rather than infinite.
pub fn correctness_metrics(
    n_total: u32,
    n_syntax_pass: u32,
    n_struct_pass: u32,
    baseline_struct_pct: Option<f64>,
) -> Result<CorrectnessMetrics, ObjectiveError> {
    if n_total == 0 {
        return Err(ObjectiveError::Argument("n_total must be positive".into()));
    }
    if n_struct_pass > n_syntax_pass || n_syntax_pass > n_total {
        return Err(ObjectiveError::Argument(format!(
            "need struct ({n_struct_pass}) <= syntax ({n_syntax_pass}) <= total ({n_total})"
        )));
    }
    let pct = |n: u32| 100.0 * f64::from(n) / f64::from(n_total);
    let s_syntax = pct(n_syntax_pass);
    let s_struct = pct(n_struct_pass);
    let (delta_struct, g_rel) = match baseline_struct_pct {
        Some(base) => (Some(s_struct - base), relative_gain(s_struct, base).ok()),
        None => (None, None),
    };
    Ok(CorrectnessMetrics {
        n_total,
        n_syntax_pass,
        n_struct_pass,
        s_syntax,
        s_struct,
        s_logic: s_struct,
        delta_struct,
        g_rel,
        depth_score: None,
        depth_band: None,
        depth_weights: DepthConfig::default().alphas,
        component_rates: None,
    })
}

/// Weights and band thresholds for the heuristic depth score.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthConfig {
    pub alphas: [f64; 5],
    /// Scores at or above `hi` are Low depth.
    pub hi: f64,
    /// Scores at or above `lo` (and below `hi`) are Medium depth.
    pub lo: f64,
    /// Optional split of the Medium band: scores in `[low_medium, hi)` are
    /// Low-Medium. Unset by default.
    #[serde(default)]
    pub low_medium: Option<f64>,
}

impl Default for DepthConfig {
    fn default() -> Self {
        DepthConfig {
            alphas: [0.2; 5],
            hi: 0.85,
            lo: 0.60,
            low_medium: None,
        }
    }
}

/// The five satisfaction rates of the depth score, each in [0,1].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepthRates {
    pub syntax: f64,
    pub reset: f64,
    pub pipeline: f64,
    pub logic: f64,
    pub hazard: f64,
}

impl DepthRates {
    fn as_array(&self) -> [f64; 5] {
        [self.syntax, self.reset, self.pipeline, self.logic, self.hazard]
    }
}

/// Weighted satisfaction score and its band. Higher scores mean less
/// corrective effort was needed, so they map to lower depth.
pub fn heuristic_depth(
    rates: &DepthRates,
    config: &DepthConfig,
) -> Result<(f64, DepthBand), ObjectiveError> {
    if config.alphas.iter().any(|a| !a.is_finite() || *a < 0.0)
        || (config.alphas.iter().sum::<f64>() - 1.0).abs() > WEIGHT_TOL
    {
        return Err(ObjectiveError::Config("depth alphas must be >= 0 and sum to 1".into()));
    }
    if config.lo.is_nan() || config.hi.is_nan() || config.lo > config.hi {
        return Err(ObjectiveError::Config("depth thresholds need lo <= hi".into()));
    }
    let rates = rates.as_array();
    if rates.iter().any(|r| !(0.0..=1.0).contains(r)) {
        return Err(ObjectiveError::Argument("depth rates must lie in [0,1]".into()));
    }
    let score: f64 = config.alphas.iter().zip(rates).map(|(a, r)| a * r).sum();
    // Equal alphas over equal rates can land an ulp below the threshold.
    let at_least = |t: f64| score >= t - 1e-12;
    let band = if at_least(config.hi) {
        DepthBand::Low
    } else if config.low_medium.is_some_and(at_least) {
        DepthBand::LowMedium
    } else if at_least(config.lo) {
        DepthBand::Medium
    } else {
        DepthBand::High
    };
    Ok((score, band))
}

/// Attaches a depth score to already computed metrics.
pub fn with_depth(
    mut metrics: CorrectnessMetrics,
    components: ComponentRates,
    config: &DepthConfig,
) -> Result<CorrectnessMetrics, ObjectiveError> {
    let rates = DepthRates {
        syntax: metrics.s_syntax / 100.0,
        reset: components.s_reset,
        pipeline: components.s_pipeline,
        logic: metrics.s_logic / 100.0,
        hazard: components.s_hazard,
    };
    let (score, band) = heuristic_depth(&rates, config)?;
    metrics.depth_score = Some(score);
    metrics.depth_band = Some(band);
    metrics.depth_weights = config.alphas;
    metrics.component_rates = Some(components);
    Ok(metrics)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn close(a: f64, b: f64, tol: f64) -> bool {
        (a - b).abs() <= tol
    }

    #[test]
    fn reward_perfect() {
        let c = CritiqueScores::new(1.0, 1.0, 1.0, 1.0).unwrap();
        let j = correctness_reward(true, true, 0, Some(&c), &RewardWeights::default()).unwrap();
        assert!(close(j, 1.0, 1e-12));
    }

    #[test]
    fn reward_only_warn_term() {
        let j = correctness_reward(false, false, 0, None, &RewardWeights::default()).unwrap();
        assert!(close(j, 0.10, 1e-12));
    }

    #[test]
    fn reward_partial_critique() {
        // 0.4 + 0.4 + 0.1 + 0.1 * 0.875
        let c = CritiqueScores::new(1.0, 1.0, 1.0, 0.5).unwrap();
        let j = correctness_reward(true, true, 0, Some(&c), &RewardWeights::default()).unwrap();
        assert!(close(j, 0.9875, 1e-12));
    }

    #[test]
    fn reward_rejects_bad_weights() {
        let w = RewardWeights {
            compile: 0.5,
            sim: 0.5,
            warn: 0.1,
            critique: 0.0,
        };
        assert!(matches!(
            correctness_reward(true, true, 0, None, &w),
            Err(ObjectiveError::Config(_))
        ));
    }

    #[test]
    fn reward_warn_term_decays() {
        let w = RewardWeights::default();
        let a = correctness_reward(true, true, 0, None, &w).unwrap();
        let b = correctness_reward(true, true, 3, None, &w).unwrap();
        assert!(close(a - b, 0.1 * (1.0 - 0.25), 1e-12));
    }

    #[test]
    fn total_power_examples() {
        assert_eq!(total_power(0.0, 0.0, 0.0).unwrap(), 0.0);
        assert!(close(total_power(10.0, 40.9, 30.0).unwrap(), 80.9, 1e-9));
        assert_eq!(total_power(1.5, 2.5, 3.0).unwrap(), 7.0);
        assert!(total_power(-1.0, 0.0, 0.0).is_err());
    }

    #[test]
    fn ppa_cost_self_normalization() {
        let r = NormalizationRef::new("b", 64.3, 92.7, 1.0).unwrap();
        let w = PpaWeights {
            area: 0.5,
            power: 0.3,
            slack: 0.2,
        };
        let raw = RawPpa {
            area_um2: 64.3,
            power_total_uw: 92.7,
            wns_ns: 0.1,
        };
        let n = ppa_cost(raw, Some(&r), &w).unwrap();
        assert_eq!(n.area_norm, 1.0);
        assert_eq!(n.power_norm, 1.0);
        assert_eq!(n.slack_penalty_norm, 0.0);
        assert!(close(n.j_ppa, 0.8, 1e-12));
    }

    #[test]
    fn ppa_cost_violated_slack() {
        let r = NormalizationRef::new("b", 100.0, 100.0, 1.0).unwrap();
        let raw = RawPpa {
            area_um2: 100.0,
            power_total_uw: 100.0,
            wns_ns: -0.28,
        };
        let n = ppa_cost(raw, Some(&r), &PpaWeights::default()).unwrap();
        assert!(close(n.slack_penalty_norm, 0.28, 1e-12));
    }

    #[test]
    fn ppa_cost_needs_reference() {
        let raw = RawPpa {
            area_um2: 1.0,
            power_total_uw: 1.0,
            wns_ns: 0.0,
        };
        assert!(matches!(
            ppa_cost(raw, None, &PpaWeights::default()),
            Err(ObjectiveError::MissingReference)
        ));
    }

    #[test]
    fn select_best_feasible_cases() {
        assert_eq!(select_best_feasible(&[(false, 0.1), (false, 0.2)]), None);
        assert_eq!(select_best_feasible(&[(false, 0.1), (true, 9.0)]), Some(1));
        assert_eq!(select_best_feasible(&[(true, 0.5), (true, 0.5)]), Some(0));
        assert_eq!(select_best_feasible(&[(true, 0.5), (true, 0.4), (false, 0.1)]), Some(1));
    }

    #[test]
    fn metrics_gain_examples() {
        let m = correctness_metrics(100, 100, 90, Some(55.0)).unwrap();
        assert_eq!(m.delta_struct, Some(35.0));
        assert!(close(m.g_rel.unwrap(), 63.636_363, 1e-5));
        let m = correctness_metrics(100, 78, 0, Some(35.0)).unwrap();
        assert_eq!(m.delta_struct, Some(-35.0));
        assert_eq!(m.g_rel, Some(-100.0));
        let m = correctness_metrics(10, 10, 5, Some(50.0)).unwrap();
        assert_eq!(m.delta_struct, Some(0.0));
        assert_eq!(m.g_rel, Some(0.0));
        assert_eq!(m.s_logic, m.s_struct);
    }

    #[test]
    fn metrics_zero_baseline_has_no_gain() {
        let m = correctness_metrics(5, 5, 4, Some(0.0)).unwrap();
        assert_eq!(m.delta_struct, Some(80.0));
        assert_eq!(m.g_rel, None);
        assert_eq!(relative_gain(80.0, 0.0), Err(ObjectiveError::UndefinedGain));
    }

    #[test]
    fn metrics_rejects_inconsistent_counts() {
        assert!(correctness_metrics(0, 0, 0, None).is_err());
        assert!(correctness_metrics(5, 3, 4, None).is_err());
        assert!(correctness_metrics(5, 6, 4, None).is_err());
    }

    #[test]
    fn depth_examples() {
        let cfg = DepthConfig::default();
        let all = |v| DepthRates {
            syntax: v,
            reset: v,
            pipeline: v,
            logic: v,
            hazard: v,
        };
        let (r, b) = heuristic_depth(&all(1.0), &cfg).unwrap();
        assert!(close(r, 1.0, 1e-12));
        assert_eq!(b, DepthBand::Low);

        let rates = DepthRates {
            syntax: 1.0,
            reset: 0.5,
            pipeline: 0.5,
            logic: 0.5,
            hazard: 0.5,
        };
        let (r, b) = heuristic_depth(&rates, &cfg).unwrap();
        assert!(close(r, 0.6, 1e-12));
        assert_eq!(b, DepthBand::Medium);

        let (r, b) = heuristic_depth(&all(0.4), &cfg).unwrap();
        assert!(close(r, 0.4, 1e-12));
        assert_eq!(b, DepthBand::High);
    }

    #[test]
    fn depth_low_medium_split() {
        let cfg = DepthConfig {
            low_medium: Some(0.75),
            ..DepthConfig::default()
        };
        let rates = DepthRates {
            syntax: 0.8,
            reset: 0.8,
            pipeline: 0.8,
            logic: 0.8,
            hazard: 0.8,
        };
        assert_eq!(heuristic_depth(&rates, &cfg).unwrap().1, DepthBand::LowMedium);
    }

    #[test]
    fn depth_rejects_bad_alphas() {
        let cfg = DepthConfig {
            alphas: [0.3; 5],
            ..DepthConfig::default()
        };
        let rates = DepthRates {
            syntax: 1.0,
            reset: 1.0,
            pipeline: 1.0,
            logic: 1.0,
            hazard: 1.0,
        };
        assert!(matches!(
            heuristic_depth(&rates, &cfg),
            Err(ObjectiveError::Config(_))
        ));
    }
}
