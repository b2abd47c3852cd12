// SPDX-License-Identifier: Apache-2.0

//! Human and structured trace lines.
//!
//! Human lines use fixed column widths:
//!
//! ```text
//! [P1] iter=0   T=1.20  score=0.56  compile=1 sim=1   ACCEPT
//! [P2] iter=8   T=0.17  area=59.9  power=80.9  wns=0.200  SELECTED
//! ```
//!
//! `iter` is left-aligned in four columns, `T` and the Phase-1 score have two
//! decimals, area and power one, WNS three. A Phase-2 candidate without
//! synthesis figures shows `--` and its compile/sim flags instead.

use serde::Serialize;

use crate::anneal::{EventDetail, TraceEvent};
use crate::model::Phase;

fn bit(b: bool) -> u8 {
    u8::from(b)
}

pub fn emit_trace_line(event: &TraceEvent) -> String {
    let head = format!(
        "[{}] iter={:<4}T={:.2}  ",
        event.phase.tag(),
        event.iteration,
        event.temperature
    );
    let body = match event.detail {
        EventDetail::P1 { compile, sim } => {
            let score = event.score.map_or_else(|| "--".to_string(), |s| format!("{s:.2}"));
            format!("score={score}  compile={} sim={}   ", bit(compile), bit(sim))
        }
        EventDetail::P2 {
            ppa: Some(p), ..
        } => format!(
            "area={:.1}  power={:.1}  wns={:.3}  ",
            p.area_um2, p.power_uw, p.wns_ns
        ),
        EventDetail::P2 {
            compile, sim, ppa: None,
        } => format!(
            "area=--  power=--  wns=--  compile={} sim={}  ",
            bit(compile),
            bit(sim)
        ),
    };
    format!("{head}{body}{}", event.decision)
}

#[derive(Serialize)]
struct StructuredLine<'a> {
    run_id: &'a str,
    #[serde(flatten)]
    event: &'a TraceEvent,
}

/// One JSON object per event, full precision.
pub fn structured_trace_line(run_id: &str, event: &TraceEvent) -> String {
    serde_json::to_string(&StructuredLine { run_id, event }).expect("trace events serialize")
}

pub fn phase_header(phase: Phase) -> &'static str {
    match phase {
        Phase::P1 => "=== PHASE 1: Correctness SA ===",
        Phase::P2 => "=== PHASE 2: PPA SA ===",
    }
}

/// Scientific notation with a signed two-digit exponent, e.g. `2.90e-01`.
pub fn sci(value: f64, decimals: usize) -> String {
    let s = format!("{value:.decimals$e}");
    let Some((mantissa, exp)) = s.split_once('e') else {
        return s;
    };
    let (sign, digits) = match exp.strip_prefix('-') {
        Some(d) => ('-', d),
        None => ('+', exp),
    };
    format!("{mantissa}e{sign}{digits:0>2}")
}

/// Closing line of a phase. Phase 1 prints the reward with two decimals,
/// Phase 2 the cost in scientific notation.
pub fn summary_line(phase: Phase, best_raw: Option<f64>, artifact: &str) -> String {
    match (phase, best_raw) {
        (Phase::P1, Some(s)) => format!("[P1] best_score={s:.2}  -> {artifact}"),
        (Phase::P2, Some(s)) => format!("[P2] best_score={} -> {artifact}", sci(s, 2)),
        (p, None) => format!("[{}] best_score=--  (no feasible design)", p.tag()),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::anneal::{Decision, PpaPoint};

    fn p1(iter: u32, t: f64, score: f64, ok: bool, d: Decision) -> TraceEvent {
        TraceEvent {
            phase: Phase::P1,
            iteration: iter,
            candidate_id: 0,
            temperature: t,
            score: Some(score),
            detail: EventDetail::P1 { compile: ok, sim: ok },
            decision: d,
        }
    }

    #[test]
    fn p1_lines() {
        assert_eq!(
            emit_trace_line(&p1(6, 0.21, 0.78, false, Decision::Reject)),
            "[P1] iter=6   T=0.21  score=0.78  compile=0 sim=0   REJECT"
        );
        assert_eq!(
            emit_trace_line(&p1(0, 1.20, 0.56, true, Decision::Accept)),
            "[P1] iter=0   T=1.20  score=0.56  compile=1 sim=1   ACCEPT"
        );
        assert_eq!(
            emit_trace_line(&p1(0, 0.0, 0.0, false, Decision::Reject)),
            "[P1] iter=0   T=0.00  score=0.00  compile=0 sim=0   REJECT"
        );
    }

    #[test]
    fn p2_lines() {
        let ev = TraceEvent {
            phase: Phase::P2,
            iteration: 8,
            candidate_id: 9,
            temperature: 0.17,
            score: Some(0.29),
            detail: EventDetail::P2 {
                compile: true,
                sim: true,
                ppa: Some(PpaPoint {
                    area_um2: 59.9,
                    power_uw: 80.9,
                    wns_ns: 0.200,
                }),
            },
            decision: Decision::Selected,
        };
        assert_eq!(
            emit_trace_line(&ev),
            "[P2] iter=8   T=0.17  area=59.9  power=80.9  wns=0.200  SELECTED"
        );
        let ev = TraceEvent {
            iteration: 10,
            detail: EventDetail::P2 {
                compile: true,
                sim: false,
                ppa: None,
            },
            score: None,
            decision: Decision::Reject,
            ..ev
        };
        assert_eq!(
            emit_trace_line(&ev),
            "[P2] iter=10  T=0.17  area=--  power=--  wns=--  compile=1 sim=0  REJECT"
        );
    }

    #[test]
    fn summaries() {
        assert_eq!(
            summary_line(Phase::P1, Some(0.99), "out_phase1_best.sv"),
            "[P1] best_score=0.99  -> out_phase1_best.sv"
        );
        assert_eq!(
            summary_line(Phase::P2, Some(0.29), "out_phase2_best.sv"),
            "[P2] best_score=2.90e-01 -> out_phase2_best.sv"
        );
        assert_eq!(sci(1234.5, 1), "1.2e+03");
        assert_eq!(sci(0.0, 2), "0.00e+00");
    }

    #[test]
    fn structured_has_full_precision() {
        let line = structured_trace_line("r", &p1(3, 0.50625, 0.123456789, true, Decision::Accept));
        assert!(line.contains("\"run_id\":\"r\""));
        assert!(line.contains("0.50625"));
        assert!(line.contains("0.123456789"));
        assert!(line.contains("\"decision\":\"ACCEPT\""));
    }
}
