// SPDX-License-Identifier: Apache-2.0

//! Drives the annealing controller with scripted scores and prints the
//! trace. No backend or tools involved.
//!
//!     cargo run --example anneal_trace

use rtlanneal::anneal::{phase_rng, EventDetail, Evaluation, PpaPoint};
use rtlanneal::harness::emit_trace_line;
use rtlanneal::model::PhaseSchedule;
use rtlanneal::{run_sa, Candidate, FeedbackPacket, Phase, Role, TraceEvent};

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let seed = Candidate::new(0, "johnson_counter", "module johnson_counter; endmodule", Role::Generator, None, Phase::P1, 0)?;

    // Phase 1: correctness reward per iteration; (compile, sim) flags.
    let p1 = [(0.56, true, false), (0.57, true, false), (0.90, true, true), (0.96, true, true), (0.98, true, true), (0.99, true, true), (0.15, false, false)];
    let mut next_id = 1;
    let mut trace: Vec<TraceEvent> = Vec::new();
    let out = run_sa(
        seed,
        &PhaseSchedule::phase1_default(),
        Phase::P1,
        0,
        &mut phase_rng(0, Phase::P1),
        |cur, _fb, k| {
            next_id += 1;
            Ok(Candidate::new(next_id, "johnson_counter", cur.source.clone(), Role::ConservativeMutator, Some(cur.candidate_id), Phase::P1, k)?)
        },
        |_cand, k| {
            let (score, compile, sim) = p1[k as usize];
            Ok(Evaluation { score, feedback: FeedbackPacket::default(), detail: EventDetail::P1 { compile, sim } })
        },
        &mut trace,
    )?;
    println!("=== Phase 1 ===");
    for e in &trace {
        println!("{}", emit_trace_line(e));
    }

    // Phase 2 minimizes a cost; the controller negates it internally.
    let p2 = [(64.3, 92.7, 0.182), (61.8, 85.4, 0.196), (59.9, 80.9, 0.200), (62.5, 88.0, 0.190), (66.2, 95.8, 0.175)];
    let offset = trace.last().map_or(0, |e| e.iteration);
    let mut trace: Vec<TraceEvent> = Vec::new();
    let best = run_sa(
        out.best,
        &PhaseSchedule::phase2_default(),
        Phase::P2,
        offset,
        &mut phase_rng(0, Phase::P2),
        |cur, _fb, k| {
            next_id += 1;
            Ok(Candidate::new(next_id, "johnson_counter", cur.source.clone(), Role::AggressiveMutator, Some(cur.candidate_id), Phase::P2, k)?)
        },
        |_cand, k| {
            let (area, power, wns) = p2[(k - offset) as usize];
            let cost = (area / 64.3 + power / 92.7) / 3.0;
            Ok(Evaluation {
                score: -cost,
                feedback: FeedbackPacket::default(),
                detail: EventDetail::P2 { compile: true, sim: true, ppa: Some(PpaPoint { area_um2: area, power_uw: power, wns_ns: wns }) },
            })
        },
        &mut trace,
    )?;
    println!("=== Phase 2 ===");
    for e in &trace {
        println!("{}", emit_trace_line(e));
    }
    println!("best cost {:.4}", best.best_raw(Phase::P2).unwrap_or(f64::NAN));
    Ok(())
}
