// SPDX-License-Identifier: Apache-2.0

use proptest::prelude::*;

use rtlanneal::anneal::{internalize_score, phase_rng, EventDetail, Evaluation};
use rtlanneal::evaluate::ppa::render_reports;
use rtlanneal::evaluate::{parse_ppa, structural_check, MockAdapter, MockOutcome, ParsedPpa, PpaPatterns, Rule};
use rtlanneal::harness::run::load_templates;
use rtlanneal::harness::{load_suite, run_benchmark, BenchmarkContext, RunConfig};
use rtlanneal::model::PhaseSchedule;
use rtlanneal::objectives::{correctness_metrics, total_power};
use rtlanneal::pipelines::backend::MockBackend;
use rtlanneal::pipelines::{build_feedback_packet, parse_critique, LogPatterns};
use rtlanneal::{run_sa, Candidate, Decision, FeedbackPacket, Phase, Role, TraceEvent};

fn scores() -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(
        prop_oneof![9 => 0.0f64..1.0, 1 => Just(f64::NEG_INFINITY)],
        1..12,
    )
}

fn run(mode: Phase, seed: u64, scores: &[f64]) -> (f64, u64, Vec<TraceEvent>) {
    let schedule = match mode {
        Phase::P1 => PhaseSchedule::phase1_default(),
        Phase::P2 => PhaseSchedule::phase2_default(),
    };
    let mut trace = Vec::new();
    let mut next = 0;
    let out = run_sa(
        Candidate::new(0, "b", "module m; endmodule", Role::Generator, None, mode, 0).unwrap(),
        &schedule,
        mode,
        0,
        &mut phase_rng(seed, mode),
        |cur, _fb, k| {
            next += 1;
            Ok(Candidate::new(next, "b", cur.source.clone(), Role::AggressiveMutator, Some(cur.candidate_id), mode, k)?)
        },
        |_c, k| {
            Ok(Evaluation {
                score: scores[(k as usize).min(scores.len() - 1)],
                feedback: FeedbackPacket::default(),
                detail: EventDetail::P1 { compile: true, sim: true },
            })
        },
        &mut trace,
    )
    .unwrap();
    (out.best_score, out.best.candidate_id, trace)
}

const LOG_LINES: [&str; 8] = [
    "ok",
    "warning: implicit net",
    "Error-[SE] syntax error at line 4",
    "ERROR: mismatch at time 40 ns",
    "  expected 0011",
    "",
    "Assertion failed @ 12ns",
    "done",
];

fn log() -> impl Strategy<Value = String> {
    prop::collection::vec(0..LOG_LINES.len(), 0..10)
        .prop_map(|ix| ix.into_iter().map(|i| LOG_LINES[i]).collect::<Vec<_>>().join("\n"))
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(500))]

    #[test]
    fn best_is_running_max(seed in any::<u64>(), s in scores(), p2 in any::<bool>()) {
        let mode = if p2 { Phase::P2 } else { Phase::P1 };
        let (best, best_id, trace) = run(mode, seed, &s);
        // Trace scores are raw (costs in P2); compare on the internal scale.
        let internal = |e: &TraceEvent| e.score.map_or(f64::NEG_INFINITY, |s| internalize_score(mode, s));
        let mut running = f64::NEG_INFINITY;
        let mut prefix = Vec::new();
        for e in &trace {
            running = running.max(internal(e));
            prefix.push(running);
        }
        prop_assert!(prefix.windows(2).all(|w| w[0] <= w[1]));
        prop_assert_eq!(best, running);
        let selected: Vec<_> = trace.iter().filter(|e| e.decision == Decision::Selected).collect();
        prop_assert!(selected.len() <= 1);
        if let Some(sel) = selected.first() {
            prop_assert_eq!(sel.candidate_id, best_id);
            prop_assert_eq!(internal(sel), best);
        }
    }

    #[test]
    fn logic_equals_struct(total in 1u32..500, a in 0.0f64..=1.0, b in 0.0f64..=1.0, base in prop::option::of(0.0f64..100.0)) {
        let syn = (f64::from(total) * a) as u32;
        let st = (f64::from(syn) * b) as u32;
        let m = correctness_metrics(total, syn, st, base).unwrap();
        prop_assert_eq!(m.s_logic, m.s_struct);
        prop_assert!(m.s_struct <= m.s_syntax);
    }

    #[test]
    fn power_is_exact_sum(l in 0.0f64..1e5, i in 0.0f64..1e5, s in 0.0f64..1e5) {
        prop_assert_eq!(total_power(l, i, s).unwrap(), l + i + s);
        let p = ParsedPpa { area_um2: 1.0, power_uw: [l, i, s], wns_ns: 0.0 };
        prop_assert_eq!(p.power_total_uw(), l + i + s);
    }

    #[test]
    fn log_slice_is_from_a_log(compile in log(), sim in log(), ctx in 0usize..5) {
        let fb = build_feedback_packet(&compile, &sim, &LogPatterns::default(), ctx);
        prop_assert!(compile.contains(&fb.log_slice) || sim.contains(&fb.log_slice));
        if fb.has_errors() {
            prop_assert!(!fb.log_slice.is_empty());
        }
    }

    #[test]
    fn lint_never_panics(src in "[ a-z0-9_;:@()<=+\\-\\[\\]{}'\n]{0,300}") {
        let r = structural_check(&src, &Rule::ALL);
        prop_assert_eq!(r.outcomes.len(), Rule::ALL.len());
    }

    #[test]
    fn lint_survives_truncated_sources(cut in 0.0f64..1.0) {
        let src = include_str!("../data/fixtures/traffic_light/0000_generator.txt");
        let mut end = (src.len() as f64 * cut) as usize;
        while !src.is_char_boundary(end) {
            end -= 1;
        }
        structural_check(&src[..end], &Rule::ALL);
    }

    #[test]
    fn critique_accepts_only_schema(s in ".{0,120}") {
        if let Ok(c) = parse_critique(&s) {
            for v in [c.syntax, c.reset, c.logic, c.hazard] {
                prop_assert!([0.0, 0.5, 1.0].contains(&v.value()));
            }
        }
    }

    #[test]
    fn ppa_reports_round_trip(a in 1.0f64..1e4, l in 0.0f64..100.0, i in 0.0f64..1e3, s in 0.0f64..1e3, w in -2.0f64..2.0) {
        let q = |x: f64| (x * 1e4).round() / 1e4;
        let p = ParsedPpa { area_um2: q(a), power_uw: [q(l), q(i), q(s)], wns_ns: q(w) };
        let (t, ar, pw) = render_reports(&p);
        let back = parse_ppa(&t, &ar, &pw, &PpaPatterns::default()).unwrap();
        prop_assert!((back.area_um2 - p.area_um2).abs() < 1e-9);
        prop_assert!((back.wns_ns - p.wns_ns).abs() < 1e-9);
        for k in 0..3 {
            prop_assert!((back.power_uw[k] - p.power_uw[k]).abs() < 1e-9);
        }
    }
}

fn outcome() -> impl Strategy<Value = MockOutcome> {
    prop_oneof![
        Just(MockOutcome::pass()),
        Just(MockOutcome::sim_fail()),
        Just(MockOutcome::compile_fail()),
    ]
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn synthesis_only_for_gated(outcomes in prop::collection::vec(outcome(), 16)) {
        let specs = load_suite(std::path::Path::new("data/suite.toml")).unwrap();
        let spec = specs.iter().find(|s| s.id == "mux2_sync").unwrap();
        let mut cfg = RunConfig::default();
        cfg.suite.archive = false;
        let templates = load_templates(&cfg).unwrap();
        let ctx = BenchmarkContext { spec, config: &cfg, templates: &templates, testbench: None };
        let tmp = tempfile::tempdir().unwrap();
        let all_fail_sim = outcomes.iter().all(|o| !o.sim_ok);
        let adapter = MockAdapter::scripted(outcomes);
        let r = run_benchmark(&ctx, 0, Box::new(MockBackend::new(spec.clone())), &adapter, &tmp.path().join("r")).unwrap();
        let gated = r.phase2.as_ref().map_or(0, |p| p.gated_evaluations as usize);
        prop_assert_eq!(r.invocations.synth, gated);
        if all_fail_sim {
            prop_assert_eq!(r.invocations.synth, 0);
            prop_assert!(r.phase2.is_none());
        }
    }
}
