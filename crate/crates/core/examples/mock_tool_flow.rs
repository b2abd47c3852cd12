// SPDX-License-Identifier: Apache-2.0

//! Compile, simulate and synthesize candidates through the mock adapter.
//! Synthesis is only reached for gated candidates.

use rtlanneal::evaluate::{compile_check, gate, parse_ppa, simulate, synthesize, CandidateWorkdir, MockAdapter, ToolAdapter};
use rtlanneal::evaluate::ppa::PpaPatterns;
use rtlanneal::pipelines::feedback::{build_feedback_packet, LogPatterns};
use rtlanneal::{Candidate, Phase, Role};

const SOURCES: [&str; 3] = [
    "// mock: compile=1 sim=1 warn=1\n// mock: area=59.9 leak=2.3 internal=44.1 switch=34.5 wns=0.2\nmodule m(input clk); endmodule\n",
    "// mock: compile=1 sim=0\nmodule m(input clk); endmodule\n",
    "// mock: compile=0\nmodule m(input clk) endmodule\n",
];

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let dir = tempfile::tempdir()?;
    let adapter = MockAdapter::directives();
    let patterns = LogPatterns::default();
    for (i, src) in SOURCES.iter().enumerate() {
        let cand = Candidate::new(i as u64, "demo", *src, Role::Generator, None, Phase::P2, 0)?;
        let wd = CandidateWorkdir::create(dir.path(), cand.candidate_id)?;
        let c = compile_check(&adapter, &cand, &wd, None, &patterns)?;
        let sim_ok = if c.compile_ok {
            simulate(&adapter, &c, &wd, None, &patterns)?.sim_ok
        } else {
            false
        };
        let g = gate(c.compile_ok, sim_ok);
        print!("candidate {i}: compile={} sim={} warn={} gate={g}", c.compile_ok as u8, sim_ok as u8, c.warn_count);
        if g {
            let texts = synthesize(&adapter, &wd, g)?;
            let ppa = parse_ppa(&texts.timing, &texts.area, &texts.power, &PpaPatterns::default())?;
            println!("  area={} power={:.1} wns={}", ppa.area_um2, ppa.power_total_uw(), ppa.wns_ns);
        } else {
            println!();
            let sim_log = if c.compile_ok { wd.read(&wd.sim_log())? } else { String::new() };
            let fb = build_feedback_packet(&c.raw_log, &sim_log, &patterns, 2);
            println!("  feedback slice: {:?}", fb.log_slice);
        }
    }
    let n = adapter.invocations();
    println!("invocations: compile={} sim={} synth={}", n.compile, n.sim, n.synth);
    Ok(())
}
