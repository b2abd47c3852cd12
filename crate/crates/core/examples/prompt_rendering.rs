// SPDX-License-Identifier: Apache-2.0

//! Renders the prompt each role would receive for one benchmark, once with
//! no feedback and once after a failed simulation.

use std::path::Path;

use rtlanneal::harness::load_suite;
use rtlanneal::pipelines::feedback::{build_feedback_packet, LogPatterns};
use rtlanneal::pipelines::template::{render_prompt, TemplateLibrary};
use rtlanneal::Role;

const RTL: &str = "module johnson_counter(input clk, input rst_n, output reg [3:0] Q);\nendmodule\n";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let root = Path::new(env!("CARGO_MANIFEST_DIR"));
    let specs = load_suite(&root.join("data/suite.toml"))?;
    let spec = specs.iter().find(|s| s.id == "johnson_counter").expect("shipped benchmark");
    let lib = TemplateLibrary::load(&root.join("data/templates"))?;

    for role in Role::ALL {
        let t = lib.get(&spec.id, role);
        let rtl = t.requires_rtl().then_some(RTL);
        let (system, user) = render_prompt(t, spec, rtl, None)?;
        println!("===== {role} =====");
        println!("[system] {system}");
        println!("{user}\n");
    }

    let sim_log = "VCD info: dumpfile tb.vcd opened\nERROR: Q mismatch at time 45 ns: got 0011 expected 0111\n";
    let fb = build_feedback_packet("", sim_log, &LogPatterns::default(), 2);
    let t = lib.get(&spec.id, Role::ConservativeMutator);
    let (_, user) = render_prompt(t, spec, Some(RTL), Some(&fb))?;
    println!("===== conservative_mutator after a failing simulation =====");
    println!("{user}");
    Ok(())
}
