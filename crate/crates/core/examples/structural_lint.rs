// SPDX-License-Identifier: Apache-2.0

//! Runs the structural rules over two sources: a shipped divider that
//! passes, and a state machine with an incomplete case and no default.

use std::path::Path;

use rtlanneal::evaluate::lint::{structural_check, Rule};
use rtlanneal::pipelines::template::strip_code_fence;

const FRAGMENT: &str = r#"
module fsm(input clk, input rst_n, input go, output reg busy);
    localparam IDLE = 2'd0, RUN = 2'd1, DONE = 2'd2;
    reg [1:0] state;
    always @(posedge clk) begin
        if (!rst_n) state <= IDLE;
        else case (state)
            IDLE: if (go) state <= RUN;
            RUN: state = DONE;
        endcase
    end
    always @(*) busy = (state == RUN);
endmodule
"#;

fn show(name: &str, source: &str) {
    let r = structural_check(source, &Rule::ALL);
    println!("{name}");
    for rule in Rule::ALL {
        println!("  {:<22} {:?}", rule.to_string(), r.verdict(rule));
    }
    for f in r.findings() {
        println!("  - {f}");
    }
}

fn main() -> std::io::Result<()> {
    let path = Path::new(env!("CARGO_MANIFEST_DIR")).join("data/fixtures/freq_div/0000_generator.txt");
    let (freq_div, _) = strip_code_fence(&std::fs::read_to_string(path)?);
    show("freq_div", &freq_div);
    show("fsm fragment", FRAGMENT);
    Ok(())
}
