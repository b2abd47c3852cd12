// SPDX-License-Identifier: Apache-2.0

//! Parses synthesis reports, normalizes against a reference, and picks the
//! cheapest gated candidate.
//!
//!     cargo run --example ppa_objective

use rtlanneal::evaluate::{parse_ppa, PpaPatterns};
use rtlanneal::model::PpaWeights;
use rtlanneal::objectives::{ppa_cost, select_best_feasible, NormalizationRef, RawPpa};

const TIMING: &str = "\
  data required time                          1.0000
  data arrival time                           0.8000
  ---------------------------------------------------
  slack (MET)                                 0.2000
";
const AREA: &str = "Combinational area:   31.2000\nNoncombinational area: 28.7000\nTotal cell area:      59.9000\n";
const POWER: &str = "\
  Cell Internal Power  =  44.1000 uW
  Net Switching Power  =  34.5000 uW
  Cell Leakage Power   =   2.3000 uW
";

fn main() -> Result<(), Box<dyn std::error::Error>> {
    let parsed = parse_ppa(TIMING, AREA, POWER, &PpaPatterns::default())?;
    println!(
        "parsed: area={} um2, power={:?} uW (total {:.1}), wns={} ns",
        parsed.area_um2,
        parsed.power_uw,
        parsed.power_total_uw(),
        parsed.wns_ns
    );

    // The reference is the Phase-2 seed's own synthesis result.
    let reference = NormalizationRef::new("johnson_counter", 64.3, 92.7, 1.0)?;
    let weights = PpaWeights::default();
    let listing = [
        ("iter 6", 64.3, 92.7, 0.182),
        ("iter 7", 61.8, 85.4, 0.196),
        ("iter 8", 59.9, 80.9, 0.200),
        ("iter 10", 66.2, 95.8, 0.175),
    ];
    let mut pool = Vec::new();
    for (name, area_um2, power_total_uw, wns_ns) in listing {
        let n = ppa_cost(RawPpa { area_um2, power_total_uw, wns_ns }, Some(&reference), &weights)?;
        println!("{name:>8}: A^={:.3} P^={:.3} S^={:.3} J={:.4}", n.area_norm, n.power_norm, n.slack_penalty_norm, n.j_ppa);
        pool.push((true, n.j_ppa));
    }
    let best = select_best_feasible(&pool).expect("at least one gated entry");
    println!("selected: {}", listing[best].0);

    // A violated path costs slack in proportion to the clock period.
    let late = ppa_cost(RawPpa { area_um2: 59.9, power_total_uw: 80.9, wns_ns: -0.25 }, Some(&reference), &weights)?;
    println!("same design with wns=-0.25: J={:.4}", late.j_ppa);
    Ok(())
}
