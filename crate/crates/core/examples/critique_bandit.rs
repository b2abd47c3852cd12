// SPDX-License-Identifier: Apache-2.0

//! Critique parsing and Thompson-sampling pipeline selection.
//!
//!     cargo run --example critique_bandit

use rtlanneal::anneal::{stream_rng, BANDIT_STREAM};
use rtlanneal::pipelines::bandit::DEFAULT_THRESHOLD;
use rtlanneal::pipelines::{parse_critique, select_pipeline, update_bandit, BanditState};
use rtlanneal::Role;

fn main() -> Result<(), Box<dyn std::error::Error>> {
    for raw in [
        r#"{"syntax":1.0,"reset":0.5,"logic":1.0,"hazard":0.0}"#,
        "Looks fine overall.\n```json\n{\"syntax\": 1, \"reset\": 1, \"logic\": 0.5, \"hazard\": 1}\n```",
        r#"{"syntax":1.0,"reset":0.7,"logic":1.0,"hazard":1.0}"#,
        "no scores here",
    ] {
        match parse_critique(raw) {
            Ok(s) => println!("ok   mean={:.3}  {s:?}", s.mean()),
            Err(e) => println!("err  {e}"),
        }
    }

    let mut state = BanditState::standard(false, DEFAULT_THRESHOLD)?;
    let mut rng = stream_rng(7, BANDIT_STREAM);
    // The aggressive mutator keeps producing high rewards, the conservative
    // one does not.
    for _ in 0..40 {
        let role = select_pipeline(&state, &mut rng);
        let reward = if role == Role::AggressiveMutator { 0.95 } else { 0.3 };
        state = update_bandit(&state, role, reward)?;
    }
    for role in [Role::ConservativeMutator, Role::AggressiveMutator] {
        let arm = state.arm(role).expect("standard arm");
        println!("{role:<22} successes={:<3} failures={}", arm.success_count, arm.failure_count);
    }
    let picks = (0..1000)
        .filter(|_| select_pipeline(&state, &mut rng) == Role::AggressiveMutator)
        .count();
    println!("aggressive picked {picks}/1000 after learning");
    Ok(())
}
