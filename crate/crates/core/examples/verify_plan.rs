//! Feasibility and structure reports for a solver plan and a tampered copy.
//!
//! ```bash
//! cargo run --example verify_plan
//! ```

use wpmec::model::{ChannelKind, SolveMode, SystemParams};
use wpmec::offline_fading::solve_fading;
use wpmec::scenario::ScenarioConfig;
use wpmec::verify::{check_feasible, check_structure};

fn main() -> wpmec::Result<()> {
    let cfg = ScenarioConfig {
        params: SystemParams::default().with_num_slots(20),
        kind: ChannelKind::TimeVarying,
        seed: 5,
        ..ScenarioConfig::default()
    };
    let inst = cfg.instance(0)?;
    let sol = solve_fading(&inst.tasks, &inst.channels, &cfg.params, SolveMode::Joint)?;

    let report = check_structure(
        &sol.plan,
        &sol.schedule,
        &inst.tasks,
        &inst.channels,
        &cfg.params,
        cfg.kind,
        SolveMode::Joint,
    )?;
    for c in &report.checks {
        println!("{:<20} {}", c.name, if c.passed { "ok" } else { "FAILED" });
    }

    // Move the first interval's work one slot earlier than its arrivals allow.
    let mut bad = sol.plan.clone();
    bad.local_bits[0] += inst.tasks.arrivals[1];
    bad.local_bits[1] = (bad.local_bits[1] - inst.tasks.arrivals[1]).max(0.0);
    let feas = check_feasible(&bad, &inst.tasks, &inst.channels, &cfg.params)?;
    match feas.violation {
        Some(v) => println!(
            "\ntampered plan: {} violated at slot {} (slack {:.3e})",
            v.check,
            v.slot + 1,
            v.slack
        ),
        None => println!("\ntampered plan still feasible"),
    }
    Ok(())
}
