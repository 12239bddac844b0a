//! Offline-optimal schedule for a static channel.
//!
//! ```bash
//! cargo run --example static_offline
//! ```

use wpmec::model::{SolveMode, SystemParams, TaskTrace};
use wpmec::offline_static::solve_static;

fn main() -> wpmec::Result<()> {
    let params = SystemParams::default().with_num_slots(8);
    let tasks = TaskTrace::from_arrivals(vec![4e5, 1e5, 4e5, 0.0, 3e5, 3e5, 1e5, 5e5])?;
    let (h, g) = (3e-5, 6e-7);

    let sol = solve_static(&tasks, h, g, &params, SolveMode::Joint)?;
    println!("transition slots: {:?}", sol.schedule.transition_slots);
    for (range, level) in sol.schedule.intervals().zip(&sol.schedule.levels) {
        println!(
            "  slots {:>2}..={:<2} level {:.4e} J/bit",
            range.start + 1,
            range.end,
            level.value()
        );
    }

    println!("\nslot  arrival    local      offloaded  power");
    for i in 0..tasks.len() {
        println!(
            "{:>4}  {:>9.0}  {:>9.0}  {:>9.0}  {:.3} W",
            i + 1,
            tasks.arrivals[i],
            sol.plan.local_bits[i],
            sol.plan.offl_bits[i],
            sol.plan.power[i]
        );
    }
    println!("\nenergy per slot: {:.4} J", sol.plan.energy_per_slot(&params));

    // Restricted to one branch for comparison.
    for mode in [SolveMode::LocalOnly, SolveMode::OffloadOnly] {
        let e = solve_static(&tasks, h, g, &params, mode)?.plan.energy_per_slot(&params);
        println!("{mode:?}: {e:.4} J");
    }
    Ok(())
}
