//! Offline-optimal schedule for a time-varying channel: the ET only charges
//! at dominating slots (a new running-maximum WPT gain).
//!
//! ```bash
//! cargo run --example fading_offline
//! ```

use wpmec::model::{ChannelTrace, SolveMode, SystemParams, TaskTrace};
use wpmec::offline_fading::solve_fading;

fn main() -> wpmec::Result<()> {
    let params = SystemParams::default().with_num_slots(6);
    let tasks = TaskTrace::from_arrivals(vec![2e5, 3e5, 1e5, 2e5, 4e5, 1e5])?;
    let channels = ChannelTrace::from_gains(
        vec![1e-5, 3e-5, 2e-5, 5e-5, 4e-5, 6e-5],
        vec![6e-7, 2e-7, 9e-7, 5e-7, 1e-6, 4e-7],
    )?;

    let sol = solve_fading(&tasks, &channels, &params, SolveMode::Joint)?;
    let cds: Vec<usize> = sol.cds.cds_slots.iter().map(|s| s + 1).collect();
    println!("dominating slots: {cds:?}");
    println!("transition slots: {:?}", sol.schedule.transition_slots);

    let consumption = sol.plan.consumption(&channels, &params);
    println!("\nslot  h         h'        local     offl      consumed    power");
    for (i, consumed) in consumption.iter().enumerate() {
        println!(
            "{:>4}  {:.2e}  {:.2e}  {:>8.0}  {:>8.0}  {:.3e}  {:.3}",
            i + 1,
            channels.wpt_gain[i],
            sol.cds.effective_gains[i],
            sol.plan.local_bits[i],
            sol.plan.offl_bits[i],
            consumed,
            sol.plan.power[i],
        );
    }
    println!("\nenergy per slot: {:.4} J", sol.plan.energy_per_slot(&params));
    Ok(())
}
