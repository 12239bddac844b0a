//! Monte Carlo means over the horizon length, as the `sweep` command does.
//!
//! ```bash
//! cargo run --release --example monte_carlo_sweep
//! ```

use wpmec::model::{ChannelKind, SystemParams};
use wpmec::scenario::{run_montecarlo, ScenarioConfig, Scheme};

fn main() -> wpmec::Result<()> {
    let schemes = [Scheme::Offline, Scheme::Online, Scheme::Myopic];
    let reps = 200;
    for kind in [ChannelKind::Static, ChannelKind::TimeVarying] {
        println!("{kind:?} channels, {reps} replications");
        for n in [10, 20, 50] {
            let cfg = ScenarioConfig {
                params: SystemParams::default().with_num_slots(n),
                kind,
                ..ScenarioConfig::default()
            };
            let result = run_montecarlo(&cfg, &schemes, reps)?;
            let cells: Vec<String> = result
                .summaries
                .iter()
                .map(|s| format!("{} {:.3} ± {:.3}", s.scheme, s.mean_energy_per_slot, s.stderr))
                .collect();
            println!("  N = {n:>2}: {}", cells.join(", "));
        }
    }
    Ok(())
}
