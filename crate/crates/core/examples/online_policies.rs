//! Causal online policies against the offline optimum on one random
//! instance per channel kind.
//!
//! ```bash
//! cargo run --example online_policies
//! ```

use wpmec::model::{ChannelKind, SolveMode, SystemParams};
use wpmec::online::{run_online, OnlinePolicy};
use wpmec::scenario::{run_scheme, ScenarioConfig, Scheme};

fn main() -> wpmec::Result<()> {
    for (kind, policy) in [
        (ChannelKind::Static, OnlinePolicy::Static),
        (ChannelKind::TimeVarying, OnlinePolicy::TimeVarying),
    ] {
        let cfg = ScenarioConfig {
            params: SystemParams::default().with_num_slots(30),
            kind,
            seed: 2024,
            ..ScenarioConfig::default()
        };
        let inst = cfg.instance(0)?;
        let online = run_online(policy, &inst.tasks, &inst.channels, &cfg.params, SolveMode::Joint)?;
        let offline = run_scheme(Scheme::Offline, kind, &inst.tasks, &inst.channels, &cfg.params)?.plan;

        let on = online.energy_per_slot(&cfg.params);
        let off = offline.energy_per_slot(&cfg.params);
        println!(
            "{kind:?}: offline {off:.3} J/slot, online {on:.3} J/slot ({:+.1}%)",
            100.0 * (on / off - 1.0)
        );
        let charged = online.power.iter().filter(|p| **p > 0.0).count();
        println!("  online charged in {charged} of {} slots", online.len());
    }
    Ok(())
}
