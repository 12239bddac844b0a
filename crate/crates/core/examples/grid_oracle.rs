//! Brute-force cross-check of the structured solvers on a three-slot instance.
//!
//! ```bash
//! cargo run --release --example grid_oracle
//! ```

use wpmec::model::{ChannelKind, SolveMode, SystemParams};
use wpmec::scenario::{run_scheme, ScenarioConfig, Scheme};
use wpmec::verify::grid_oracle;

fn main() -> wpmec::Result<()> {
    for kind in [ChannelKind::Static, ChannelKind::TimeVarying] {
        let cfg = ScenarioConfig {
            params: SystemParams::default().with_num_slots(3),
            kind,
            seed: 99,
            ..ScenarioConfig::default()
        };
        let inst = cfg.instance(0)?;
        println!("{kind:?}, arrivals {:?}", inst.tasks.arrivals);
        for (scheme, mode) in [
            (Scheme::Offline, SolveMode::Joint),
            (Scheme::LocalOnly, SolveMode::LocalOnly),
            (Scheme::FullOffload, SolveMode::OffloadOnly),
        ] {
            let solver = run_scheme(scheme, kind, &inst.tasks, &inst.channels, &cfg.params)?
                .plan
                .total_energy(&cfg.params);
            let oracle = grid_oracle(&inst.tasks, &inst.channels, &cfg.params, mode, kind)?;
            println!(
                "  {scheme:<12} solver {solver:.6} J  oracle {oracle:.6} J  gap {:.2e}",
                (oracle - solver) / oracle
            );
        }
    }
    Ok(())
}
