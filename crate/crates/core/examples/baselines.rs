//! Benchmark schemes on one instance: local computing only, full
//! offloading, and the myopic design that clears every slot's arrivals.
//!
//! ```bash
//! cargo run --example baselines
//! ```

use wpmec::baselines::{full_offload, local_only, myopic};
use wpmec::model::{ChannelKind, SolveMode, SystemParams};
use wpmec::offline_fading::solve_fading;
use wpmec::scenario::ScenarioConfig;

fn main() -> wpmec::Result<()> {
    let params = SystemParams::default().with_num_slots(50);
    println!("d [m]  joint     local     offload   myopic");
    for d in [2.0, 5.0, 8.0] {
        let mut cfg = ScenarioConfig {
            params,
            kind: ChannelKind::TimeVarying,
            seed: 7,
            ..ScenarioConfig::default()
        };
        cfg.geometry.user_distance = d;
        let inst = cfg.instance(0)?;
        let (t, c, p) = (&inst.tasks, &inst.channels, &params);

        let joint = solve_fading(t, c, p, SolveMode::Joint)?.plan;
        let lo = local_only(t, c, p, cfg.kind, true)?;
        let fo = full_offload(t, c, p, cfg.kind, true)?;
        let my = myopic(t, c, p)?;
        println!(
            "{d:>5}  {:<8.3}  {:<8.3}  {:<8.3}  {:<8.3}",
            joint.energy_per_slot(p),
            lo.energy_per_slot(p),
            fo.energy_per_slot(p),
            my.energy_per_slot(p)
        );
    }
    Ok(())
}
