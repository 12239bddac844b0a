//! Benchmark schemes: single-branch execution and the myopic design.

use crate::error::{Error, Result};
use crate::model::{
    solve_level, split_at_level, AllocationPlan, ChannelKind, ChannelTrace, SlotGains, SolveMode, SystemParams,
    TaskTrace,
};
use crate::offline_fading::solve_fading;
use crate::offline_static::solve_static;
use crate::online::{run_online, OnlinePolicy};

fn restricted(
    tasks: &TaskTrace,
    channels: &ChannelTrace,
    params: &SystemParams,
    kind: ChannelKind,
    offline: bool,
    mode: SolveMode,
) -> Result<AllocationPlan> {
    match (kind, offline) {
        (ChannelKind::Static, true) => {
            if channels.is_empty() {
                return Err(Error::Domain("empty channel trace".into()));
            }
            Ok(solve_static(tasks, channels.wpt_gain[0], channels.offl_gain[0], params, mode)?.plan)
        }
        (ChannelKind::TimeVarying, true) => Ok(solve_fading(tasks, channels, params, mode)?.plan),
        (ChannelKind::Static, false) => run_online(OnlinePolicy::Static, tasks, channels, params, mode),
        (ChannelKind::TimeVarying, false) => run_online(OnlinePolicy::TimeVarying, tasks, channels, params, mode),
    }
}

/// Every bit computed locally (`d_i = 0`).
pub fn local_only(
    tasks: &TaskTrace,
    channels: &ChannelTrace,
    params: &SystemParams,
    kind: ChannelKind,
    offline: bool,
) -> Result<AllocationPlan> {
    restricted(tasks, channels, params, kind, offline, SolveMode::LocalOnly)
}

/// Every bit offloaded (`ℓ_i = 0`).
pub fn full_offload(
    tasks: &TaskTrace,
    channels: &ChannelTrace,
    params: &SystemParams,
    kind: ChannelKind,
    offline: bool,
) -> Result<AllocationPlan> {
    restricted(tasks, channels, params, kind, offline, SolveMode::OffloadOnly)
}

/// Executes each slot's arrivals within that slot, split to minimize the
/// slot's energy, and powers exactly that slot's consumption.
pub fn myopic(tasks: &TaskTrace, channels: &ChannelTrace, params: &SystemParams) -> Result<AllocationPlan> {
    if tasks.len() != channels.len() {
        return Err(Error::LengthMismatch {
            what: "channel gains",
            expected: tasks.len(),
            actual: channels.len(),
        });
    }
    let mut plan = AllocationPlan::zeros(tasks.len());
    for (i, &a) in tasks.arrivals.iter().enumerate() {
        let slot = SlotGains {
            h_eff: channels.wpt_gain[i],
            g: channels.offl_gain[i],
        };
        let level = solve_level(a, &[slot], params, SolveMode::Joint)?;
        let (l, d) = split_at_level(level, slot, params, SolveMode::Joint);
        plan.local_bits[i] = l;
        plan.offl_bits[i] = d;
        plan.power[i] = params.slot_energy_raw(l, d, slot.g) / (params.slot_len * params.eh_efficiency * slot.h_eff);
    }
    Ok(plan)
}
