//! Offline-optimal schedule for static channels.
//!
//! The executed-bits curve is the greatest convex minorant of the cumulative
//! arrivals: starting after the last transition, the next transition is the
//! slot minimizing the running average of arrivals. Every slot of an interval
//! executes that average, split between local computing and offloading at a
//! common computation level. The ET then spreads the total demand evenly over
//! the horizon.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{
    solve_level, split_at_level, AllocationPlan, ComputationLevel, SlotGains, SolveMode, SystemParams, TaskTrace,
};

/// Interval boundaries of a staircase allocation and the level of each interval.
///
/// `transition_slots` holds exclusive end indices, which are also the
/// one-based numbers of the transition slots. The last entry is always `N`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct TransitionSchedule {
    pub transition_slots: Vec<usize>,
    pub levels: Vec<ComputationLevel>,
}

impl TransitionSchedule {
    pub fn intervals(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        let starts = std::iter::once(0).chain(self.transition_slots.iter().copied());
        starts.zip(self.transition_slots.iter().copied()).map(|(s, e)| s..e)
    }

    /// Level in force at every slot.
    pub fn level_per_slot(&self) -> Vec<ComputationLevel> {
        self.intervals()
            .zip(&self.levels)
            .flat_map(|(r, lvl)| std::iter::repeat_n(*lvl, r.len()))
            .collect()
    }

    pub fn num_slots(&self) -> usize {
        self.transition_slots.last().copied().unwrap_or(0)
    }
}

/// Solver output: the plan plus the interval structure that produced it.
#[derive(Debug, Clone, PartialEq)]
pub struct StaticSolution {
    pub plan: AllocationPlan,
    pub schedule: TransitionSchedule,
}

/// End (exclusive) of the interval starting at `start` and the per-slot
/// average it executes. Ties go to the later slot.
pub(crate) fn next_transition(arrivals: &[f64], start: usize) -> (usize, f64) {
    let mut sum = 0.0;
    let mut best = (start + 1, f64::INFINITY);
    for (offset, a) in arrivals[start..].iter().enumerate() {
        sum += a;
        let avg = sum / (offset + 1) as f64;
        if avg <= best.1 {
            best = (start + offset + 1, avg);
        }
    }
    best
}

/// Transition slots of the staircase for the given arrivals.
pub fn forward_search(arrivals: &[f64]) -> Vec<usize> {
    let mut transitions = Vec::new();
    let mut start = 0;
    while start < arrivals.len() {
        let (end, _) = next_transition(arrivals, start);
        transitions.push(end);
        start = end;
    }
    transitions
}

/// Task allocation `(local, offloaded, schedule)` for a static channel.
pub fn static_task_allocation(
    arrivals: &[f64],
    h: f64,
    g: f64,
    params: &SystemParams,
    mode: SolveMode,
) -> Result<(Vec<f64>, Vec<f64>, TransitionSchedule)> {
    let n = arrivals.len();
    let slot = SlotGains { h_eff: h, g };
    let mut local = Vec::with_capacity(n);
    let mut offl = Vec::with_capacity(n);
    let mut schedule = TransitionSchedule::default();
    let mut start = 0;
    while start < n {
        let (end, avg) = next_transition(arrivals, start);
        let level = solve_level(avg, &[slot], params, mode)?;
        let (l, d) = split_at_level(level, slot, params, mode);
        local.extend(std::iter::repeat_n(l, end - start));
        offl.extend(std::iter::repeat_n(d, end - start));
        schedule.transition_slots.push(end);
        schedule.levels.push(level);
        start = end;
    }
    Ok((local, offl, schedule))
}

/// First-slot allocation of the static staircase; what an online policy commits.
pub(crate) fn static_first_slot(
    arrivals: &[f64],
    h: f64,
    g: f64,
    params: &SystemParams,
    mode: SolveMode,
) -> Result<(f64, f64)> {
    let slot = SlotGains { h_eff: h, g };
    let (_, avg) = next_transition(arrivals, 0);
    let level = solve_level(avg, &[slot], params, mode)?;
    Ok(split_at_level(level, slot, params, mode))
}

/// Optimal offline plan for a static channel `(h, g)`.
pub fn solve_static(
    tasks: &TaskTrace,
    h: f64,
    g: f64,
    params: &SystemParams,
    mode: SolveMode,
) -> Result<StaticSolution> {
    if tasks.len() != params.num_slots {
        return Err(Error::LengthMismatch {
            what: "arrivals",
            expected: params.num_slots,
            actual: tasks.len(),
        });
    }
    if !(h > 0.0 && g > 0.0) {
        return domain(format!("static gains must be > 0, got h={h}, g={g}"));
    }
    let (local, offl, schedule) = static_task_allocation(&tasks.arrivals, h, g, params, mode)?;
    let power = uniform_power(&local, &offl, h, g, params)?;
    Ok(StaticSolution {
        plan: AllocationPlan {
            power,
            local_bits: local,
            offl_bits: offl,
        },
        schedule,
    })
}

/// Spreads the total demand evenly: `p_i = Σ_j E_j / (τ η h N)`.
pub fn uniform_power(local: &[f64], offl: &[f64], h: f64, g: f64, params: &SystemParams) -> Result<Vec<f64>> {
    if local.len() != offl.len() {
        return Err(Error::LengthMismatch {
            what: "offloaded bits",
            expected: local.len(),
            actual: offl.len(),
        });
    }
    let n = local.len();
    if n == 0 {
        return Ok(Vec::new());
    }
    let demand: f64 = local
        .iter()
        .zip(offl)
        .map(|(l, d)| params.slot_energy_raw(*l, *d, g))
        .sum();
    let p = demand / (params.slot_len * params.eh_efficiency * h * n as f64);
    Ok(vec![p; n])
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn params(n: usize) -> SystemParams {
        SystemParams::default().with_num_slots(n)
    }

    const H: f64 = 3e-5;
    const G: f64 = 6e-7;

    #[test]
    fn zero_arrivals_give_zero_plan() {
        let p = params(3);
        let tasks = TaskTrace::from_arrivals(vec![0.0; 3]).unwrap();
        let sol = solve_static(&tasks, H, G, &p, SolveMode::Joint).unwrap();
        assert_eq!(sol.plan, AllocationPlan::zeros(3));
        assert_eq!(sol.schedule.transition_slots, vec![3]);
    }

    #[test]
    fn hand_executed_forward_search() {
        // Running averages from slot 1: [4, 2.5, 3] -> transition at 2.
        // Then [4] from slot 3 -> transition at 3.
        let arrivals = [4e5, 1e5, 4e5];
        assert_eq!(forward_search(&arrivals), vec![2, 3]);
        let p = params(3);
        let tasks = TaskTrace::from_arrivals(arrivals.to_vec()).unwrap();
        let sol = solve_static(&tasks, H, G, &p, SolveMode::Joint).unwrap();
        let totals: Vec<f64> = sol.plan.executed().collect();
        for (t, want) in totals.iter().zip([2.5e5, 2.5e5, 4e5]) {
            assert_relative_eq!(*t, want, max_relative = 1e-10);
        }
    }

    #[test]
    fn constant_arrivals_single_interval() {
        let p = params(6);
        let tasks = TaskTrace::from_arrivals(vec![3e5; 6]).unwrap();
        let sol = solve_static(&tasks, H, G, &p, SolveMode::Joint).unwrap();
        assert_eq!(sol.schedule.transition_slots, vec![6]);
        let l0 = sol.plan.local_bits[0];
        let d0 = sol.plan.offl_bits[0];
        assert!(l0 > 0.0 && d0 > 0.0);
        assert!(sol.plan.local_bits.iter().all(|l| *l == l0));
        assert!(sol.plan.offl_bits.iter().all(|d| *d == d0));
        assert_relative_eq!(l0 + d0, 3e5, max_relative = 1e-10);
    }

    #[test]
    fn ties_merge_into_later_transition() {
        assert_eq!(forward_search(&[2.0, 2.0, 2.0]), vec![3]);
        assert_eq!(forward_search(&[1.0, 1.0, 4.0, 0.0]), vec![2, 4]);
    }

    #[test]
    fn uniform_power_values() {
        let p = params(2);
        assert_eq!(uniform_power(&[0.0; 2], &[0.0; 2], H, G, &p).unwrap(), vec![0.0; 2]);
        // Consumptions 2e-6 and 6e-6 J from local bits: ℓ = (E τ² / (ζ C³))^(1/3).
        let bits = |e: f64| (e * 0.01 / (1e-29 * 8e6)).cbrt();
        let local = [bits(2e-6), bits(6e-6)];
        let pw = uniform_power(&local, &[0.0; 2], 1e-4, G, &p).unwrap();
        assert_relative_eq!(pw[0], 8e-6 / (2.0 * 3e-6), max_relative = 1e-10);
        assert_eq!(pw[0], pw[1]);
    }

    #[test]
    fn uniform_power_meets_total_demand() {
        let p = params(4);
        let tasks = TaskTrace::from_arrivals(vec![1e5, 5e5, 0.0, 2e5]).unwrap();
        let sol = solve_static(&tasks, H, G, &p, SolveMode::Joint).unwrap();
        let harvested: f64 = sol
            .plan
            .power
            .iter()
            .map(|pw| p.slot_len * p.eh_efficiency * H * pw)
            .sum();
        let consumed: f64 = sol
            .plan
            .local_bits
            .iter()
            .zip(&sol.plan.offl_bits)
            .map(|(l, d)| p.slot_energy_raw(*l, *d, G))
            .sum();
        assert_relative_eq!(harvested, consumed, max_relative = 1e-12);
    }

    #[test]
    fn restricted_modes_zero_the_other_branch() {
        let p = params(3);
        let tasks = TaskTrace::from_arrivals(vec![2e5, 3e5, 1e5]).unwrap();
        let local = solve_static(&tasks, H, G, &p, SolveMode::LocalOnly).unwrap();
        assert!(local.plan.offl_bits.iter().all(|d| *d == 0.0));
        let avg = 2e5;
        for l in &local.plan.local_bits {
            assert_relative_eq!(*l, avg, max_relative = 1e-10);
        }
        let off = solve_static(&tasks, H, G, &p, SolveMode::OffloadOnly).unwrap();
        assert!(off.plan.local_bits.iter().all(|l| *l == 0.0));
    }

    #[test]
    fn length_mismatch_is_rejected() {
        let tasks = TaskTrace::from_arrivals(vec![1.0; 2]).unwrap();
        assert!(matches!(
            solve_static(&tasks, H, G, &params(3), SolveMode::Joint),
            Err(Error::LengthMismatch { .. })
        ));
    }
}
