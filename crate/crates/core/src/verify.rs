//! Independent checks on plans: constraint feasibility, the structural
//! properties an optimal offline plan must show, and a brute-force grid
//! optimum for instances of at most three slots.
//!
//! Nothing here calls the solvers. The CDS set and effective gains are
//! recomputed locally, and the grid oracle minimizes energies directly
//! instead of going through computation levels.

use std::collections::HashMap;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::model::{
    level_of_local_bits, level_of_offl_bits, offload_threshold, AllocationPlan, ChannelKind, ChannelTrace, SolveMode,
    SystemParams, TaskTrace,
};
use crate::offline_static::TransitionSchedule;

/// Relative tolerance of the feasibility checks.
pub const FEASIBILITY_TOL: f64 = 1e-9;
/// Relative tolerance of the structural checks.
pub const STRUCTURE_TOL: f64 = 1e-8;

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Violation {
    pub check: &'static str,
    /// Zero-based slot index.
    pub slot: usize,
    pub slack: f64,
}

/// Per-slot slacks of the three constraint families. Negative slack means a
/// violation; `violation` records the first one beyond tolerance.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilityReport {
    /// Cumulative harvested minus cumulative consumed energy.
    pub energy_slack: Vec<f64>,
    /// Cumulative arrived minus cumulative executed bits.
    pub task_slack: Vec<f64>,
    /// Arrived minus executed bits over the whole horizon.
    pub completion_gap: f64,
    pub violation: Option<Violation>,
}

impl FeasibilityReport {
    pub fn passed(&self) -> bool {
        self.violation.is_none()
    }
}

pub fn check_feasible(
    plan: &AllocationPlan,
    tasks: &TaskTrace,
    channels: &ChannelTrace,
    params: &SystemParams,
) -> Result<FeasibilityReport> {
    let n = tasks.len();
    if channels.len() != n {
        return Err(Error::LengthMismatch {
            what: "channel gains",
            expected: n,
            actual: channels.len(),
        });
    }
    plan.check_len(n)?;

    let mut violation = None;
    let mut flag = |check, slot, slack| {
        if violation.is_none() {
            violation = Some(Violation { check, slot, slack });
        }
    };

    for i in 0..n {
        let worst = plan.power[i].min(plan.local_bits[i]).min(plan.offl_bits[i]);
        if !(worst >= 0.0) {
            flag("non_negativity", i, worst);
        }
    }

    let harvested: Vec<f64> = (0..n)
        .map(|i| params.slot_len * params.eh_efficiency * channels.wpt_gain[i] * plan.power[i])
        .collect();
    let consumed = plan.consumption(channels, params);
    let energy_scale = harvested.iter().sum::<f64>().max(consumed.iter().sum::<f64>());
    let energy_tol = FEASIBILITY_TOL * energy_scale;
    let total_arrived = tasks.total();
    let bits_tol = FEASIBILITY_TOL * (1.0 + total_arrived);

    let mut energy_slack = Vec::with_capacity(n);
    let mut task_slack = Vec::with_capacity(n);
    let (mut cum_h, mut cum_c, mut cum_a, mut cum_x) = (0.0, 0.0, 0.0, 0.0);
    for i in 0..n {
        cum_h += harvested[i];
        cum_c += consumed[i];
        cum_a += tasks.arrivals[i];
        cum_x += plan.local_bits[i] + plan.offl_bits[i];
        let es = cum_h - cum_c;
        let ts = cum_a - cum_x;
        if es < -energy_tol || es.is_nan() {
            flag("energy_causality", i, es);
        }
        if ts < -bits_tol || ts.is_nan() {
            flag("task_causality", i, ts);
        }
        energy_slack.push(es);
        task_slack.push(ts);
    }
    let completion_gap = cum_a - cum_x;
    if !(completion_gap.abs() <= bits_tol) && n > 0 {
        flag("task_completion", n - 1, completion_gap);
    }

    Ok(FeasibilityReport {
        energy_slack,
        task_slack,
        completion_gap,
        violation,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct CheckOutcome {
    pub name: &'static str,
    pub passed: bool,
    /// First offending zero-based slot, when the check is per-slot.
    pub slot: Option<usize>,
    pub detail: String,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub checks: Vec<CheckOutcome>,
}

impl StructureReport {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn failures(&self) -> impl Iterator<Item = &CheckOutcome> {
        self.checks.iter().filter(|c| !c.passed)
    }

    fn push(&mut self, name: &'static str, first_bad: Option<(usize, String)>) {
        let (passed, slot, detail) = match first_bad {
            None => (true, None, String::new()),
            Some((slot, detail)) => (false, Some(slot), detail),
        };
        self.checks.push(CheckOutcome {
            name,
            passed,
            slot,
            detail,
        });
    }
}

/// Running maximum of the WPT gains and the slots where it strictly rises.
fn dominating_slots(h: &[f64]) -> (Vec<f64>, Vec<usize>) {
    let mut eff = Vec::with_capacity(h.len());
    let mut slots = Vec::new();
    let mut best = f64::NEG_INFINITY;
    for (i, &v) in h.iter().enumerate() {
        if i == 0 || v > best {
            best = v;
            slots.push(i);
        }
        eff.push(best);
    }
    (eff, slots)
}

fn rel_close(a: f64, b: f64, tol: f64) -> bool {
    (a - b).abs() <= tol * a.abs().max(b.abs())
}

fn first_decrease(values: &[f64]) -> Option<(usize, String)> {
    let scale = values.iter().fold(0.0_f64, |m, v| m.max(v.abs()));
    values
        .windows(2)
        .enumerate()
        .find_map(|(i, w)| (w[1] < w[0] - STRUCTURE_TOL * scale).then(|| (i + 1, format!("{} after {}", w[1], w[0]))))
}

/// Structural properties of an offline-optimal plan.
///
/// Static channels: non-decreasing local and offloaded bits, buffer cleared
/// at transitions, consistent per-interval levels, total energy balance.
/// Time-varying channels: non-decreasing local bits, the offloading
/// threshold rule, power only at dominating slots with each one covering its
/// interval's demand, plus the common checks.
pub fn check_structure(
    plan: &AllocationPlan,
    schedule: &TransitionSchedule,
    tasks: &TaskTrace,
    channels: &ChannelTrace,
    params: &SystemParams,
    kind: ChannelKind,
    mode: SolveMode,
) -> Result<StructureReport> {
    let n = tasks.len();
    plan.check_len(n)?;
    if channels.len() != n {
        return Err(Error::LengthMismatch {
            what: "channel gains",
            expected: n,
            actual: channels.len(),
        });
    }
    let mut report = StructureReport { checks: Vec::new() };

    let ends = &schedule.transition_slots;
    let well_formed = ends.last() == Some(&n)
        && ends.windows(2).all(|w| w[0] < w[1])
        && ends.first().is_some_and(|e| *e > 0)
        && schedule.levels.len() == ends.len();
    report.push(
        "schedule_shape",
        (!well_formed).then(|| {
            (
                n.saturating_sub(1),
                format!("transitions {ends:?} with {} levels", schedule.levels.len()),
            )
        }),
    );
    if !well_formed {
        return Ok(report);
    }

    let (h_eff, cds) = match kind {
        ChannelKind::Static => (channels.wpt_gain.clone(), vec![0]),
        ChannelKind::TimeVarying => dominating_slots(&channels.wpt_gain),
    };

    report.push("staircase_local", first_decrease(&plan.local_bits));
    if kind == ChannelKind::Static {
        report.push("staircase_offload", first_decrease(&plan.offl_bits));
    }

    let levels: Vec<f64> = schedule.levels.iter().map(|l| l.0).collect();
    report.push(
        "level_monotone",
        levels.windows(2).enumerate().find_map(|(k, w)| {
            (w[1] < w[0] * (1.0 - STRUCTURE_TOL)).then(|| (ends[k], format!("level {} after {}", w[1], w[0])))
        }),
    );

    // Both closed forms must map the emitted bits back to the interval level.
    let level_of_slot = schedule.level_per_slot();
    let mut kkt_bad = None;
    for i in 0..n {
        let lvl = level_of_slot[i].0;
        let l = plan.local_bits[i];
        let d = plan.offl_bits[i];
        if l > 0.0 {
            let back = level_of_local_bits(l, h_eff[i], params).0;
            if !rel_close(back, lvl, STRUCTURE_TOL) {
                kkt_bad = Some((i, format!("local bits imply level {back}, interval level {lvl}")));
                break;
            }
        }
        if d > 0.0 {
            let back = level_of_offl_bits(d, h_eff[i], channels.offl_gain[i], params).0;
            if !rel_close(back, lvl, STRUCTURE_TOL) {
                kkt_bad = Some((i, format!("offloaded bits imply level {back}, interval level {lvl}")));
                break;
            }
        }
        if mode.uses_local() && l == 0.0 && lvl > 0.0 {
            kkt_bad = Some((i, format!("no local bits at positive level {lvl}")));
            break;
        }
    }
    report.push("kkt_levels", kkt_bad);

    if kind == ChannelKind::TimeVarying && mode.uses_offload() {
        let wf = (0..n).find_map(|i| {
            let nu0 = offload_threshold(h_eff[i], channels.offl_gain[i], params);
            let lvl = level_of_slot[i].0;
            let d = plan.offl_bits[i];
            if d > 0.0 && lvl < nu0 * (1.0 - STRUCTURE_TOL) {
                Some((i, format!("offloads {d} bits below threshold ({lvl} < {nu0})")))
            } else if d == 0.0 && lvl > nu0 * (1.0 + STRUCTURE_TOL) {
                Some((i, format!("no offloading above threshold ({lvl} > {nu0})")))
            } else {
                None
            }
        });
        report.push("water_filling", wf);
    }

    let total_arrived = tasks.total();
    let bits_tol = STRUCTURE_TOL * (1.0 + total_arrived);
    let mut cum_a = vec![0.0; n + 1];
    let mut cum_x = vec![0.0; n + 1];
    for i in 0..n {
        cum_a[i + 1] = cum_a[i] + tasks.arrivals[i];
        cum_x[i + 1] = cum_x[i] + plan.local_bits[i] + plan.offl_bits[i];
    }
    report.push(
        "buffer_clearing",
        ends.iter().find_map(|&e| {
            let gap = cum_a[e] - cum_x[e];
            (gap.abs() > bits_tol).then(|| (e - 1, format!("{gap} bits left in buffer")))
        }),
    );

    let k = params.slot_len * params.eh_efficiency;
    let harvested: Vec<f64> = (0..n).map(|i| k * channels.wpt_gain[i] * plan.power[i]).collect();
    let consumed = plan.consumption(channels, params);

    if kind == ChannelKind::TimeVarying {
        report.push(
            "cds_only_power",
            (0..n)
                .find(|i| cds.binary_search(i).is_err() && plan.power[*i] != 0.0)
                .map(|i| (i, format!("power {} at non-dominating slot", plan.power[i]))),
        );
        let mut balance = None;
        for (idx, &phi) in cds.iter().enumerate() {
            let end = cds.get(idx + 1).copied().unwrap_or(n);
            let demand: f64 = consumed[phi..end].iter().sum();
            if !(rel_close(harvested[phi], demand, STRUCTURE_TOL) || (harvested[phi] == 0.0 && demand == 0.0)) {
                balance = Some((phi, format!("harvests {} J for {} J of demand", harvested[phi], demand)));
                break;
            }
        }
        report.push("cds_energy_balance", balance);
    }

    let total_h: f64 = harvested.iter().sum();
    let total_c: f64 = consumed.iter().sum();
    report.push(
        "energy_tightness",
        (!(rel_close(total_h, total_c, STRUCTURE_TOL) || (total_h == 0.0 && total_c == 0.0)))
            .then(|| (n - 1, format!("harvests {total_h} J, consumes {total_c} J"))),
    );

    Ok(report)
}

const GRID_POINTS: usize = 200;
const REFINEMENTS: usize = 2;
const SHRINK: f64 = 10.0;
/// Largest instance the grid oracle accepts.
pub const ORACLE_MAX_SLOTS: usize = 3;

/// Minimum energy of executing `bits` in one slot, weighted by `1/(η h')`.
fn slot_cost(bits: f64, h_eff: f64, g: f64, params: &SystemParams, mode: SolveMode) -> f64 {
    let weight = 1.0 / (params.eh_efficiency * h_eff);
    let energy = |local: f64| params.slot_energy_raw(local, bits - local, g);
    match mode {
        SolveMode::LocalOnly => weight * params.local_energy_raw(bits),
        SolveMode::OffloadOnly => weight * params.offload_energy_raw(bits, g),
        SolveMode::Joint => {
            if bits == 0.0 {
                return 0.0;
            }
            let (mut lo, mut hi) = (0.0, bits);
            let mut best = (f64::INFINITY, 0.0);
            for _ in 0..=REFINEMENTS {
                let step = (hi - lo) / (GRID_POINTS - 1) as f64;
                for j in 0..GRID_POINTS {
                    let x = (lo + j as f64 * step).min(bits);
                    let e = energy(x);
                    if e < best.0 {
                        best = (e, x);
                    }
                }
                let half = 0.5 * (hi - lo) / SHRINK;
                lo = (best.1 - half).max(0.0);
                hi = (best.1 + half).min(bits);
            }
            weight * best.0
        }
    }
}

/// Brute-force minimum of the total ET energy `Σ τ p_i` for `N ≤ 3`.
///
/// Power is eliminated in closed form (given the bits, the cheapest supply
/// delivers each slot's demand through the best gain seen so far), so the
/// search runs over the cumulative executed bits at the end of each slot on a
/// causal lattice, refined twice around the incumbent. Each slot's split
/// between local and offloaded bits is itself grid-searched.
pub fn grid_oracle(
    tasks: &TaskTrace,
    channels: &ChannelTrace,
    params: &SystemParams,
    mode: SolveMode,
    kind: ChannelKind,
) -> Result<f64> {
    let n = tasks.len();
    if n > ORACLE_MAX_SLOTS {
        return Err(Error::OracleTooLarge(n));
    }
    if channels.len() != n {
        return Err(Error::LengthMismatch {
            what: "channel gains",
            expected: n,
            actual: channels.len(),
        });
    }
    let total = tasks.total();
    if n == 0 || total == 0.0 {
        return Ok(0.0);
    }
    let h_eff = match kind {
        ChannelKind::Static => channels.wpt_gain.clone(),
        ChannelKind::TimeVarying => dominating_slots(&channels.wpt_gain).0,
    };
    let cost = |slot: usize, bits: f64| slot_cost(bits, h_eff[slot], channels.offl_gain[slot], params, mode);

    let mut cum_a = Vec::with_capacity(n);
    let mut acc = 0.0;
    for a in &tasks.arrivals {
        acc += a;
        cum_a.push(acc);
    }

    let free = n - 1;
    if free == 0 {
        return Ok(cost(0, total));
    }

    // Cumulative executed bits c_1..c_{n-1}; c_0 = 0 and c_n = total are fixed.
    let mut incumbent: Vec<f64> = Vec::new();
    let mut best = f64::INFINITY;
    let mut step = total / (GRID_POINTS - 1) as f64;
    let mut offsets: Vec<i64> = (0..GRID_POINTS as i64).collect();
    let mut base = vec![0.0; free];

    for pass in 0..=REFINEMENTS {
        if pass > 0 {
            step /= SHRINK;
            let half = (GRID_POINTS / 2) as i64;
            offsets = (-half..GRID_POINTS as i64 - half).collect();
            base.clone_from(&incumbent);
        }
        let lattice: Vec<Vec<(i64, f64)>> = (0..free)
            .map(|k| {
                offsets
                    .iter()
                    .map(|&j| (j, base[k] + j as f64 * step))
                    .filter(|&(_, c)| c >= 0.0 && c <= cum_a[k])
                    .collect()
            })
            .collect();

        let mut search = LatticeSearch {
            lattice: &lattice,
            cost: &cost,
            total,
            memo: HashMap::new(),
            point: vec![(0, 0.0); free],
            best,
            incumbent: std::mem::take(&mut incumbent),
        };
        search.descend(0, 0.0);
        best = search.best;
        incumbent = search.incumbent;
    }
    Ok(best)
}

/// Depth-first walk over the causal lattice. Slot costs are memoized on the
/// lattice-index difference of consecutive cumulative points, which fixes the
/// slot's bit count within one pass.
struct LatticeSearch<'a, F> {
    lattice: &'a [Vec<(i64, f64)>],
    cost: &'a F,
    total: f64,
    memo: HashMap<(usize, i64), f64>,
    point: Vec<(i64, f64)>,
    best: f64,
    incumbent: Vec<f64>,
}

impl<F: Fn(usize, f64) -> f64> LatticeSearch<'_, F> {
    fn slot_cost(&mut self, slot: usize, key: i64, bits: f64) -> f64 {
        let cost = self.cost;
        *self.memo.entry((slot, key)).or_insert_with(|| cost(slot, bits))
    }

    fn descend(&mut self, depth: usize, partial: f64) {
        let (prev_j, prev) = if depth == 0 { (0, 0.0) } else { self.point[depth - 1] };
        if depth == self.lattice.len() {
            if self.total < prev {
                return;
            }
            let value = partial + self.slot_cost(depth, -prev_j, self.total - prev);
            if value < self.best {
                self.best = value;
                self.incumbent = self.point.iter().map(|p| p.1).collect();
            }
            return;
        }
        for idx in 0..self.lattice[depth].len() {
            let (j, c) = self.lattice[depth][idx];
            if c < prev {
                continue;
            }
            let value = partial + self.slot_cost(depth, j - prev_j, c - prev);
            if value >= self.best {
                continue;
            }
            self.point[depth] = (j, c);
            self.descend(depth + 1, value);
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::ComputationLevel;
    use approx::assert_relative_eq;

    fn params(n: usize) -> SystemParams {
        SystemParams::default().with_num_slots(n)
    }

    #[test]
    fn zero_plan_zero_arrivals_passes() {
        let p = params(3);
        let tasks = TaskTrace::from_arrivals(vec![0.0; 3]).unwrap();
        let ch = ChannelTrace::constant(3e-5, 6e-7, 3).unwrap();
        let rep = check_feasible(&AllocationPlan::zeros(3), &tasks, &ch, &p).unwrap();
        assert!(rep.passed());
        assert!(rep.energy_slack.iter().chain(&rep.task_slack).all(|s| *s == 0.0));
        assert_eq!(rep.completion_gap, 0.0);
    }

    #[test]
    fn early_execution_flagged_at_slot() {
        let p = params(3);
        let tasks = TaskTrace::from_arrivals(vec![0.0, 0.0, 2e5]).unwrap();
        let ch = ChannelTrace::constant(3e-5, 6e-7, 3).unwrap();
        let mut plan = AllocationPlan::zeros(3);
        plan.local_bits = vec![0.0, 1e5, 1e5];
        plan.power = vec![100.0; 3];
        let rep = check_feasible(&plan, &tasks, &ch, &p).unwrap();
        let v = rep.violation.unwrap();
        assert_eq!(v.check, "task_causality");
        assert_eq!(v.slot, 1);
    }

    #[test]
    fn energy_shortfall_flagged() {
        let p = params(2);
        let tasks = TaskTrace::from_arrivals(vec![1e5, 1e5]).unwrap();
        let ch = ChannelTrace::constant(3e-5, 6e-7, 2).unwrap();
        let mut plan = AllocationPlan::zeros(2);
        plan.local_bits = vec![1e5, 1e5];
        plan.power = vec![0.0, 10.0];
        let v = check_feasible(&plan, &tasks, &ch, &p).unwrap().violation.unwrap();
        assert_eq!((v.check, v.slot), ("energy_causality", 0));
    }

    #[test]
    fn incomplete_execution_flagged() {
        let p = params(2);
        let tasks = TaskTrace::from_arrivals(vec![1e5, 1e5]).unwrap();
        let ch = ChannelTrace::constant(3e-5, 6e-7, 2).unwrap();
        let mut plan = AllocationPlan::zeros(2);
        plan.local_bits = vec![1e5, 0.0];
        plan.power = vec![100.0, 0.0];
        let v = check_feasible(&plan, &tasks, &ch, &p).unwrap().violation.unwrap();
        assert_eq!((v.check, v.slot), ("task_completion", 1));
    }

    #[test]
    fn length_mismatch() {
        let p = params(2);
        let tasks = TaskTrace::from_arrivals(vec![1e5, 1e5]).unwrap();
        let ch = ChannelTrace::constant(3e-5, 6e-7, 2).unwrap();
        assert!(check_feasible(&AllocationPlan::zeros(3), &tasks, &ch, &p).is_err());
    }

    #[test]
    fn decreasing_local_bits_fail_staircase() {
        let p = params(2);
        let tasks = TaskTrace::from_arrivals(vec![2e5, 1e5]).unwrap();
        let ch = ChannelTrace::constant(3e-5, 6e-7, 2).unwrap();
        let mut plan = AllocationPlan::zeros(2);
        plan.local_bits = vec![2e5, 1e5];
        let schedule = TransitionSchedule {
            transition_slots: vec![1, 2],
            levels: vec![ComputationLevel(1.0), ComputationLevel(1.0)],
        };
        let rep = check_structure(
            &plan,
            &schedule,
            &tasks,
            &ch,
            &p,
            ChannelKind::Static,
            SolveMode::LocalOnly,
        )
        .unwrap();
        let bad: Vec<_> = rep.failures().map(|c| c.name).collect();
        assert!(bad.contains(&"staircase_local"), "{bad:?}");
    }

    #[test]
    fn oracle_refuses_large_instances() {
        let p = params(4);
        let tasks = TaskTrace::from_arrivals(vec![1.0; 4]).unwrap();
        let ch = ChannelTrace::constant(3e-5, 6e-7, 4).unwrap();
        assert!(matches!(
            grid_oracle(&tasks, &ch, &p, SolveMode::Joint, ChannelKind::Static),
            Err(Error::OracleTooLarge(4))
        ));
    }

    #[test]
    fn oracle_zero_and_single_slot() {
        let p = params(2);
        let ch = ChannelTrace::constant(1e-4, 1e-6, 2).unwrap();
        let zero = TaskTrace::from_arrivals(vec![0.0; 2]).unwrap();
        assert_eq!(
            grid_oracle(&zero, &ch, &p, SolveMode::Joint, ChannelKind::Static).unwrap(),
            0.0
        );

        let p1 = params(1);
        let one = TaskTrace::from_arrivals(vec![1e5]).unwrap();
        let ch1 = ChannelTrace::constant(1e-4, 1e-6, 1).unwrap();
        let v = grid_oracle(&one, &ch1, &p1, SolveMode::LocalOnly, ChannelKind::TimeVarying).unwrap();
        // E_loc(1e5) = 8e-6 J delivered through η h = 3e-5.
        assert_relative_eq!(v, 8e-6 / 3e-5, max_relative = 1e-12);
    }

    #[test]
    fn oracle_split_matches_scan() {
        // Fine independent scan of the one-slot split.
        let p = params(1);
        let (h, g, bits) = (3e-5, 6e-7, 4e5);
        let fine = (0..=200_000)
            .map(|j| {
                let l = bits * j as f64 / 200_000.0;
                p.slot_energy_raw(l, bits - l, g)
            })
            .fold(f64::INFINITY, f64::min);
        let v = slot_cost(bits, h, g, &p, SolveMode::Joint) * p.eh_efficiency * h;
        assert_relative_eq!(v, fine, max_relative = 1e-6);
    }
}
