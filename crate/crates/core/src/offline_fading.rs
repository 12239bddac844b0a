//! Offline-optimal schedule for time-varying channels.
//!
//! Energy is only ever sent in causality dominating slots (CDSs), the slots
//! whose WPT gain beats every earlier gain, and each CDS delivers exactly the
//! demand of the slots up to the next CDS. With that placement the problem
//! reduces to a weighted task allocation over effective gains `h'` (running
//! maxima of `h`), solved by a forward search over transition slots where
//! each candidate interval is a single-level water-filling subproblem.

use std::ops::Range;

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::model::{
    solve_level, split_at_level, AllocationPlan, ChannelTrace, ComputationLevel, SlotGains, SolveMode, SystemParams,
    TaskTrace,
};
use crate::offline_static::TransitionSchedule;

/// CDS positions (zero-based) and the effective gain of every slot.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CdsDecomposition {
    pub cds_slots: Vec<usize>,
    pub effective_gains: Vec<f64>,
}

impl CdsDecomposition {
    /// Slot ranges served by each CDS.
    pub fn intervals(&self) -> impl Iterator<Item = Range<usize>> + '_ {
        let n = self.effective_gains.len();
        self.cds_slots
            .iter()
            .enumerate()
            .map(move |(k, &start)| start..self.cds_slots.get(k + 1).copied().unwrap_or(n))
    }

    pub fn is_cds(&self, slot: usize) -> bool {
        self.cds_slots.binary_search(&slot).is_ok()
    }
}

pub fn compute_cds(h: &[f64]) -> Result<CdsDecomposition> {
    if h.is_empty() {
        return domain("CDS decomposition needs at least one slot");
    }
    if let Some(v) = h.iter().find(|v| !(v.is_finite() && **v > 0.0)) {
        return domain(format!("wpt gains must be finite and > 0, got {v}"));
    }
    let mut cds_slots = vec![0];
    let mut effective_gains = Vec::with_capacity(h.len());
    let mut best = h[0];
    for (i, &hi) in h.iter().enumerate() {
        // Equal gain is not a new CDS; energy stays with the earlier slot.
        if hi > best {
            best = hi;
            cds_slots.push(i);
        }
        effective_gains.push(best);
    }
    Ok(CdsDecomposition {
        cds_slots,
        effective_gains,
    })
}

/// Solution of one interval subproblem.
#[derive(Debug, Clone, PartialEq)]
pub struct IntervalSolution {
    pub local: Vec<f64>,
    pub offl: Vec<f64>,
    pub level: ComputationLevel,
    /// `Σ (E_loc + E_offl) / (η h')` over the interval.
    pub weighted_energy: f64,
}

/// Minimum weighted energy of executing every arrival in `range` within that
/// range, ignoring task causality inside it.
pub fn solve_interval(
    range: Range<usize>,
    arrivals: &[f64],
    h_eff: &[f64],
    g: &[f64],
    params: &SystemParams,
    mode: SolveMode,
) -> Result<IntervalSolution> {
    if range.is_empty() || range.end > arrivals.len() || h_eff.len() != arrivals.len() || g.len() != arrivals.len() {
        return domain(format!("invalid interval {range:?} for {} slots", arrivals.len()));
    }
    let slots: Vec<SlotGains> = range
        .clone()
        .map(|j| SlotGains {
            h_eff: h_eff[j],
            g: g[j],
        })
        .collect();
    let target: f64 = arrivals[range.clone()].iter().sum();
    let level = solve_level(target, &slots, params, mode)?;
    let mut local = Vec::with_capacity(slots.len());
    let mut offl = Vec::with_capacity(slots.len());
    let mut weighted_energy = 0.0;
    for s in &slots {
        let (l, d) = split_at_level(level, *s, params, mode);
        weighted_energy += params.slot_energy_raw(l, d, s.g) / (params.eh_efficiency * s.h_eff);
        local.push(l);
        offl.push(d);
    }
    Ok(IntervalSolution {
        local,
        offl,
        level,
        weighted_energy,
    })
}

fn causality_tolerance(arrivals: &[f64]) -> f64 {
    1e-9 * (1.0 + arrivals.iter().sum::<f64>())
}

fn respects_causality(sol: &IntervalSolution, arrivals: &[f64], tol: f64) -> bool {
    let mut executed = 0.0;
    let mut arrived = 0.0;
    for ((l, d), a) in sol.local.iter().zip(&sol.offl).zip(arrivals) {
        executed += l + d;
        arrived += a;
        if executed > arrived + tol {
            return false;
        }
    }
    true
}

/// Longest causal interval starting at `start` and its solution.
fn next_interval(
    start: usize,
    arrivals: &[f64],
    h_eff: &[f64],
    g: &[f64],
    params: &SystemParams,
    mode: SolveMode,
) -> Result<(usize, IntervalSolution)> {
    let n = arrivals.len();
    let mut chosen = None;
    for end in start + 1..=n {
        let tol = causality_tolerance(&arrivals[start..end]);
        let sol = solve_interval(start..end, arrivals, h_eff, g, params, mode)?;
        if respects_causality(&sol, &arrivals[start..end], tol) {
            chosen = Some((end, sol));
        }
    }
    // A single-slot interval always executes exactly its own arrival.
    chosen.ok_or_else(|| Error::Domain(format!("no causal interval starting at slot {start}")))
}

/// Weighted task allocation over effective gains `h_eff` (already running
/// maxima): `(local, offloaded, schedule)`.
pub fn fading_task_allocation(
    arrivals: &[f64],
    h_eff: &[f64],
    g: &[f64],
    params: &SystemParams,
    mode: SolveMode,
) -> Result<(Vec<f64>, Vec<f64>, TransitionSchedule)> {
    let n = arrivals.len();
    let mut local = Vec::with_capacity(n);
    let mut offl = Vec::with_capacity(n);
    let mut schedule = TransitionSchedule::default();
    let mut start = 0;
    while start < n {
        let (end, sol) = next_interval(start, arrivals, h_eff, g, params, mode)?;
        local.extend(sol.local);
        offl.extend(sol.offl);
        schedule.transition_slots.push(end);
        schedule.levels.push(sol.level);
        start = end;
    }
    Ok((local, offl, schedule))
}

/// First-slot allocation of the weighted staircase.
pub(crate) fn fading_first_slot(
    arrivals: &[f64],
    h_eff: &[f64],
    g: &[f64],
    params: &SystemParams,
    mode: SolveMode,
) -> Result<(f64, f64)> {
    let (_, sol) = next_interval(0, arrivals, h_eff, g, params, mode)?;
    Ok((sol.local[0], sol.offl[0]))
}

#[derive(Debug, Clone, PartialEq)]
pub struct FadingSolution {
    pub plan: AllocationPlan,
    pub schedule: TransitionSchedule,
    pub cds: CdsDecomposition,
}

/// Optimal offline plan for time-varying channels.
pub fn solve_fading(
    tasks: &TaskTrace,
    channels: &ChannelTrace,
    params: &SystemParams,
    mode: SolveMode,
) -> Result<FadingSolution> {
    for (what, len) in [("arrivals", tasks.len()), ("channel gains", channels.len())] {
        if len != params.num_slots {
            return Err(Error::LengthMismatch {
                what,
                expected: params.num_slots,
                actual: len,
            });
        }
    }
    let cds = compute_cds(&channels.wpt_gain)?;
    let (local, offl, schedule) =
        fading_task_allocation(&tasks.arrivals, &cds.effective_gains, &channels.offl_gain, params, mode)?;
    let power = cds_power_with(&local, &offl, channels, &cds, params);
    Ok(FadingSolution {
        plan: AllocationPlan {
            power,
            local_bits: local,
            offl_bits: offl,
        },
        schedule,
        cds,
    })
}

/// Optimal ET power for a given task allocation: each CDS harvests exactly the
/// demand of its interval; every other slot gets nothing.
pub fn cds_power(local: &[f64], offl: &[f64], channels: &ChannelTrace, params: &SystemParams) -> Result<Vec<f64>> {
    if local.len() != channels.len() || offl.len() != channels.len() {
        return Err(Error::LengthMismatch {
            what: "task allocation",
            expected: channels.len(),
            actual: local.len().min(offl.len()),
        });
    }
    let cds = compute_cds(&channels.wpt_gain)?;
    Ok(cds_power_with(local, offl, channels, &cds, params))
}

fn cds_power_with(
    local: &[f64],
    offl: &[f64],
    channels: &ChannelTrace,
    cds: &CdsDecomposition,
    params: &SystemParams,
) -> Vec<f64> {
    let mut power = vec![0.0; local.len()];
    for range in cds.intervals() {
        let phi = range.start;
        let demand: f64 = range
            .map(|j| params.slot_energy_raw(local[j], offl[j], channels.offl_gain[j]))
            .sum();
        power[phi] = demand / (params.slot_len * params.eh_efficiency * channels.wpt_gain[phi]);
    }
    power
}
