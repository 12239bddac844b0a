//! Causal policies that re-plan the remaining horizon every slot.
//!
//! At slot `i` the policy treats the backlog plus the new arrival as the
//! first slot's workload, forecasts every later slot with the known means,
//! solves the offline problem over slots `i..N` and commits only slot `i`.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::model::{AllocationPlan, ChannelTrace, SolveMode, SystemParams, TaskTrace};
use crate::offline_fading::fading_first_slot;
use crate::offline_static::static_first_slot;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum OnlinePolicy {
    /// Gains known and fixed; power equals this slot's consumption.
    Static,
    /// Gains revealed slot by slot; power follows the threshold rule.
    TimeVarying,
}

/// Means the policy may use for forecasting.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Forecast {
    pub mean_wpt: f64,
    pub mean_offl: f64,
    pub mean_arrival: f64,
}

impl Forecast {
    pub fn from_traces(tasks: &TaskTrace, channels: &ChannelTrace) -> Self {
        Self {
            mean_wpt: channels.mean_wpt,
            mean_offl: channels.mean_offl,
            mean_arrival: tasks.mean_arrival,
        }
    }
}

/// Decision for one slot.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct SlotAction {
    pub power: f64,
    pub local: f64,
    pub offl: f64,
}

/// Buffer and battery state carried between slots of one run.
#[derive(Debug, Clone, PartialEq)]
pub struct OnlineState {
    /// Zero-based index of the next slot to decide.
    pub slot: usize,
    /// Backlog of bits at the start of `slot`.
    pub residual_bits: f64,
    /// Stored energy at the start of `slot`.
    pub residual_energy: f64,
    arrived: f64,
    pub plan: AllocationPlan,
}

impl OnlineState {
    pub fn new() -> Self {
        Self {
            slot: 0,
            residual_bits: 0.0,
            residual_energy: 0.0,
            arrived: 0.0,
            plan: AllocationPlan::default(),
        }
    }

    /// Applies `action` to the buffer and battery and appends it to the plan.
    pub fn commit(&mut self, action: SlotAction, arrival: f64, h: f64, g: f64, params: &SystemParams) -> Result<()> {
        self.arrived += arrival;
        let bits_tol = 1e-9 * self.arrived;
        let mut residual = self.residual_bits + arrival - action.local - action.offl;
        if residual < -bits_tol {
            return Err(Error::Policy {
                slot: self.slot,
                detail: format!("executed more bits than buffered (residual {residual})"),
            });
        }
        if residual < 0.0 {
            residual = 0.0;
        }

        let harvested = params.slot_len * params.eh_efficiency * h * action.power;
        let consumed = params.slot_energy_raw(action.local, action.offl, g);
        let energy = self.residual_energy + harvested - consumed;
        if energy < -1e-9 * (harvested + consumed + self.residual_energy) {
            return Err(Error::Policy {
                slot: self.slot,
                detail: format!("battery drained below zero ({energy} J)"),
            });
        }

        self.residual_bits = residual;
        self.residual_energy = energy.max(0.0);
        self.plan.power.push(action.power);
        self.plan.local_bits.push(action.local);
        self.plan.offl_bits.push(action.offl);
        self.slot += 1;
        Ok(())
    }
}

impl Default for OnlineState {
    fn default() -> Self {
        Self::new()
    }
}

fn forecast_arrivals(state: &OnlineState, arrival: f64, mean_arrival: f64, params: &SystemParams) -> Vec<f64> {
    let remaining = params.num_slots - state.slot;
    let mut a = vec![mean_arrival; remaining];
    a[0] = arrival + state.residual_bits;
    a
}

fn last_slot(state: &OnlineState, params: &SystemParams) -> bool {
    state.slot + 1 == params.num_slots
}

pub fn online_static_step(
    state: &OnlineState,
    arrival: f64,
    h: f64,
    g: f64,
    params: &SystemParams,
    mean_arrival: f64,
    mode: SolveMode,
) -> Result<SlotAction> {
    let arrivals = forecast_arrivals(state, arrival, mean_arrival, params);
    let (local, offl) = static_first_slot(&arrivals, h, g, params, mode)?;
    let demand = params.slot_energy_raw(local, offl, g);
    Ok(SlotAction {
        power: demand / (params.slot_len * params.eh_efficiency * h),
        local,
        offl,
    })
}

pub fn online_fading_step(
    state: &OnlineState,
    arrival: f64,
    h: f64,
    g: f64,
    params: &SystemParams,
    forecast: &Forecast,
    mode: SolveMode,
) -> Result<SlotAction> {
    let arrivals = forecast_arrivals(state, arrival, forecast.mean_arrival, params);
    let remaining = arrivals.len();
    let mut h_eff = vec![h.max(forecast.mean_wpt); remaining];
    h_eff[0] = h;
    let mut g_fc = vec![forecast.mean_offl; remaining];
    g_fc[0] = g;
    let (local, offl) = fading_first_slot(&arrivals, &h_eff, &g_fc, params, mode)?;

    let demand = params.slot_energy_raw(local, offl, g);
    let wanted = if !last_slot(state, params) && h > forecast.mean_wpt {
        params.online_gamma * demand
    } else {
        demand
    };
    let power = (wanted - state.residual_energy).max(0.0) / (params.slot_len * params.eh_efficiency * h);
    Ok(SlotAction { power, local, offl })
}

/// Runs a policy over full traces, revealing them one slot at a time.
pub fn run_online(
    policy: OnlinePolicy,
    tasks: &TaskTrace,
    channels: &ChannelTrace,
    params: &SystemParams,
    mode: SolveMode,
) -> Result<AllocationPlan> {
    for (what, len) in [("arrivals", tasks.len()), ("channel gains", channels.len())] {
        if len != params.num_slots {
            return Err(Error::LengthMismatch {
                what,
                expected: params.num_slots,
                actual: len,
            });
        }
    }
    let forecast = Forecast::from_traces(tasks, channels);
    let mut state = OnlineState::new();
    for i in 0..params.num_slots {
        let (a, h, g) = (tasks.arrivals[i], channels.wpt_gain[i], channels.offl_gain[i]);
        let action = match policy {
            OnlinePolicy::Static => online_static_step(&state, a, h, g, params, forecast.mean_arrival, mode)?,
            OnlinePolicy::TimeVarying => online_fading_step(&state, a, h, g, params, &forecast, mode)?,
        };
        state.commit(action, a, h, g, params)?;
    }
    if state.residual_bits > 1e-9 * (1.0 + tasks.total()) {
        return Err(Error::Policy {
            slot: params.num_slots - 1,
            detail: format!("{} bits left unexecuted", state.residual_bits),
        });
    }
    Ok(state.plan)
}
