//! System model: physical parameters, traces, allocation plans, the per-slot
//! energy laws and the closed-form allocations parameterized by the
//! computation level.
//!
//! A *computation level* is the marginal weighted energy per executed bit.
//! Given a level `ν` and the effective WPT gain `h'` of a slot, the
//! energy-minimizing split of that slot's bits is
//!
//! ```text
//! local(ν)   = τ · sqrt(η h' [ν]⁺ / (3 ζ C³))
//! offload(ν) = τ B · log2(max(ν / ν₀, 1)),    ν₀ = Γ σ² ln2 / (B η h' g)
//! ```
//!
//! so a single scalar parameterizes every slot of a transition interval.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};

/// Physical constants of the single-user wireless-powered MEC link.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SystemParams {
    /// Slot duration τ in seconds.
    pub slot_len: f64,
    /// Offloading bandwidth B in Hz.
    pub bandwidth: f64,
    /// Receiver noise power σ² at the AP, in watts.
    pub noise_power: f64,
    /// RF-to-DC conversion efficiency η.
    pub eh_efficiency: f64,
    /// Effective switched capacitance ζ.
    pub cap_coeff: f64,
    /// CPU cycles per task input-bit C.
    pub cycles_per_bit: f64,
    /// Number of slots N in the horizon.
    pub num_slots: usize,
    /// Over-provisioning factor γ of the time-varying online power rule.
    pub online_gamma: f64,
    /// SNR gap Γ of the modulation and coding scheme.
    pub snr_gap: f64,
}

impl Default for SystemParams {
    fn default() -> Self {
        Self {
            slot_len: 0.1,
            bandwidth: 1e6,
            noise_power: 1e-9,
            eh_efficiency: 0.3,
            cap_coeff: 1e-29,
            cycles_per_bit: 200.0,
            num_slots: 50,
            online_gamma: 2.0,
            snr_gap: 1.0,
        }
    }
}

impl SystemParams {
    pub fn with_num_slots(&self, num_slots: usize) -> Self {
        Self { num_slots, ..*self }
    }

    pub fn validate(&self) -> Result<()> {
        let positive = [
            ("slot_len", self.slot_len),
            ("bandwidth", self.bandwidth),
            ("noise_power", self.noise_power),
            ("cap_coeff", self.cap_coeff),
            ("cycles_per_bit", self.cycles_per_bit),
        ];
        for (name, value) in positive {
            if !(value.is_finite() && value > 0.0) {
                return domain(format!("{name} must be finite and > 0, got {value}"));
            }
        }
        if !(self.eh_efficiency > 0.0 && self.eh_efficiency <= 1.0) {
            return domain(format!("eh_efficiency must lie in (0, 1], got {}", self.eh_efficiency));
        }
        if self.num_slots == 0 {
            return domain("num_slots must be at least 1");
        }
        if !(self.online_gamma.is_finite() && self.online_gamma > 1.0) {
            return domain(format!("online_gamma must be > 1, got {}", self.online_gamma));
        }
        if !(self.snr_gap.is_finite() && self.snr_gap >= 1.0) {
            return domain(format!("snr_gap must be >= 1, got {}", self.snr_gap));
        }
        Ok(())
    }

    fn local_coeff(&self) -> f64 {
        self.cap_coeff * self.cycles_per_bit.powi(3) / (self.slot_len * self.slot_len)
    }

    /// Local-computing energy `ζ C³ ℓ³ / τ²` without argument checks.
    #[inline]
    pub(crate) fn local_energy_raw(&self, bits: f64) -> f64 {
        self.local_coeff() * bits * bits * bits
    }

    /// Offloading energy `(τ Γ σ² / g)(2^{d/(τB)} − 1)` without argument checks.
    #[inline]
    pub(crate) fn offload_energy_raw(&self, bits: f64, gain: f64) -> f64 {
        let exponent = bits / (self.slot_len * self.bandwidth);
        self.slot_len * self.snr_gap * self.noise_power / gain * (exponent * std::f64::consts::LN_2).exp_m1()
    }

    /// Total user consumption of one slot.
    #[inline]
    pub(crate) fn slot_energy_raw(&self, local: f64, offl: f64, gain: f64) -> f64 {
        self.local_energy_raw(local) + self.offload_energy_raw(offl, gain)
    }
}

/// Per-slot arrived task input-bits.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TaskTrace {
    pub arrivals: Vec<f64>,
    /// Mean arrival per slot; only the online policies look at it.
    pub mean_arrival: f64,
}

impl TaskTrace {
    pub fn new(arrivals: Vec<f64>, mean_arrival: f64) -> Result<Self> {
        if let Some(a) = arrivals.iter().find(|a| !(a.is_finite() && **a >= 0.0)) {
            return domain(format!("arrivals must be finite and >= 0, got {a}"));
        }
        if !(mean_arrival.is_finite() && mean_arrival >= 0.0) {
            return domain(format!("mean_arrival must be >= 0, got {mean_arrival}"));
        }
        Ok(Self { arrivals, mean_arrival })
    }

    /// Trace whose forecast mean is the empirical mean of the arrivals.
    pub fn from_arrivals(arrivals: Vec<f64>) -> Result<Self> {
        let mean = if arrivals.is_empty() {
            0.0
        } else {
            arrivals.iter().sum::<f64>() / arrivals.len() as f64
        };
        Self::new(arrivals, mean)
    }

    pub fn len(&self) -> usize {
        self.arrivals.len()
    }

    pub fn is_empty(&self) -> bool {
        self.arrivals.is_empty()
    }

    pub fn total(&self) -> f64 {
        self.arrivals.iter().sum()
    }
}

/// Per-slot WPT gains `h_i` and offloading gains `g_i`, plus their means.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ChannelTrace {
    pub wpt_gain: Vec<f64>,
    pub offl_gain: Vec<f64>,
    pub mean_wpt: f64,
    pub mean_offl: f64,
}

impl ChannelTrace {
    pub fn new(wpt_gain: Vec<f64>, offl_gain: Vec<f64>, mean_wpt: f64, mean_offl: f64) -> Result<Self> {
        if wpt_gain.len() != offl_gain.len() {
            return Err(Error::LengthMismatch {
                what: "offloading gains",
                expected: wpt_gain.len(),
                actual: offl_gain.len(),
            });
        }
        for (name, v) in wpt_gain
            .iter()
            .map(|v| ("wpt gain", *v))
            .chain(offl_gain.iter().map(|v| ("offloading gain", *v)))
            .chain([("mean wpt gain", mean_wpt), ("mean offloading gain", mean_offl)])
        {
            if !(v.is_finite() && v > 0.0) {
                return domain(format!("{name} must be finite and > 0, got {v}"));
            }
        }
        Ok(Self {
            wpt_gain,
            offl_gain,
            mean_wpt,
            mean_offl,
        })
    }

    /// Static channel held for `n` slots; the means equal the gains.
    pub fn constant(h: f64, g: f64, n: usize) -> Result<Self> {
        Self::new(vec![h; n], vec![g; n], h, g)
    }

    /// Trace whose means are the empirical means of the gains.
    pub fn from_gains(wpt_gain: Vec<f64>, offl_gain: Vec<f64>) -> Result<Self> {
        let n = wpt_gain.len().max(1) as f64;
        let mh = wpt_gain.iter().sum::<f64>() / n;
        let mg = offl_gain.iter().sum::<f64>() / n;
        Self::new(wpt_gain, offl_gain, mh, mg)
    }

    pub fn len(&self) -> usize {
        self.wpt_gain.len()
    }

    pub fn is_empty(&self) -> bool {
        self.wpt_gain.is_empty()
    }
}

/// Per-slot decisions: ET transmit power `p_i`, local bits `ℓ_i`, offloaded bits `d_i`.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
pub struct AllocationPlan {
    pub power: Vec<f64>,
    pub local_bits: Vec<f64>,
    pub offl_bits: Vec<f64>,
}

impl AllocationPlan {
    pub fn zeros(n: usize) -> Self {
        Self {
            power: vec![0.0; n],
            local_bits: vec![0.0; n],
            offl_bits: vec![0.0; n],
        }
    }

    pub fn len(&self) -> usize {
        self.power.len()
    }

    pub fn is_empty(&self) -> bool {
        self.power.is_empty()
    }

    /// Total ET transmission energy `Σ τ p_i`.
    pub fn total_energy(&self, params: &SystemParams) -> f64 {
        params.slot_len * self.power.iter().sum::<f64>()
    }

    /// Average ET transmission energy per slot, the reported figure of merit.
    pub fn energy_per_slot(&self, params: &SystemParams) -> f64 {
        if self.is_empty() {
            return 0.0;
        }
        self.total_energy(params) / self.len() as f64
    }

    /// User consumption `E_loc(ℓ_i) + E_offl(d_i)` of every slot.
    pub fn consumption(&self, channels: &ChannelTrace, params: &SystemParams) -> Vec<f64> {
        self.local_bits
            .iter()
            .zip(&self.offl_bits)
            .zip(&channels.offl_gain)
            .map(|((l, d), g)| params.slot_energy_raw(*l, *d, *g))
            .collect()
    }

    pub fn executed(&self) -> impl Iterator<Item = f64> + '_ {
        self.local_bits.iter().zip(&self.offl_bits).map(|(l, d)| l + d)
    }

    pub(crate) fn check_len(&self, n: usize) -> Result<()> {
        for (what, len) in [
            ("power", self.power.len()),
            ("local bits", self.local_bits.len()),
            ("offloaded bits", self.offl_bits.len()),
        ] {
            if len != n {
                return Err(Error::LengthMismatch {
                    what,
                    expected: n,
                    actual: len,
                });
            }
        }
        Ok(())
    }
}

/// Marginal weighted energy per executed bit (joules per bit).
#[derive(Debug, Clone, Copy, PartialEq, PartialOrd, Default, Serialize, Deserialize)]
pub struct ComputationLevel(pub f64);

impl ComputationLevel {
    pub const ZERO: Self = Self(0.0);

    pub fn value(self) -> f64 {
        self.0
    }
}

/// Which execution branches a solver may use.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SolveMode {
    #[default]
    Joint,
    LocalOnly,
    OffloadOnly,
}

impl SolveMode {
    pub fn uses_local(self) -> bool {
        self != SolveMode::OffloadOnly
    }

    pub fn uses_offload(self) -> bool {
        self != SolveMode::LocalOnly
    }
}

/// Static channels (one gain pair for the whole horizon) or time-varying ones.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Static,
    TimeVarying,
}

/// Effective WPT gain and offloading gain of one slot.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SlotGains {
    pub h_eff: f64,
    pub g: f64,
}

/// Energy of computing `bits` locally within one slot.
pub fn local_energy(bits: f64, params: &SystemParams) -> Result<f64> {
    if !(bits >= 0.0) {
        return domain(format!("local bits must be >= 0, got {bits}"));
    }
    Ok(params.local_energy_raw(bits))
}

/// Transmit energy of offloading `bits` within one slot over gain `gain`.
pub fn offload_energy(bits: f64, gain: f64, params: &SystemParams) -> Result<f64> {
    if !(bits >= 0.0) {
        return domain(format!("offloaded bits must be >= 0, got {bits}"));
    }
    if !(gain > 0.0) {
        return domain(format!("offloading gain must be > 0, got {gain}"));
    }
    Ok(params.offload_energy_raw(bits, gain))
}

/// Energy harvested in one slot when the ET transmits `power` over gain `gain`.
pub fn harvested_energy(power: f64, gain: f64, params: &SystemParams) -> Result<f64> {
    if !(power >= 0.0) {
        return domain(format!("power must be >= 0, got {power}"));
    }
    if !(gain > 0.0) {
        return domain(format!("wpt gain must be > 0, got {gain}"));
    }
    Ok(params.slot_len * params.eh_efficiency * gain * power)
}

/// Level below which offloading a slot is not worthwhile.
pub fn offload_threshold(h_eff: f64, g: f64, params: &SystemParams) -> f64 {
    params.snr_gap * params.noise_power * std::f64::consts::LN_2 / (params.bandwidth * params.eh_efficiency * h_eff * g)
}

pub fn local_bits_of_level(level: ComputationLevel, h_eff: f64, params: &SystemParams) -> f64 {
    let nu = level.0.max(0.0);
    params.slot_len
        * (params.eh_efficiency * h_eff * nu / (3.0 * params.cap_coeff * params.cycles_per_bit.powi(3))).sqrt()
}

pub fn offl_bits_of_level(level: ComputationLevel, h_eff: f64, g: f64, params: &SystemParams) -> f64 {
    let ratio = level.0 / offload_threshold(h_eff, g, params);
    if ratio > 1.0 {
        params.slot_len * params.bandwidth * ratio.log2()
    } else {
        0.0
    }
}

/// Inverse of [`local_bits_of_level`] for a positive bit count.
pub fn level_of_local_bits(bits: f64, h_eff: f64, params: &SystemParams) -> ComputationLevel {
    let x = bits / params.slot_len;
    ComputationLevel(3.0 * params.cap_coeff * params.cycles_per_bit.powi(3) * x * x / (params.eh_efficiency * h_eff))
}

/// Inverse of [`offl_bits_of_level`] for a positive bit count.
pub fn level_of_offl_bits(bits: f64, h_eff: f64, g: f64, params: &SystemParams) -> ComputationLevel {
    let exponent = bits / (params.slot_len * params.bandwidth);
    ComputationLevel(offload_threshold(h_eff, g, params) * exponent.exp2())
}

/// `(local, offloaded)` bits of one slot at `level` under `mode`.
#[inline]
pub fn split_at_level(level: ComputationLevel, slot: SlotGains, params: &SystemParams, mode: SolveMode) -> (f64, f64) {
    let l = if mode.uses_local() {
        local_bits_of_level(level, slot.h_eff, params)
    } else {
        0.0
    };
    let d = if mode.uses_offload() {
        offl_bits_of_level(level, slot.h_eff, slot.g, params)
    } else {
        0.0
    };
    (l, d)
}

/// Total bits executed over `slots` at a common level.
pub fn executed_bits_at_level(
    level: ComputationLevel,
    slots: &[SlotGains],
    params: &SystemParams,
    mode: SolveMode,
) -> f64 {
    slots
        .iter()
        .map(|s| {
            let (l, d) = split_at_level(level, *s, params, mode);
            l + d
        })
        .sum()
}

const LEVEL_SEED: f64 = 1e-12;
const LEVEL_REL_WIDTH: f64 = 1e-12;
const LEVEL_MAX_ITERS: usize = 300;
const LEVEL_MAX_DOUBLINGS: usize = 2100;

/// Finds the common level at which `slots` together execute `target_bits`.
///
/// The executed-bits map is continuous, non-decreasing, zero at level 0 and
/// unbounded, so the root exists; it is bracketed by doubling and then
/// bisected to a relative width of 1e-12.
pub fn solve_level(
    target_bits: f64,
    slots: &[SlotGains],
    params: &SystemParams,
    mode: SolveMode,
) -> Result<ComputationLevel> {
    if !(target_bits.is_finite() && target_bits >= 0.0) {
        return domain(format!("target bits must be finite and >= 0, got {target_bits}"));
    }
    if slots.is_empty() {
        return domain("level search needs at least one slot");
    }
    if target_bits == 0.0 {
        return Ok(ComputationLevel::ZERO);
    }
    let bits = |nu: f64| executed_bits_at_level(ComputationLevel(nu), slots, params, mode);

    let mut hi = LEVEL_SEED;
    let mut doublings = 0;
    while bits(hi) < target_bits {
        hi *= 2.0;
        doublings += 1;
        if doublings > LEVEL_MAX_DOUBLINGS || !hi.is_finite() {
            return Err(Error::Convergence {
                target: target_bits,
                iterations: doublings,
            });
        }
    }
    let mut lo = if doublings == 0 { 0.0 } else { hi / 2.0 };

    for _ in 0..LEVEL_MAX_ITERS {
        if hi - lo <= LEVEL_REL_WIDTH * hi {
            return Ok(ComputationLevel(0.5 * (lo + hi)));
        }
        let mid = 0.5 * (lo + hi);
        if bits(mid) < target_bits {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Err(Error::Convergence {
        target: target_bits,
        iterations: LEVEL_MAX_ITERS,
    })
}
