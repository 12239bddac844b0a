//! Minimum-energy task and energy allocation for a wireless-powered mobile
//! edge computing user.
//!
//! A single-antenna user harvests RF energy from a multi-antenna energy
//! transmitter and either computes its bits locally with DVFS or offloads
//! them to an access point, slot by slot over a finite horizon. The crate
//! provides the offline optimal solvers for static and time-varying
//! channels, causal online policies, benchmark schemes, a random scenario
//! generator with a Monte Carlo harness, and independent verifiers.

// `!(x >= 0.0)` rejects NaN along with negatives.
#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod baselines;
pub mod cli;
pub mod error;
pub mod model;
pub mod offline_fading;
pub mod offline_static;
pub mod online;
pub mod scenario;
pub mod verify;

pub use error::{Error, Result};
pub use model::{
    AllocationPlan, ChannelKind, ChannelTrace, ComputationLevel, SlotGains, SolveMode, SystemParams, TaskTrace,
};
pub use offline_fading::{solve_fading, CdsDecomposition, FadingSolution};
pub use offline_static::{solve_static, StaticSolution, TransitionSchedule};
pub use online::{run_online, OnlinePolicy};
pub use scenario::{run_montecarlo, run_scheme, GeometryConfig, RngSpec, ScenarioConfig, Scheme};
pub use verify::{check_feasible, check_structure, grid_oracle};
