//! Random instances and the Monte Carlo harness.
//!
//! Channels follow a distance-dependent Rician model on the ET–user–AP line;
//! arrivals are i.i.d. uniform. Randomness comes from ChaCha20 seeded with a
//! 64-bit seed, with one stream per (replication, purpose): stream `2r`
//! draws the channels of replication `r` and stream `2r + 1` its arrivals.
//! Seeds and streams therefore reproduce traces bit for bit, and the traces
//! of a shorter horizon are prefixes of a longer one.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha20Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};

use crate::baselines::{full_offload, local_only, myopic};
use crate::error::{domain, Error, Result};
use crate::model::{AllocationPlan, ChannelKind, ChannelTrace, SolveMode, SystemParams, TaskTrace};
use crate::offline_fading::{solve_fading, CdsDecomposition};
use crate::offline_static::{solve_static, TransitionSchedule};
use crate::online::{run_online, OnlinePolicy};
use crate::verify::check_feasible;

/// Placement and propagation constants.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GeometryConfig {
    /// Distance between ET and AP in meters; the user sits on the segment.
    pub et_ap_distance: f64,
    /// Distance from the user to the ET in meters.
    pub user_distance: f64,
    /// Path loss at 1 m, in dB.
    pub pathloss_ref_db: f64,
    pub pathloss_exponent: f64,
    /// Rician factor; `f64::INFINITY` gives a pure line-of-sight channel.
    pub rician_factor: f64,
    pub num_antennas: usize,
}

impl Default for GeometryConfig {
    fn default() -> Self {
        Self {
            et_ap_distance: 10.0,
            user_distance: 3.0,
            pathloss_ref_db: -37.0,
            pathloss_exponent: 3.0,
            rician_factor: 2.0,
            num_antennas: 4,
        }
    }
}

impl GeometryConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.user_distance > 0.0 && self.user_distance < self.et_ap_distance) {
            return domain(format!(
                "user distance must lie in (0, {}), got {}",
                self.et_ap_distance, self.user_distance
            ));
        }
        if self.num_antennas == 0 {
            return domain("num_antennas must be at least 1");
        }
        if !(self.rician_factor >= 0.0) {
            return domain(format!("rician_factor must be >= 0, got {}", self.rician_factor));
        }
        Ok(())
    }

    fn pathloss(&self, distance: f64) -> f64 {
        10f64.powf(self.pathloss_ref_db / 10.0) * distance.powf(-self.pathloss_exponent)
    }

    /// Large-scale gain of the ET→user link.
    pub fn wpt_pathloss(&self) -> f64 {
        self.pathloss(self.user_distance)
    }

    /// Large-scale gain of the user→AP link.
    pub fn offl_pathloss(&self) -> f64 {
        self.pathloss(self.et_ap_distance - self.user_distance)
    }

    /// `E[h] = M Ω₀ d^-κ`.
    pub fn mean_wpt_gain(&self) -> f64 {
        self.num_antennas as f64 * self.wpt_pathloss()
    }

    /// `E[g] = Ω₀ (D − d)^-κ`.
    pub fn mean_offl_gain(&self) -> f64 {
        self.offl_pathloss()
    }

    /// Amplitude scales of the LoS and scattered components.
    fn rician_scales(&self, pathloss: f64) -> (f64, f64) {
        if self.rician_factor.is_infinite() {
            return (pathloss.sqrt(), 0.0);
        }
        let k = self.rician_factor;
        ((k * pathloss / (1.0 + k)).sqrt(), (pathloss / (1.0 + k)).sqrt())
    }
}

/// Seed plus stream selecting one reproducible random sequence.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct RngSpec {
    pub seed: u64,
    pub stream: u64,
}

impl RngSpec {
    pub fn rng(&self) -> ChaCha20Rng {
        let mut rng = ChaCha20Rng::seed_from_u64(self.seed);
        rng.set_stream(self.stream);
        rng
    }

    pub fn channel_stream(seed: u64, replication: u64) -> Self {
        Self {
            seed,
            stream: 2 * replication,
        }
    }

    pub fn task_stream(seed: u64, replication: u64) -> Self {
        Self {
            seed,
            stream: 2 * replication + 1,
        }
    }
}

/// Squared magnitude of `los + scatter · CN(0, 1)`.
fn rician_power(los: f64, scatter: f64, rng: &mut impl Rng) -> f64 {
    let half = std::f64::consts::FRAC_1_SQRT_2;
    let re: f64 = rng.sample(StandardNormal);
    let im: f64 = rng.sample(StandardNormal);
    let x = los + scatter * half * re;
    let y = scatter * half * im;
    x * x + y * y
}

fn draw_gains(geom: &GeometryConfig, rng: &mut impl Rng) -> (f64, f64) {
    let (h_los, h_sc) = geom.rician_scales(geom.wpt_pathloss());
    let h = (0..geom.num_antennas).map(|_| rician_power(h_los, h_sc, rng)).sum();
    let (g_los, g_sc) = geom.rician_scales(geom.offl_pathloss());
    let g = rician_power(g_los, g_sc, rng);
    (h, g)
}

/// Draws `n` slots of WPT power gains `‖ĥ‖²` (MRT over `M` antennas) and
/// offloading gains `|ĝ|²`. A static channel is drawn once and held.
pub fn gen_channels(geom: &GeometryConfig, n: usize, kind: ChannelKind, rng: &mut impl Rng) -> Result<ChannelTrace> {
    geom.validate()?;
    let (wpt, offl): (Vec<f64>, Vec<f64>) = match kind {
        ChannelKind::Static => {
            let (h, g) = draw_gains(geom, rng);
            (vec![h; n], vec![g; n])
        }
        ChannelKind::TimeVarying => (0..n).map(|_| draw_gains(geom, rng)).unzip(),
    };
    ChannelTrace::new(wpt, offl, geom.mean_wpt_gain(), geom.mean_offl_gain())
}

/// I.i.d. `U[0, a_max]` arrivals with forecast mean `a_max / 2`.
pub fn gen_tasks(a_max: f64, n: usize, rng: &mut impl Rng) -> Result<TaskTrace> {
    if !(a_max.is_finite() && a_max >= 0.0) {
        return domain(format!("a_max must be finite and >= 0, got {a_max}"));
    }
    let arrivals = (0..n).map(|_| a_max * rng.random::<f64>()).collect();
    TaskTrace::new(arrivals, a_max / 2.0)
}

/// The five schemes the harness can run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Scheme {
    Offline,
    Online,
    LocalOnly,
    FullOffload,
    Myopic,
}

impl Scheme {
    pub const ALL: [Scheme; 5] = [
        Scheme::Offline,
        Scheme::Online,
        Scheme::LocalOnly,
        Scheme::FullOffload,
        Scheme::Myopic,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Scheme::Offline => "offline",
            Scheme::Online => "online",
            Scheme::LocalOnly => "local_only",
            Scheme::FullOffload => "full_offload",
            Scheme::Myopic => "myopic",
        }
    }

    /// Solve mode of the offline solver, for schemes backed by one.
    pub fn offline_mode(self) -> Option<SolveMode> {
        match self {
            Scheme::Offline => Some(SolveMode::Joint),
            Scheme::LocalOnly => Some(SolveMode::LocalOnly),
            Scheme::FullOffload => Some(SolveMode::OffloadOnly),
            Scheme::Online | Scheme::Myopic => None,
        }
    }
}

impl fmt::Display for Scheme {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Scheme {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Scheme::ALL
            .into_iter()
            .find(|sc| sc.name() == s)
            .ok_or_else(|| Error::Domain(format!("unknown scheme '{s}'")))
    }
}

/// Plan plus whatever structure the producing solver exposes.
#[derive(Debug, Clone, PartialEq)]
pub struct SchemeOutput {
    pub plan: AllocationPlan,
    pub schedule: Option<TransitionSchedule>,
    pub cds: Option<CdsDecomposition>,
}

/// Runs `scheme` on one instance. Single-branch baselines are the offline
/// restricted solvers.
pub fn run_scheme(
    scheme: Scheme,
    kind: ChannelKind,
    tasks: &TaskTrace,
    channels: &ChannelTrace,
    params: &SystemParams,
) -> Result<SchemeOutput> {
    let bare = |plan| SchemeOutput {
        plan,
        schedule: None,
        cds: None,
    };
    match (scheme, scheme.offline_mode()) {
        (_, Some(mode)) => match kind {
            ChannelKind::Static => {
                if channels.is_empty() {
                    return domain("empty channel trace");
                }
                let sol = solve_static(tasks, channels.wpt_gain[0], channels.offl_gain[0], params, mode)?;
                Ok(SchemeOutput {
                    plan: sol.plan,
                    schedule: Some(sol.schedule),
                    cds: None,
                })
            }
            ChannelKind::TimeVarying => {
                let sol = solve_fading(tasks, channels, params, mode)?;
                Ok(SchemeOutput {
                    plan: sol.plan,
                    schedule: Some(sol.schedule),
                    cds: Some(sol.cds),
                })
            }
        },
        (Scheme::Online, None) => {
            let policy = match kind {
                ChannelKind::Static => OnlinePolicy::Static,
                ChannelKind::TimeVarying => OnlinePolicy::TimeVarying,
            };
            run_online(policy, tasks, channels, params, SolveMode::Joint).map(bare)
        }
        (Scheme::Myopic, None) => myopic(tasks, channels, params).map(bare),
        (Scheme::LocalOnly, None) => local_only(tasks, channels, params, kind, true).map(bare),
        (Scheme::FullOffload, None) => full_offload(tasks, channels, params, kind, true).map(bare),
        (Scheme::Offline, None) => unreachable!("offline scheme always has a mode"),
    }
}

/// Everything needed to generate instances.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub params: SystemParams,
    pub geometry: GeometryConfig,
    pub kind: ChannelKind,
    /// Largest per-slot arrival in bits.
    pub a_max: f64,
    pub seed: u64,
}

impl Default for ScenarioConfig {
    fn default() -> Self {
        Self {
            params: SystemParams::default(),
            geometry: GeometryConfig::default(),
            kind: ChannelKind::Static,
            a_max: 5e5,
            seed: 1,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Instance {
    pub tasks: TaskTrace,
    pub channels: ChannelTrace,
}

impl ScenarioConfig {
    pub fn validate(&self) -> Result<()> {
        self.params.validate()?;
        self.geometry.validate()?;
        if !(self.a_max.is_finite() && self.a_max >= 0.0) {
            return domain(format!("a_max must be finite and >= 0, got {}", self.a_max));
        }
        Ok(())
    }

    pub fn instance(&self, replication: u64) -> Result<Instance> {
        let n = self.params.num_slots;
        let mut ch_rng = RngSpec::channel_stream(self.seed, replication).rng();
        let channels = gen_channels(&self.geometry, n, self.kind, &mut ch_rng)?;
        let mut task_rng = RngSpec::task_stream(self.seed, replication).rng();
        let tasks = gen_tasks(self.a_max, n, &mut task_rng)?;
        Ok(Instance { tasks, channels })
    }
}

/// Outcome of one scheme on one replication.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ReplicationRow {
    pub replication: u64,
    pub scheme: Scheme,
    pub energy_per_slot: f64,
    pub feasible: bool,
    /// Number of transition intervals, for offline-solver schemes.
    pub transitions: Option<usize>,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SchemeSummary {
    pub scheme: Scheme,
    pub mean_energy_per_slot: f64,
    pub stderr: f64,
    pub reps: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct MonteCarloResult {
    pub rows: Vec<ReplicationRow>,
    pub summaries: Vec<SchemeSummary>,
}

impl MonteCarloResult {
    pub fn summary(&self, scheme: Scheme) -> Option<&SchemeSummary> {
        self.summaries.iter().find(|s| s.scheme == scheme)
    }

    pub fn mean(&self, scheme: Scheme) -> Option<f64> {
        self.summary(scheme).map(|s| s.mean_energy_per_slot)
    }

    /// Per-replication values of one scheme, in replication order.
    pub fn values(&self, scheme: Scheme) -> Vec<f64> {
        self.rows
            .iter()
            .filter(|r| r.scheme == scheme)
            .map(|r| r.energy_per_slot)
            .collect()
    }
}

/// Order-independent-rounding sum: split halves recursively.
pub fn pairwise_sum(values: &[f64]) -> f64 {
    match values.len() {
        0 => 0.0,
        1..=8 => values.iter().sum(),
        n => pairwise_sum(&values[..n / 2]) + pairwise_sum(&values[n / 2..]),
    }
}

fn mean_and_stderr(values: &[f64]) -> (f64, f64) {
    let n = values.len();
    if n == 0 {
        return (f64::NAN, f64::NAN);
    }
    let mean = pairwise_sum(values) / n as f64;
    if n == 1 {
        return (mean, 0.0);
    }
    let sq: Vec<f64> = values.iter().map(|v| (v - mean) * (v - mean)).collect();
    let var = pairwise_sum(&sq) / (n - 1) as f64;
    (mean, (var / n as f64).sqrt())
}

/// Runs every scheme on the same `reps` realizations. Any infeasible plan
/// aborts the run, naming its seed and stream.
pub fn run_montecarlo(config: &ScenarioConfig, schemes: &[Scheme], reps: usize) -> Result<MonteCarloResult> {
    config.validate()?;
    if schemes.is_empty() {
        return domain("at least one scheme is required");
    }
    let mut rows = Vec::with_capacity(reps * schemes.len());
    for rep in 0..reps as u64 {
        let inst = config.instance(rep)?;
        for &scheme in schemes {
            let out = run_scheme(scheme, config.kind, &inst.tasks, &inst.channels, &config.params)?;
            let report = check_feasible(&out.plan, &inst.tasks, &inst.channels, &config.params)?;
            if let Some(v) = report.violation {
                return Err(Error::Infeasible {
                    scheme: scheme.to_string(),
                    seed: config.seed,
                    stream: RngSpec::channel_stream(config.seed, rep).stream,
                    detail: format!("{} violated at slot {} (slack {})", v.check, v.slot + 1, v.slack),
                });
            }
            rows.push(ReplicationRow {
                replication: rep,
                scheme,
                energy_per_slot: out.plan.energy_per_slot(&config.params),
                feasible: true,
                transitions: out.schedule.map(|s| s.transition_slots.len()),
            });
        }
    }
    let summaries = schemes
        .iter()
        .map(|&scheme| {
            let values: Vec<f64> = rows
                .iter()
                .filter(|r| r.scheme == scheme)
                .map(|r| r.energy_per_slot)
                .collect();
            let (mean, stderr) = mean_and_stderr(&values);
            SchemeSummary {
                scheme,
                mean_energy_per_slot: mean,
                stderr,
                reps: values.len(),
            }
        })
        .collect();
    Ok(MonteCarloResult { rows, summaries })
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn los_limit_is_deterministic() {
        let geom = GeometryConfig {
            user_distance: 1.0,
            rician_factor: f64::INFINITY,
            ..GeometryConfig::default()
        };
        let mut rng = RngSpec { seed: 7, stream: 0 }.rng();
        let ch = gen_channels(&geom, 5, ChannelKind::TimeVarying, &mut rng).unwrap();
        let want = 4.0 * 10f64.powf(-3.7);
        assert_relative_eq!(want, 7.98105e-4, max_relative = 1e-5);
        for h in &ch.wpt_gain {
            assert_relative_eq!(*h, want, max_relative = 1e-12);
        }
    }

    #[test]
    fn wpt_gain_sample_mean() {
        let geom = GeometryConfig::default();
        let mut rng = RngSpec { seed: 11, stream: 3 }.rng();
        let ch = gen_channels(&geom, 100_000, ChannelKind::TimeVarying, &mut rng).unwrap();
        let mean_h = ch.wpt_gain.iter().sum::<f64>() / 1e5;
        let mean_g = ch.offl_gain.iter().sum::<f64>() / 1e5;
        assert_relative_eq!(mean_h, geom.mean_wpt_gain(), max_relative = 0.02);
        assert_relative_eq!(mean_g, geom.mean_offl_gain(), max_relative = 0.02);
        assert_eq!(ch.mean_wpt, geom.mean_wpt_gain());
    }

    #[test]
    fn static_channel_is_held() {
        let mut rng = RngSpec { seed: 3, stream: 0 }.rng();
        let ch = gen_channels(&GeometryConfig::default(), 10, ChannelKind::Static, &mut rng).unwrap();
        assert!(ch.wpt_gain.iter().all(|h| *h == ch.wpt_gain[0]));
        assert!(ch.offl_gain.iter().all(|g| *g == ch.offl_gain[0]));
    }

    #[test]
    fn task_generation() {
        let mut rng = RngSpec { seed: 5, stream: 1 }.rng();
        let zero = gen_tasks(0.0, 10, &mut rng).unwrap();
        assert!(zero.arrivals.iter().all(|a| *a == 0.0));

        let t = gen_tasks(5e5, 100_000, &mut rng).unwrap();
        assert!(t.arrivals.iter().all(|a| (0.0..=5e5).contains(a)));
        assert_relative_eq!(t.total() / 1e5, 2.5e5, max_relative = 0.02);
        assert_eq!(t.mean_arrival, 2.5e5);
        assert!(gen_tasks(-1.0, 3, &mut rng).is_err());
    }

    #[test]
    fn streams_reproduce_and_prefix() {
        let cfg = ScenarioConfig {
            kind: ChannelKind::TimeVarying,
            params: SystemParams::default().with_num_slots(20),
            ..ScenarioConfig::default()
        };
        let a = cfg.instance(4).unwrap();
        let b = cfg.instance(4).unwrap();
        assert_eq!(a, b);
        let short = ScenarioConfig {
            params: cfg.params.with_num_slots(5),
            ..cfg
        }
        .instance(4)
        .unwrap();
        assert_eq!(short.tasks.arrivals[..], a.tasks.arrivals[..5]);
        assert_eq!(short.channels.wpt_gain[..], a.channels.wpt_gain[..5]);
        assert_ne!(cfg.instance(5).unwrap(), a);
    }

    #[test]
    fn montecarlo_is_deterministic_and_ordered() {
        let cfg = ScenarioConfig {
            params: SystemParams::default().with_num_slots(8),
            ..ScenarioConfig::default()
        };
        let schemes = [Scheme::Offline, Scheme::Online];
        let r1 = run_montecarlo(&cfg, &schemes, 5).unwrap();
        let r2 = run_montecarlo(&cfg, &schemes, 5).unwrap();
        assert_eq!(r1, r2);
        assert!(r1.mean(Scheme::Offline).unwrap() <= r1.mean(Scheme::Online).unwrap());
        assert!(run_montecarlo(&cfg, &[], 1).is_err());
    }

    #[test]
    fn pairwise_sum_matches_plain_sum_on_integers() {
        let v: Vec<f64> = (1..=1000).map(f64::from).collect();
        assert_eq!(pairwise_sum(&v), 500_500.0);
        assert_eq!(pairwise_sum(&[]), 0.0);
    }

    #[test]
    fn scheme_names_roundtrip() {
        for s in Scheme::ALL {
            assert_eq!(s.name().parse::<Scheme>().unwrap(), s);
        }
        assert!("bogus".parse::<Scheme>().is_err());
    }
}
