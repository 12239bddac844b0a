//! Command-line front end: `solve`, `sweep` and `verify`.
//!
//! Configuration is a flat TOML file. Every key is optional and defaults to
//! the reference scenario:
//!
//! ```toml
//! slot_len = 0.1          # s
//! bandwidth = 1e6         # Hz
//! noise_power = 1e-9      # W
//! eh_efficiency = 0.3
//! cap_coeff = 1e-29       # effective capacitance coefficient
//! cycles_per_bit = 200
//! num_slots = 50
//! online_gamma = 2.0
//! snr_gap = 1.0
//! et_ap_distance = 10.0   # m
//! user_distance = 3.0     # m
//! pathloss_ref_db = -37.0 # dB at 1 m
//! pathloss_exponent = 3.0
//! rician_factor = 2.0     # inf for line of sight only
//! num_antennas = 4
//! kind = "static"         # or "time_varying"
//! a_max = 5e5             # bits
//! seed = 1
//! replication = 0
//! # optional explicit traces, overriding the generator:
//! # arrivals = [1e5, 2e5]
//! # wpt_gains = [1e-4, 2e-4]
//! # offl_gains = [1e-6, 1e-6]
//! ```
//!
//! Exit codes: 0 success, 2 configuration or usage error, 3 infeasible
//! output, 4 failed verification.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::error::Error;
use crate::model::{AllocationPlan, ChannelKind, ChannelTrace, SystemParams, TaskTrace};
use crate::scenario::{run_montecarlo, run_scheme, GeometryConfig, Instance, ScenarioConfig, Scheme};
use crate::verify::{check_feasible, check_structure, grid_oracle, FeasibilityReport, ORACLE_MAX_SLOTS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_INFEASIBLE: i32 = 3;
pub const EXIT_VERIFY: i32 = 4;

/// Largest relative gap tolerated between an offline solver and the oracle.
pub const ORACLE_GAP: f64 = 5e-3;

#[derive(Debug, Parser)]
#[command(
    name = "wpmec",
    version,
    about = "Energy and task allocation for a wireless-powered MEC user"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Run one scheme on one instance and write its per-slot trace.
    Solve(SolveArgs),
    /// Monte Carlo means over a swept parameter.
    Sweep(SweepArgs),
    /// Check a plan for feasibility, structure and, for tiny horizons, optimality.
    Verify(VerifyArgs),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum)]
pub enum Axis {
    /// Number of slots.
    N,
    /// Largest per-slot arrival.
    AMax,
    /// User distance from the ET.
    Distance,
}

#[derive(Debug, Args)]
pub struct Common {
    /// Flat TOML configuration file.
    #[arg(long)]
    pub config: Option<PathBuf>,
    /// Overrides the configured seed.
    #[arg(long)]
    pub seed: Option<u64>,
}

#[derive(Debug, Args)]
pub struct SolveArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "offline", value_parser = parse_scheme)]
    pub scheme: Scheme,
    /// Directory receiving `trace.csv` and `summary.json`. Without it the
    /// trace (csv) or the summary (json) goes to stdout.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct SweepArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, value_enum)]
    pub axis: Axis,
    /// Comma-separated axis values.
    #[arg(long)]
    pub values: String,
    /// Comma-separated schemes; all five when omitted.
    #[arg(long)]
    pub scheme: Option<String>,
    #[arg(long, default_value_t = 100)]
    pub reps: usize,
    /// Output file; stdout when omitted.
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value = "csv")]
    pub format: Format,
}

#[derive(Debug, Args)]
pub struct VerifyArgs {
    #[command(flatten)]
    pub common: Common,
    #[arg(long, default_value = "offline", value_parser = parse_scheme)]
    pub scheme: Scheme,
    /// Trace CSV (as written by `solve`) whose plan is checked instead of
    /// the scheme's own output.
    #[arg(long)]
    pub plan: Option<PathBuf>,
}

fn parse_scheme(s: &str) -> std::result::Result<Scheme, String> {
    s.parse().map_err(|e: Error| e.to_string())
}

/// Flat configuration file contents.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct FlatConfig {
    pub slot_len: f64,
    pub bandwidth: f64,
    pub noise_power: f64,
    pub eh_efficiency: f64,
    pub cap_coeff: f64,
    pub cycles_per_bit: f64,
    pub num_slots: Option<usize>,
    pub online_gamma: f64,
    pub snr_gap: f64,
    pub et_ap_distance: f64,
    pub user_distance: f64,
    pub pathloss_ref_db: f64,
    pub pathloss_exponent: f64,
    pub rician_factor: f64,
    pub num_antennas: usize,
    pub kind: ChannelKind,
    pub a_max: f64,
    pub seed: u64,
    pub replication: u64,
    pub arrivals: Option<Vec<f64>>,
    pub wpt_gains: Option<Vec<f64>>,
    pub offl_gains: Option<Vec<f64>>,
}

impl Default for FlatConfig {
    fn default() -> Self {
        let p = SystemParams::default();
        let g = GeometryConfig::default();
        let s = ScenarioConfig::default();
        Self {
            slot_len: p.slot_len,
            bandwidth: p.bandwidth,
            noise_power: p.noise_power,
            eh_efficiency: p.eh_efficiency,
            cap_coeff: p.cap_coeff,
            cycles_per_bit: p.cycles_per_bit,
            num_slots: None,
            online_gamma: p.online_gamma,
            snr_gap: p.snr_gap,
            et_ap_distance: g.et_ap_distance,
            user_distance: g.user_distance,
            pathloss_ref_db: g.pathloss_ref_db,
            pathloss_exponent: g.pathloss_exponent,
            rician_factor: g.rician_factor,
            num_antennas: g.num_antennas,
            kind: s.kind,
            a_max: s.a_max,
            seed: s.seed,
            replication: 0,
            arrivals: None,
            wpt_gains: None,
            offl_gains: None,
        }
    }
}

impl FlatConfig {
    pub fn load(path: &Path) -> Result<Self, String> {
        let text = fs::read_to_string(path).map_err(|e| format!("cannot read {}: {e}", path.display()))?;
        Self::parse(&text).map_err(|e| format!("{}: {e}", path.display()))
    }

    pub fn parse(text: &str) -> Result<Self, String> {
        toml::from_str(text).map_err(|e| e.to_string())
    }

    /// Horizon length: explicit key, else the length of a given trace, else 50.
    pub fn horizon(&self) -> usize {
        self.num_slots
            .or(self.arrivals.as_ref().map(Vec::len))
            .or(self.wpt_gains.as_ref().map(Vec::len))
            .unwrap_or(SystemParams::default().num_slots)
    }

    pub fn scenario(&self) -> Result<ScenarioConfig, String> {
        let cfg = ScenarioConfig {
            params: SystemParams {
                slot_len: self.slot_len,
                bandwidth: self.bandwidth,
                noise_power: self.noise_power,
                eh_efficiency: self.eh_efficiency,
                cap_coeff: self.cap_coeff,
                cycles_per_bit: self.cycles_per_bit,
                num_slots: self.horizon(),
                online_gamma: self.online_gamma,
                snr_gap: self.snr_gap,
            },
            geometry: GeometryConfig {
                et_ap_distance: self.et_ap_distance,
                user_distance: self.user_distance,
                pathloss_ref_db: self.pathloss_ref_db,
                pathloss_exponent: self.pathloss_exponent,
                rician_factor: self.rician_factor,
                num_antennas: self.num_antennas,
            },
            kind: self.kind,
            a_max: self.a_max,
            seed: self.seed,
        };
        cfg.validate().map_err(|e| e.to_string())?;
        Ok(cfg)
    }

    /// The instance to solve: explicit traces where given, generated otherwise.
    pub fn instance(&self, cfg: &ScenarioConfig) -> Result<Instance, String> {
        let n = cfg.params.num_slots;
        let generated = cfg.instance(self.replication).map_err(|e| e.to_string())?;
        let tasks = match &self.arrivals {
            Some(a) if a.len() != n => return Err(format!("arrivals has {} entries, num_slots is {n}", a.len())),
            Some(a) => TaskTrace::from_arrivals(a.clone()).map_err(|e| e.to_string())?,
            None => generated.tasks,
        };
        let channels = match (&self.wpt_gains, &self.offl_gains) {
            (None, None) => generated.channels,
            (Some(h), Some(g)) => {
                if h.len() != n || g.len() != n {
                    return Err(format!("gain traces must have num_slots = {n} entries"));
                }
                if cfg.kind == ChannelKind::Static && (h.iter().any(|v| *v != h[0]) || g.iter().any(|v| *v != g[0])) {
                    return Err("kind = \"static\" requires constant gain traces".into());
                }
                ChannelTrace::from_gains(h.clone(), g.clone()).map_err(|e| e.to_string())?
            }
            _ => return Err("wpt_gains and offl_gains must be given together".into()),
        };
        Ok(Instance { tasks, channels })
    }
}

/// One row of the per-slot trace written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceRow {
    /// One-based slot number.
    pub slot: usize,
    pub arrival: f64,
    pub wpt_gain: f64,
    pub offl_gain: f64,
    /// Running maximum of the WPT gain.
    pub eff_gain: f64,
    pub power: f64,
    pub local_bits: f64,
    pub offl_bits: f64,
    pub local_energy: f64,
    pub offl_energy: f64,
    /// Bits still buffered at the end of the slot.
    pub buffer: f64,
    /// Energy stored at the end of the slot.
    pub battery: f64,
}

pub fn trace_rows(
    plan: &AllocationPlan,
    tasks: &TaskTrace,
    channels: &ChannelTrace,
    params: &SystemParams,
) -> Vec<TraceRow> {
    let mut rows = Vec::with_capacity(plan.len());
    let (mut eff, mut buffer, mut battery) = (f64::NEG_INFINITY, 0.0, 0.0);
    for i in 0..plan.len() {
        let (h, g) = (channels.wpt_gain[i], channels.offl_gain[i]);
        eff = eff.max(h);
        let e_loc = params.local_energy_raw(plan.local_bits[i]);
        let e_off = params.offload_energy_raw(plan.offl_bits[i], g);
        buffer += tasks.arrivals[i] - plan.local_bits[i] - plan.offl_bits[i];
        battery += params.slot_len * params.eh_efficiency * h * plan.power[i] - e_loc - e_off;
        rows.push(TraceRow {
            slot: i + 1,
            arrival: tasks.arrivals[i],
            wpt_gain: h,
            offl_gain: g,
            eff_gain: eff,
            power: plan.power[i],
            local_bits: plan.local_bits[i],
            offl_bits: plan.offl_bits[i],
            local_energy: e_loc,
            offl_energy: e_off,
            buffer,
            battery,
        });
    }
    rows
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FeasibilitySummary {
    pub passed: bool,
    pub completion_gap: f64,
    pub check: Option<&'static str>,
    /// One-based slot of the first violation.
    pub slot: Option<usize>,
    pub slack: Option<f64>,
}

impl From<&FeasibilityReport> for FeasibilitySummary {
    fn from(r: &FeasibilityReport) -> Self {
        Self {
            passed: r.passed(),
            completion_gap: r.completion_gap,
            check: r.violation.as_ref().map(|v| v.check),
            slot: r.violation.as_ref().map(|v| v.slot + 1),
            slack: r.violation.as_ref().map(|v| v.slack),
        }
    }
}

/// JSON summary written by `solve`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SolveSummary {
    pub scheme: Scheme,
    /// Mean ET energy per slot, `Σ τ p_i / N`.
    pub objective: f64,
    pub total_energy: f64,
    /// One-based transition slots, for offline schemes.
    pub transitions: Option<Vec<usize>>,
    /// One-based dominating slots, for offline schemes on time-varying channels.
    pub cds: Option<Vec<usize>>,
    pub feasibility: FeasibilitySummary,
    pub config: FlatConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SweepRow {
    pub axis_value: f64,
    pub scheme: Scheme,
    pub mean_energy_per_slot: f64,
    pub stderr: f64,
    pub reps: usize,
}

/// A failed command: message plus exit code.
#[derive(Debug)]
struct Failure {
    code: i32,
    message: String,
}

fn config_err(message: impl Into<String>) -> Failure {
    Failure {
        code: EXIT_CONFIG,
        message: message.into(),
    }
}

impl From<Error> for Failure {
    fn from(e: Error) -> Self {
        let code = match e {
            Error::Domain(_) | Error::LengthMismatch { .. } | Error::OracleTooLarge(_) => EXIT_CONFIG,
            Error::Convergence { .. } | Error::Infeasible { .. } | Error::Policy { .. } => EXIT_INFEASIBLE,
        };
        Failure {
            code,
            message: e.to_string(),
        }
    }
}

fn io_err(e: impl std::fmt::Display) -> Failure {
    config_err(format!("output error: {e}"))
}

fn load(common: &Common) -> Result<(FlatConfig, ScenarioConfig), Failure> {
    let mut flat = match &common.config {
        Some(path) => FlatConfig::load(path).map_err(config_err)?,
        None => FlatConfig::default(),
    };
    if let Some(seed) = common.seed {
        flat.seed = seed;
    }
    flat.num_slots = Some(flat.horizon());
    let cfg = flat.scenario().map_err(config_err)?;
    Ok((flat, cfg))
}

fn write_csv<T: Serialize>(rows: &[T], out: &mut dyn Write) -> Result<(), Failure> {
    let mut w = csv::Writer::from_writer(out);
    for r in rows {
        w.serialize(r).map_err(io_err)?;
    }
    w.flush().map_err(io_err)
}

fn write_json<T: Serialize>(value: &T, out: &mut dyn Write) -> Result<(), Failure> {
    serde_json::to_writer_pretty(&mut *out, value).map_err(io_err)?;
    writeln!(out).map_err(io_err)
}

fn cmd_solve(args: &SolveArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let (flat, cfg) = load(&args.common)?;
    let inst = flat.instance(&cfg).map_err(config_err)?;
    let out = run_scheme(args.scheme, cfg.kind, &inst.tasks, &inst.channels, &cfg.params)?;
    let report = check_feasible(&out.plan, &inst.tasks, &inst.channels, &cfg.params)?;
    let rows = trace_rows(&out.plan, &inst.tasks, &inst.channels, &cfg.params);
    let summary = SolveSummary {
        scheme: args.scheme,
        objective: out.plan.energy_per_slot(&cfg.params),
        total_energy: out.plan.total_energy(&cfg.params),
        transitions: out.schedule.as_ref().map(|s| s.transition_slots.clone()),
        cds: out.cds.as_ref().map(|c| c.cds_slots.iter().map(|s| s + 1).collect()),
        feasibility: FeasibilitySummary::from(&report),
        config: flat,
    };

    match &args.out {
        Some(dir) => {
            fs::create_dir_all(dir).map_err(io_err)?;
            let mut trace = fs::File::create(dir.join("trace.csv")).map_err(io_err)?;
            write_csv(&rows, &mut trace)?;
            let mut json = fs::File::create(dir.join("summary.json")).map_err(io_err)?;
            write_json(&summary, &mut json)?;
        }
        None => match args.format {
            Format::Csv => write_csv(&rows, stdout)?,
            Format::Json => write_json(&summary, stdout)?,
        },
    }

    match &report.violation {
        None => Ok(()),
        Some(v) => Err(Failure {
            code: EXIT_INFEASIBLE,
            message: format!(
                "{} plan violates {} at slot {} (slack {})",
                args.scheme,
                v.check,
                v.slot + 1,
                v.slack
            ),
        }),
    }
}

fn parse_schemes(list: Option<&str>) -> Result<Vec<Scheme>, Failure> {
    let Some(list) = list else {
        return Ok(Scheme::ALL.to_vec());
    };
    let schemes = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| s.parse::<Scheme>().map_err(|e| config_err(e.to_string())))
        .collect::<Result<Vec<_>, _>>()?;
    if schemes.is_empty() {
        return Err(config_err("empty scheme list"));
    }
    Ok(schemes)
}

fn parse_values(list: &str) -> Result<Vec<f64>, Failure> {
    let values = list
        .split(',')
        .map(str::trim)
        .filter(|s| !s.is_empty())
        .map(|s| {
            s.parse::<f64>()
                .map_err(|_| config_err(format!("bad axis value '{s}'")))
        })
        .collect::<Result<Vec<_>, _>>()?;
    if values.is_empty() {
        return Err(config_err("empty value list"));
    }
    Ok(values)
}

fn apply_axis(base: &ScenarioConfig, axis: Axis, value: f64) -> Result<ScenarioConfig, Failure> {
    let mut cfg = *base;
    match axis {
        Axis::N => {
            if !(value >= 1.0 && value.fract() == 0.0) {
                return Err(config_err(format!(
                    "slot count must be a positive integer, got {value}"
                )));
            }
            cfg.params.num_slots = value as usize;
        }
        Axis::AMax => cfg.a_max = value,
        Axis::Distance => cfg.geometry.user_distance = value,
    }
    cfg.validate()?;
    Ok(cfg)
}

/// Tidy Monte Carlo rows for every `(value, scheme)` pair, in input order.
pub fn sweep_rows(
    base: &ScenarioConfig,
    axis: Axis,
    values: &[f64],
    schemes: &[Scheme],
    reps: usize,
) -> crate::Result<Vec<SweepRow>> {
    let mut rows = Vec::with_capacity(values.len() * schemes.len());
    for &v in values {
        let cfg = apply_axis(base, axis, v).map_err(|f| Error::Domain(f.message))?;
        let mc = run_montecarlo(&cfg, schemes, reps)?;
        rows.extend(mc.summaries.iter().map(|s| SweepRow {
            axis_value: v,
            scheme: s.scheme,
            mean_energy_per_slot: s.mean_energy_per_slot,
            stderr: s.stderr,
            reps: s.reps,
        }));
    }
    Ok(rows)
}

fn cmd_sweep(args: &SweepArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let (flat, base) = load(&args.common)?;
    if flat.arrivals.is_some() || flat.wpt_gains.is_some() {
        return Err(config_err("sweep generates its own traces; remove explicit trace keys"));
    }
    let schemes = parse_schemes(args.scheme.as_deref())?;
    let values = parse_values(&args.values)?;
    if args.reps == 0 {
        return Err(config_err("reps must be at least 1"));
    }
    for &v in &values {
        apply_axis(&base, args.axis, v)?;
    }
    let rows = sweep_rows(&base, args.axis, &values, &schemes, args.reps)?;

    let mut file;
    let out: &mut dyn Write = match &args.out {
        Some(path) => {
            file = fs::File::create(path).map_err(io_err)?;
            &mut file
        }
        None => stdout,
    };
    match args.format {
        Format::Csv => write_csv(&rows, out),
        Format::Json => write_json(&rows, out),
    }
}

fn read_plan(path: &Path, n: usize) -> Result<AllocationPlan, Failure> {
    let mut reader = csv::Reader::from_path(path).map_err(|e| config_err(format!("{}: {e}", path.display())))?;
    let mut plan = AllocationPlan::default();
    for row in reader.deserialize::<TraceRow>() {
        let row = row.map_err(|e| config_err(format!("{}: {e}", path.display())))?;
        plan.power.push(row.power);
        plan.local_bits.push(row.local_bits);
        plan.offl_bits.push(row.offl_bits);
    }
    if plan.len() != n {
        return Err(config_err(format!("plan has {} slots, instance has {n}", plan.len())));
    }
    Ok(plan)
}

fn cmd_verify(args: &VerifyArgs, stdout: &mut dyn Write) -> Result<(), Failure> {
    let (flat, cfg) = load(&args.common)?;
    let inst = flat.instance(&cfg).map_err(config_err)?;
    let n = cfg.params.num_slots;
    let mut failed = Vec::new();
    let mut line = |s: String| writeln!(stdout, "{s}").map_err(io_err);

    let (plan, out) = match &args.plan {
        Some(path) => (read_plan(path, n)?, None),
        None => {
            let out = run_scheme(args.scheme, cfg.kind, &inst.tasks, &inst.channels, &cfg.params)?;
            (out.plan.clone(), Some(out))
        }
    };

    let report = check_feasible(&plan, &inst.tasks, &inst.channels, &cfg.params)?;
    match &report.violation {
        None => line("PASS feasibility".into())?,
        Some(v) => {
            line(format!(
                "FAIL feasibility: {} at slot {} (slack {})",
                v.check,
                v.slot + 1,
                v.slack
            ))?;
            failed.push(v.check.to_string());
        }
    }

    let solver = out
        .as_ref()
        .and_then(|o| o.schedule.as_ref().map(|s| (s, args.scheme.offline_mode())));
    match solver {
        Some((schedule, Some(mode))) => {
            let st = check_structure(
                &plan,
                schedule,
                &inst.tasks,
                &inst.channels,
                &cfg.params,
                cfg.kind,
                mode,
            )?;
            for c in &st.checks {
                match (c.passed, c.slot) {
                    (true, _) => line(format!("PASS {}", c.name))?,
                    (false, slot) => {
                        let at = slot.map(|s| format!(" at slot {}", s + 1)).unwrap_or_default();
                        line(format!("FAIL {}{at}: {}", c.name, c.detail))?;
                        failed.push(c.name.to_string());
                    }
                }
            }
            if n <= ORACLE_MAX_SLOTS {
                let oracle = grid_oracle(&inst.tasks, &inst.channels, &cfg.params, mode, cfg.kind)?;
                let solved = plan.total_energy(&cfg.params);
                let gap = if oracle > 0.0 { (oracle - solved) / oracle } else { 0.0 };
                let ok = solved <= oracle * (1.0 + 1e-9) + f64::MIN_POSITIVE && gap <= ORACLE_GAP;
                let verdict = if ok { "PASS" } else { "FAIL" };
                line(format!(
                    "{verdict} oracle: solver {solved} J, oracle {oracle} J, gap {gap:.3e}"
                ))?;
                if !ok {
                    failed.push("oracle".into());
                }
            } else {
                line(format!("SKIP oracle: N = {n} exceeds {ORACLE_MAX_SLOTS}"))?;
            }
        }
        _ => line("SKIP structure and oracle: no offline schedule for this plan".into())?,
    }

    if failed.is_empty() {
        Ok(())
    } else {
        Err(Failure {
            code: EXIT_VERIFY,
            message: format!("verification failed: {}", failed.join(", ")),
        })
    }
}

/// Parses `args` (including the program name), runs the command and returns
/// the exit code. Normal output goes to `stdout`, diagnostics to `stderr`.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<std::ffi::OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(cli) => cli,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_CONFIG } else { EXIT_OK };
            let rendered = e.render().to_string();
            let _ = if e.use_stderr() {
                write!(stderr, "{rendered}")
            } else {
                write!(stdout, "{rendered}")
            };
            return code;
        }
    };
    let result = match &cli.command {
        Command::Solve(a) => cmd_solve(a, stdout),
        Command::Sweep(a) => cmd_sweep(a, stdout),
        Command::Verify(a) => cmd_verify(a, stdout),
    };
    match result {
        Ok(()) => EXIT_OK,
        Err(f) => {
            let _ = writeln!(stderr, "error: {}", f.message);
            f.code
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn run_str(args: &[&str]) -> (i32, String, String) {
        let (mut out, mut err) = (Vec::new(), Vec::new());
        let code = run(std::iter::once("wpmec").chain(args.iter().copied()), &mut out, &mut err);
        (code, String::from_utf8(out).unwrap(), String::from_utf8(err).unwrap())
    }

    #[test]
    fn default_config_roundtrips() {
        let flat = FlatConfig::parse("").unwrap();
        assert_eq!(flat, FlatConfig::default());
        let cfg = flat.scenario().unwrap();
        assert_eq!(cfg.params, SystemParams::default());
        assert_eq!(cfg.geometry, GeometryConfig::default());
    }

    #[test]
    fn unknown_keys_rejected() {
        assert!(FlatConfig::parse("bogus = 1").is_err());
        let inf = FlatConfig::parse("rician_factor = inf\nkind = \"time_varying\"").unwrap();
        assert!(inf.rician_factor.is_infinite());
        assert_eq!(inf.kind, ChannelKind::TimeVarying);
    }

    #[test]
    fn horizon_follows_trace() {
        let flat = FlatConfig::parse("arrivals = [1e5, 2e5, 3e5]").unwrap();
        assert_eq!(flat.horizon(), 3);
        let flat = FlatConfig::parse("arrivals = [1e5]\nnum_slots = 2").unwrap();
        let cfg = flat.scenario().unwrap();
        assert!(flat.instance(&cfg).is_err());
    }

    #[test]
    fn trace_bookkeeping() {
        let p = SystemParams::default().with_num_slots(2);
        let tasks = TaskTrace::from_arrivals(vec![1e5, 0.0]).unwrap();
        let ch = ChannelTrace::from_gains(vec![2e-5, 1e-5], vec![6e-7; 2]).unwrap();
        let plan = AllocationPlan {
            power: vec![1.0, 0.0],
            local_bits: vec![5e4, 5e4],
            offl_bits: vec![0.0, 0.0],
        };
        let rows = trace_rows(&plan, &tasks, &ch, &p);
        assert_eq!(rows[1].eff_gain, 2e-5);
        assert_eq!(rows[0].buffer, 5e4);
        assert_eq!(rows[1].buffer, 0.0);
        approx::assert_relative_eq!(rows[0].battery, 0.1 * 0.3 * 2e-5 - 1e-6, max_relative = 1e-12);
    }

    #[test]
    fn usage_errors_exit_2() {
        assert_eq!(run_str(&["solve", "--scheme", "nope"]).0, EXIT_CONFIG);
        assert_eq!(
            run_str(&["sweep", "--axis", "n", "--values", "2", "--scheme", ""]).0,
            EXIT_CONFIG
        );
        assert_eq!(
            run_str(&["sweep", "--axis", "n", "--values", "2.5", "--scheme", "offline"]).0,
            EXIT_CONFIG
        );
        assert_eq!(run_str(&["frobnicate"]).0, EXIT_CONFIG);
        assert_eq!(run_str(&["--help"]).0, EXIT_OK);
    }
}
