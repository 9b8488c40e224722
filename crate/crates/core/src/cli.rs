//! Batch front end: layered configuration and the subcommands that write
//! JSON/CSV artifacts.
//!
//! Configuration is resolved as defaults < TOML file < environment
//! (`RANDNS_OUT`, `RANDNS_WORKERS`) < command-line flags. The TOML file holds
//! top-level keys plus optional per-subcommand tables (`[tail]`, `[solve]`, …)
//! that override them. Artifacts never contain timestamps, the output path or
//! the worker count, so reruns are byte-identical.

use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};
use serde::{Deserialize, Serialize};
use serde_json::{json, Value};

use crate::checkpoint;
use crate::datum::{abc_flow, power_law, taylor_green};
use crate::error::{Error, Result};
use crate::field::SpectralField;
use crate::galerkin::{duhamel_residual, solve_from, solve_partial, DifferenceEqParams, Integrator, TrajectoryRecord};
use crate::grid::GridSpec;
use crate::heatflow::{
    deterministic_bound_refinement, mixed_norm_detailed, monte_carlo_exceedance, ForcingProbe,
    NormProbeSpec,
};
use crate::randomize::{randomize, MultiplierLaw, SeedSpec};
use crate::spectral::sobolev_norm;
use crate::verify::{
    coupling_forcing_profile, energy_bound_monitor, gronwall_uniqueness_check, rate_norm, EnergyTrace, GronwallConfig,
};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum DatumKind {
    /// `|f̂(n)| = amplitude ⟨n⟩^{−decay}` with fixed pseudo-random phases.
    PowerLaw,
    TaylorGreen,
    Beltrami,
}

/// Fully resolved run configuration; echoed into every artifact.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    pub dim: usize,
    pub m: usize,
    pub alpha: f64,
    pub gamma: f64,
    pub law: MultiplierLaw,
    pub seed: u64,
    pub sample_index: u64,
    pub samples: usize,
    pub horizon: f64,
    pub dt: f64,
    pub c1: f64,
    pub c2: f64,
    pub integrator: Integrator,
    pub snapshot_every: usize,
    pub dense_until: f64,
    pub graded_start: Option<f64>,
    pub sigma: f64,
    pub p: f64,
    pub q: f64,
    pub t_min: f64,
    pub time_points: usize,
    pub lambdas: Vec<f64>,
    pub datum: DatumKind,
    /// Defaults to `d/2 − α/2`: bounded in `H^{−α}` but not in `L²` as `M → ∞`.
    pub datum_decay: Option<f64>,
    pub datum_amplitude: f64,
    #[serde(skip)]
    pub out: PathBuf,
    #[serde(skip)]
    pub workers: Option<usize>,
}

impl Default for RunConfig {
    fn default() -> Self {
        RunConfig {
            dim: 2,
            m: 32,
            alpha: 0.3,
            gamma: -0.05,
            law: MultiplierLaw::Gaussian,
            seed: 0,
            sample_index: 0,
            samples: 200,
            horizon: 1.0,
            dt: 2.5e-4,
            c1: -1.0,
            c2: -1.0,
            integrator: Integrator::ExpRk4,
            snapshot_every: 10,
            dense_until: 0.01,
            graded_start: None,
            sigma: 0.0,
            p: 4.0,
            q: 4.0,
            t_min: 1e-6,
            time_points: 400,
            lambdas: (1..=16).map(|j| 0.25 * j as f64).collect(),
            datum: DatumKind::PowerLaw,
            datum_decay: None,
            datum_amplitude: 1.0,
            out: PathBuf::from("randns-out"),
            workers: None,
        }
    }
}

impl RunConfig {
    /// Range checks on the regularity parameters and numerical knobs.
    pub fn validate(&self) -> Result<()> {
        let (a, g) = (self.alpha, self.gamma);
        let cap = match self.dim {
            2 => 0.5,
            3 => 0.25,
            d => return Err(Error::Config(format!("dimension must be 2 or 3, got {d}"))),
        };
        if !(0.0 < a && a < cap) {
            return Err(Error::Config(format!("d={} requires 0 < α < {cap}, got α = {a}", self.dim)));
        }
        if !(g < 0.0) {
            return Err(Error::Config(format!("requires γ < 0, got γ = {g}")));
        }
        if !(a < cap + 2.0 * g) {
            return Err(Error::Config(format!(
                "d={} requires α < {cap} + 2γ, got α = {a}, {cap} + 2γ = {}",
                self.dim,
                cap + 2.0 * g
            )));
        }
        if self.m == 0 {
            return Err(Error::Config("M must be >= 1".into()));
        }
        if !(self.horizon > 0.0) || !(self.dt > 0.0 && self.dt <= self.horizon) {
            return Err(Error::Config(format!("requires T > 0 and 0 < dt <= T, got T = {}, dt = {}", self.horizon, self.dt)));
        }
        if !(self.t_min > 0.0 && self.t_min < self.horizon) || self.time_points < 2 {
            return Err(Error::Config("requires 0 < t_min < T and time_points >= 2".into()));
        }
        if self.lambdas.is_empty() || self.lambdas.windows(2).any(|w| !(w[0] < w[1])) {
            return Err(Error::Config("lambdas must be nonempty and strictly increasing".into()));
        }
        if self.datum_amplitude < 0.0 || !self.datum_amplitude.is_finite() {
            return Err(Error::Config("datum_amplitude must be finite and >= 0".into()));
        }
        if self.workers == Some(0) {
            return Err(Error::Config("workers must be >= 1".into()));
        }
        self.params().validate().map_err(|e| Error::Config(e.to_string()))
    }

    pub fn grid(&self) -> Result<GridSpec> {
        GridSpec::new(self.dim, self.m)
    }

    pub fn decay(&self) -> f64 {
        self.datum_decay.unwrap_or(self.dim as f64 / 2.0 - self.alpha / 2.0)
    }

    pub fn params(&self) -> DifferenceEqParams {
        DifferenceEqParams {
            c1: self.c1,
            c2: self.c2,
            horizon: self.horizon,
            dt: self.dt,
            graded_start: self.graded_start,
            integrator: self.integrator,
            snapshot_every: self.snapshot_every,
            dense_until: self.dense_until,
            ..DifferenceEqParams::default()
        }
    }

    pub fn forcing_probe(&self) -> ForcingProbe {
        ForcingProbe {
            dim: self.dim,
            alpha: self.alpha,
            gamma: self.gamma,
            horizon: self.horizon,
            t_min: self.t_min,
            points: self.time_points,
        }
    }

    pub fn norm_probe(&self) -> NormProbeSpec {
        NormProbeSpec {
            sigma: self.sigma,
            gamma: self.gamma,
            p: self.p,
            q: self.q,
            horizon: self.horizon,
            alpha: self.alpha,
            t_min: self.t_min,
            points: self.time_points,
        }
    }

    /// The deterministic datum `f` on this grid.
    pub fn datum(&self) -> Result<SpectralField> {
        let grid = self.grid()?;
        match self.datum {
            DatumKind::PowerLaw => power_law(grid, self.decay(), self.datum_amplitude),
            DatumKind::TaylorGreen => taylor_green(grid, self.datum_amplitude),
            DatumKind::Beltrami => {
                let a = self.datum_amplitude;
                abc_flow(grid, a, a, a)
            }
        }
    }

    pub fn seed_spec(&self) -> SeedSpec {
        SeedSpec::new(self.seed, self.sample_index)
    }

    /// `f^ω` for the configured seed.
    pub fn f_omega(&self) -> Result<SpectralField> {
        randomize(&self.datum()?, self.law, self.seed_spec())
    }
}

#[derive(Debug, Parser)]
#[command(name = "randns", version, about = "Randomized rough data for periodic Navier–Stokes")]
pub struct Cli {
    /// TOML configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    #[command(flatten)]
    pub overrides: Overrides,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Write the randomized datum as a checkpoint.
    Randomize,
    /// Heat-flow bound constants and one mixed-norm probe.
    HeatProbe,
    /// Monte Carlo exceedance probabilities of the forcing norm.
    Tail,
    /// Integrate the difference equation and write the trajectory.
    Solve,
    /// Diagnostics on a trajectory written by `solve`.
    Check {
        /// Trajectory directory; defaults to the output directory.
        #[arg(long)]
        traj: Option<PathBuf>,
        /// Skip the refined reruns.
        #[arg(long)]
        no_refine: bool,
    },
    /// Exact-solution suites (Taylor–Green, Beltrami).
    Regression,
}

impl Command {
    fn section(&self) -> &'static str {
        match self {
            Command::Randomize => "randomize",
            Command::HeatProbe => "heat-probe",
            Command::Tail => "tail",
            Command::Solve => "solve",
            Command::Check { .. } => "check",
            Command::Regression => "regression",
        }
    }
}

#[derive(Debug, Default, Args)]
pub struct Overrides {
    #[arg(long, global = true, env = "RANDNS_OUT")]
    pub out: Option<PathBuf>,
    #[arg(long, global = true, env = "RANDNS_WORKERS")]
    pub workers: Option<usize>,
    #[arg(long, global = true)]
    pub dim: Option<usize>,
    #[arg(short = 'm', long = "modes", global = true)]
    pub m: Option<usize>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub alpha: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub gamma: Option<f64>,
    #[arg(long, global = true)]
    pub law: Option<MultiplierLaw>,
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    #[arg(long, global = true)]
    pub sample_index: Option<u64>,
    #[arg(long, global = true)]
    pub samples: Option<usize>,
    #[arg(long = "horizon", global = true)]
    pub horizon: Option<f64>,
    #[arg(long, global = true)]
    pub dt: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c1: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    pub c2: Option<f64>,
    #[arg(long, global = true)]
    pub integrator: Option<Integrator>,
    #[arg(long, global = true)]
    pub snapshot_every: Option<usize>,
    #[arg(long, global = true)]
    pub dense_until: Option<f64>,
    #[arg(long, global = true)]
    pub graded_start: Option<f64>,
    #[arg(long, global = true)]
    pub sigma: Option<f64>,
    #[arg(long, global = true)]
    pub p: Option<f64>,
    #[arg(long, global = true)]
    pub q: Option<f64>,
    #[arg(long, global = true)]
    pub t_min: Option<f64>,
    #[arg(long, global = true)]
    pub time_points: Option<usize>,
    /// Comma-separated, increasing.
    #[arg(long, global = true, value_delimiter = ',')]
    pub lambdas: Option<Vec<f64>>,
    #[arg(long, global = true, value_enum)]
    pub datum: Option<DatumKind>,
    #[arg(long, global = true)]
    pub datum_decay: Option<f64>,
    #[arg(long, global = true)]
    pub datum_amplitude: Option<f64>,
}

macro_rules! apply {
    ($cfg:ident, $ov:ident, $($field:ident),*) => {
        $( if let Some(v) = $ov.$field.clone() { $cfg.$field = v; } )*
    };
}

impl Overrides {
    fn apply(&self, cfg: &mut RunConfig) {
        apply!(cfg, self, out, dim, m, alpha, gamma, law, seed, sample_index, samples, horizon, dt, c1, c2);
        apply!(cfg, self, integrator, snapshot_every, dense_until, sigma, p, q, t_min, time_points, lambdas, datum);
        apply!(cfg, self, datum_amplitude);
        if self.workers.is_some() {
            cfg.workers = self.workers;
        }
        if self.graded_start.is_some() {
            cfg.graded_start = self.graded_start;
        }
        if self.datum_decay.is_some() {
            cfg.datum_decay = self.datum_decay;
        }
    }
}

/// Reads a TOML file: top-level keys, then the table named `section`.
pub fn load_config_file(path: &Path, section: &str) -> Result<RunConfig> {
    let text = fs::read_to_string(path).map_err(|e| Error::Config(format!("cannot read {}: {e}", path.display())))?;
    parse_config(&text, section)
}

const SECTIONS: [&str; 6] = ["randomize", "heat-probe", "tail", "solve", "check", "regression"];

pub fn parse_config(text: &str, section: &str) -> Result<RunConfig> {
    let table: toml::Table = text.parse().map_err(|e| Error::Config(format!("invalid TOML: {e}")))?;
    let mut merged = toml::Table::new();
    for (k, v) in &table {
        if let toml::Value::Table(_) = v {
            if !SECTIONS.contains(&k.as_str()) {
                return Err(Error::Config(format!("unknown section [{k}]")));
            }
        } else {
            merged.insert(k.clone(), v.clone());
        }
    }
    if let Some(toml::Value::Table(sec)) = table.get(section) {
        for (k, v) in sec {
            merged.insert(k.clone(), v.clone());
        }
    }
    toml::Value::Table(merged).try_into().map_err(|e| Error::Config(format!("{e}")))
}

fn resolve(cli: &Cli) -> Result<RunConfig> {
    let mut cfg = match &cli.config {
        Some(path) => load_config_file(path, cli.command.section())?,
        None => RunConfig::default(),
    };
    cli.overrides.apply(&mut cfg);
    cfg.validate()?;
    Ok(cfg)
}

/// Runs the CLI on `args` and returns the process exit code.
pub fn run_from_args<I, T>(args: I) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            if matches!(e.kind(), clap::error::ErrorKind::DisplayHelp | clap::error::ErrorKind::DisplayVersion) {
                print!("{e}");
                return EXIT_OK;
            }
            emit_error("config", &e.to_string());
            return EXIT_CONFIG;
        }
    };
    let cfg = match resolve(&cli) {
        Ok(c) => c,
        Err(e) => {
            emit_error("config", &e.to_string());
            return EXIT_CONFIG;
        }
    };
    if let Some(n) = cfg.workers {
        // a pool that already exists keeps its size; results do not depend on it
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    match execute(&cli.command, &cfg) {
        Ok(code) => code,
        Err(e @ Error::Numerical { .. }) => {
            emit_error("numerical", &e.to_string());
            EXIT_NUMERICAL
        }
        Err(e) => {
            emit_error("config", &e.to_string());
            EXIT_CONFIG
        }
    }
}

fn emit_error(kind: &str, message: &str) {
    println!("{}", json!({ "error": kind, "message": message }));
}

fn write_json(dir: &Path, name: &str, value: &Value) -> Result<PathBuf> {
    fs::create_dir_all(dir)?;
    let path = dir.join(name);
    let mut text = serde_json::to_string_pretty(value)?;
    text.push('\n');
    fs::write(&path, text)?;
    Ok(path)
}

fn artifact(cfg: &RunConfig, kind: &str, result: Value) -> Value {
    json!({ "kind": kind, "version": env!("CARGO_PKG_VERSION"), "config": cfg, "result": result })
}

fn execute(command: &Command, cfg: &RunConfig) -> Result<i32> {
    match command {
        Command::Randomize => cmd_randomize(cfg),
        Command::HeatProbe => cmd_heat_probe(cfg),
        Command::Tail => cmd_tail(cfg),
        Command::Solve => cmd_solve(cfg),
        Command::Check { traj, no_refine } => cmd_check(cfg, traj.as_deref(), !no_refine),
        Command::Regression => cmd_regression(cfg),
    }
}

fn cmd_randomize(cfg: &RunConfig) -> Result<i32> {
    let f = cfg.datum()?;
    let fw = cfg.f_omega()?;
    fs::create_dir_all(&cfg.out)?;
    checkpoint::write(cfg.out.join("f_omega.snsf"), &fw)?;
    let result = json!({
        "checkpoint": "f_omega.snsf",
        "datum_h_minus_alpha": sobolev_norm(&f, -cfg.alpha),
        "f_omega_h_minus_alpha": sobolev_norm(&fw, -cfg.alpha),
        "f_omega_l2": fw.l2_sq().sqrt(),
    });
    write_json(&cfg.out, "randomize.json", &artifact(cfg, "randomize", result))?;
    Ok(EXIT_OK)
}

fn cmd_heat_probe(cfg: &RunConfig) -> Result<i32> {
    let fw = cfg.f_omega()?;
    let mut bounds = Vec::new();
    let mut pass = true;
    for k in [0u32, 1] {
        let r = deterministic_bound_refinement(&fw, cfg.alpha, k, cfg.t_min.max(1e-4), cfg.horizon, 41, 2)?;
        pass &= r.stable;
        bounds.push(json!({ "k": k, "report": r }));
    }
    let probe = cfg.norm_probe();
    let mixed = mixed_norm_detailed(&fw, &probe)?;
    let result = json!({ "pass": pass, "bounds": bounds, "probe": probe, "mixed_norm": mixed });
    write_json(&cfg.out, "heat_probe.json", &artifact(cfg, "heat-probe", result))?;
    Ok(EXIT_OK)
}

fn cmd_tail(cfg: &RunConfig) -> Result<i32> {
    let f = cfg.datum()?;
    let report = monte_carlo_exceedance(&f, cfg.law, cfg.seed, &cfg.forcing_probe(), &cfg.lambdas, cfg.samples)?;
    fs::create_dir_all(&cfg.out)?;
    let mut wtr = csv::Writer::from_path(cfg.out.join("tail_samples.csv"))?;
    wtr.write_record(["sample_index", "norm", "level"])?;
    for (i, (v, j)) in report.norms.iter().zip(&report.level).enumerate() {
        wtr.write_record([i.to_string(), format!("{v:.17e}"), j.to_string()])?;
    }
    wtr.flush()?;
    let mut summary = serde_json::to_value(&report)?;
    if let Value::Object(map) = &mut summary {
        map.remove("norms");
        map.remove("level");
    }
    write_json(&cfg.out, "tail.json", &artifact(cfg, "tail", summary))?;
    Ok(EXIT_OK)
}

fn snapshot_name(i: usize) -> String {
    format!("w_{i:06}.snsf")
}

fn cmd_solve(cfg: &RunConfig) -> Result<i32> {
    let fw = cfg.f_omega()?;
    let w0 = SpectralField::zeros(*fw.grid());
    let (mut traj, failure) = solve_partial(&fw, &w0, &cfg.params(), Some(&cfg.forcing_probe()))?;
    if failure.is_none() {
        traj.trace.duhamel_residual = Some(duhamel_residual(&traj, &fw)?);
    }
    write_trajectory(&cfg.out, cfg, &fw, &traj, failure.as_ref())?;
    match failure {
        Some(e) => Err(e),
        None => Ok(EXIT_OK),
    }
}

/// Trajectory directory: `solve.json`, `trace.csv`, `f_omega.snsf` and
/// `snapshots/w_NNNNNN.snsf`.
pub fn write_trajectory(
    dir: &Path,
    cfg: &RunConfig,
    f_omega: &SpectralField,
    traj: &TrajectoryRecord,
    failure: Option<&Error>,
) -> Result<()> {
    let snap_dir = dir.join("snapshots");
    fs::create_dir_all(&snap_dir)?;
    checkpoint::write(dir.join("f_omega.snsf"), f_omega)?;
    for (i, s) in traj.snapshots.iter().enumerate() {
        checkpoint::write(snap_dir.join(snapshot_name(i)), s)?;
    }
    traj.trace.write_csv(fs::File::create(dir.join("trace.csv"))?)?;
    let sup_e = traj.trace.energy.iter().cloned().fold(0.0, f64::max);
    let result = json!({
        "completed": failure.is_none(),
        "failure": failure.map(|e| e.to_string()),
        "steps": traj.steps,
        "times": traj.times,
        "sup_E": sup_e,
        "rate_norm": rate_norm(&traj.trace, traj.grid.dim)?,
        "duhamel_residual": traj.trace.duhamel_residual,
        "trace": traj.trace,
    });
    write_json(dir, "solve.json", &artifact(cfg, "solve", result))?;
    Ok(())
}

/// Loads a directory written by [`write_trajectory`].
pub fn read_trajectory(dir: &Path) -> Result<(RunConfig, SpectralField, TrajectoryRecord)> {
    let text = fs::read_to_string(dir.join("solve.json"))?;
    let doc: Value = serde_json::from_str(&text)?;
    let cfg: RunConfig = serde_json::from_value(doc["config"].clone())?;
    let result = &doc["result"];
    let times: Vec<f64> = serde_json::from_value(result["times"].clone())?;
    let trace: EnergyTrace = serde_json::from_value(result["trace"].clone())?;
    let steps: usize = serde_json::from_value(result["steps"].clone())?;
    let f_omega = checkpoint::read(dir.join("f_omega.snsf"))?;
    let snapshots = (0..times.len())
        .map(|i| checkpoint::read(dir.join("snapshots").join(snapshot_name(i))))
        .collect::<Result<Vec<_>>>()?;
    let traj = TrajectoryRecord { params: cfg.params(), grid: *f_omega.grid(), times, snapshots, trace, steps, trilinear: None };
    Ok((cfg, f_omega, traj))
}

fn cmd_check(cfg: &RunConfig, traj_dir: Option<&Path>, refine: bool) -> Result<i32> {
    let dir = traj_dir.unwrap_or(&cfg.out);
    let (run_cfg, fw, traj) = read_trajectory(dir)?;
    let mut report = energy_bound_monitor(&traj.trace, run_cfg.horizon, run_cfg.alpha)?;
    if refine {
        let finer_m = RunConfig { m: run_cfg.m + run_cfg.m / 2, ..run_cfg.clone() };
        let finer_dt = RunConfig { dt: run_cfg.dt / 2.0, ..run_cfg.clone() };
        let mut refined = Vec::new();
        for c in [finer_m, finer_dt] {
            let f = c.f_omega()?;
            let t = solve_from(&f, &SpectralField::zeros(*f.grid()), &c.params())?;
            refined.push(t.trace.energy.iter().cloned().fold(0.0, f64::max));
        }
        report = report.with_refinements(&refined);
    }
    let rate = rate_norm(&traj.trace, run_cfg.dim)?;
    let gronwall = if run_cfg.dim == 2 {
        let rho = run_cfg.horizon.min(0.5);
        let short = RunConfig { horizon: rho, ..run_cfg.clone() };
        let params = short.params();
        let zero = SpectralField::zeros(*fw.grid());
        let base = solve_from(&fw, &zero, &params)?;
        let bump = perturbation(*fw.grid(), 1e-6)?;
        let perturbed = solve_from(&fw, &bump, &params)?;
        Some(gronwall_uniqueness_check(&perturbed, &base, &fw, &GronwallConfig::default_for(run_cfg.c1))?)
    } else {
        None
    };
    let forcing = coupling_forcing_profile(&traj, &fw)?;
    let gronwall_pass = gronwall.as_ref().is_none_or(|g| g.pass);
    let pass = report.pass() && rate.is_finite() && gronwall_pass;
    let verdict = json!({
        "pass": pass,
        "sup_E": report.sup_e,
        "envelope_margin": gronwall.as_ref().and_then(|g| g.envelope_margin),
        "log_envelope_margin": gronwall.as_ref().and_then(|g| g.log_margin),
        "rate_norm": rate,
        "coupling_forcing_l2l2": forcing.cumulative_sq.last().copied().unwrap_or(0.0).sqrt(),
        "refinement_delta": report.refinement_delta,
        "energy": report,
        "gronwall": gronwall,
        "coupling_forcing": forcing,
    });
    let out = if traj_dir.is_some() { cfg.out.clone() } else { dir.to_path_buf() };
    write_json(&out, "check.json", &artifact(&run_cfg, "check", verdict))?;
    Ok(if pass { EXIT_OK } else { EXIT_NUMERICAL })
}

/// Divergence-free bump `ε (sin y, sin x)`, normalized to `‖·‖_{L²} = ε`.
pub fn perturbation(grid: GridSpec, eps: f64) -> Result<SpectralField> {
    let mut f = SpectralField::zeros(grid);
    let s = num_complex::Complex64::new(0.0, -0.5);
    f.set_pair(0, &[0, 1], s)?;
    f.set_pair(1, &[1, 0], s)?;
    let norm = f.l2_sq().sqrt();
    let mut f = f.scaled(eps / norm);
    f.refresh_solenoidal();
    Ok(f)
}

/// Exact-decay suites at `M = 8`, `dt = 10⁻³`, `T = 1`.
pub fn regression_suites() -> Result<Value> {
    let params = DifferenceEqParams { dt: 1e-3, horizon: 1.0, ..DifferenceEqParams::default() };
    let mut suites = Vec::new();
    let mut pass = true;
    let cases: [(&str, usize, f64); 2] = [("taylor-green", 2, 2.0), ("beltrami", 3, 1.0)];
    for (name, dim, rate) in cases {
        let grid = GridSpec::new(dim, 8)?;
        let w0 = if dim == 2 { taylor_green(grid, 1.0)? } else { abc_flow(grid, 1.0, 1.0, 1.0)? };
        let traj = solve_from(&SpectralField::zeros(grid), &w0, &params)?;
        let exact = w0.scaled((-rate * params.horizon).exp());
        let error = traj.final_state().sub(&exact)?.l2_sq().sqrt();
        let e0 = w0.l2_sq();
        let tr = &traj.trace;
        let identity = (tr.l2sq.last().unwrap() + tr.cum_enstrophy.last().unwrap() - e0).abs() / e0;
        let ok = error <= 1e-8 && identity <= 1e-6;
        pass &= ok;
        suites.push(json!({
            "suite": name, "dim": dim, "m": 8, "dt": params.dt, "horizon": params.horizon,
            "l2_error": error, "energy_identity_error": identity, "pass": ok,
        }));
    }
    Ok(json!({ "pass": pass, "suites": suites }))
}

fn cmd_regression(cfg: &RunConfig) -> Result<i32> {
    let result = regression_suites()?;
    let pass = result["pass"].as_bool().unwrap_or(false);
    write_json(&cfg.out, "regression.json", &artifact(cfg, "regression", result))?;
    Ok(if pass { EXIT_OK } else { EXIT_NUMERICAL })
}
