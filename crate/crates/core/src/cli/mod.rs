//! Command-line front end. Exit codes: 0 success, 1 I/O failure,
//! 2 configuration or usage error, 3 numerical failure.

mod config;
pub mod output;

use std::ffi::OsString;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Map, Value};

use crate::bessel;
use crate::error::Error;
use crate::fourier::SpectralField;
use crate::particles::{self, ParticleConfig, ParticleEnsemble};
use crate::pde::{self, InitSpec, PdeConfig};
use crate::spde::{self, CovarianceSpec, SpdeConfig};
use crate::stationary::{self, FixedPointConfig};
use output::{num17, to_value, write_json};

pub const EXIT_OK: i32 = 0;
pub const EXIT_IO: i32 = 1;
pub const EXIT_CONFIG: i32 = 2;
pub const EXIT_NUMERICAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "mckv", version, about = "McKean-Vlasov on the torus: stationary states, PDE/SPDE solvers, particles")]
#[command(args_override_self = true)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Critical diffusion: the root of f_c.
    SigmaC(SigmaCArgs),
    /// Fixed points of the stationary problem at one sigma or a list.
    Stationary(StationaryArgs),
    /// Integrate the deterministic PDE.
    Pde(PdeArgs),
    /// Integrate the additive-noise SPDE.
    Spde(SpdeArgs),
    /// Simulate the N-particle system.
    Particles(ParticlesArgs),
    /// Empirical moments against the PDE for several N.
    Chaos(ChaosArgs),
    /// Steer the controlled SPDE between two states.
    Control(ControlArgs),
    /// Same-noise runs from two initial data over many seeds.
    Ergodicity(ErgodicityArgs),
    /// Solution count, m*, zeta'(0) and f_c over a sigma grid.
    PhaseDiagram(PhaseArgs),
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::SigmaC(_) => "sigma-c",
            Command::Stationary(_) => "stationary",
            Command::Pde(_) => "pde",
            Command::Spde(_) => "spde",
            Command::Particles(_) => "particles",
            Command::Chaos(_) => "chaos",
            Command::Control(_) => "control",
            Command::Ergodicity(_) => "ergodicity",
            Command::PhaseDiagram(_) => "phase-diagram",
        }
    }
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SigmaCArgs {
    /// Bisection tolerance on sigma.
    #[arg(long, default_value_t = 1e-10)]
    pub tol: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct StationaryArgs {
    #[arg(long, required_unless_present = "scan", conflicts_with = "scan")]
    pub sigma: Option<f64>,
    /// Comma-separated sigma values.
    #[arg(long, value_delimiter = ',')]
    pub scan: Option<Vec<f64>>,
    /// Fixed-point residual tolerance.
    #[arg(long, default_value_t = 1e-8)]
    pub tol: f64,
    /// Side of the multistart Newton grid; 0 disables it.
    #[arg(long, default_value_t = 5)]
    pub newton_grid: usize,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PdeArgs {
    #[arg(long)]
    pub sigma: f64,
    /// uniform, bump:x0, stationary:+ / stationary:-, or file:path
    #[arg(long, default_value = "uniform")]
    pub init: String,
    #[arg(long = "T", default_value_t = 10.0)]
    #[serde(rename = "T")]
    pub t_final: f64,
    #[arg(long, default_value_t = pde::DEFAULT_DT)]
    pub dt: f64,
    #[arg(long = "K", default_value_t = pde::DEFAULT_ORDER)]
    #[serde(rename = "K")]
    pub order: usize,
    #[arg(long = "M", default_value_t = pde::DEFAULT_GRID)]
    #[serde(rename = "M")]
    pub grid: usize,
    #[arg(long, default_value_t = 0.1)]
    pub sample_interval: f64,
    /// Stop once the stationarity test passes.
    #[arg(long)]
    pub stop_when_stationary: bool,
    /// Write (t, x, rho) density snapshots here.
    #[arg(long)]
    pub snapshots: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct SpdeArgs {
    #[arg(long)]
    pub sigma: f64,
    #[arg(long, default_value_t = spde::DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = spde::DEFAULT_C)]
    pub c: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value = "uniform")]
    pub init: String,
    #[arg(long = "T", default_value_t = 10.0)]
    #[serde(rename = "T")]
    pub t_final: f64,
    #[arg(long, default_value_t = pde::DEFAULT_DT)]
    pub dt: f64,
    #[arg(long = "K", default_value_t = pde::DEFAULT_ORDER)]
    #[serde(rename = "K")]
    pub order: usize,
    /// Cutoff radius R of the truncated nonlinearity.
    #[arg(long)]
    pub truncate: Option<f64>,
    #[arg(long, default_value_t = 0.1)]
    pub sample_interval: f64,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ParticlesArgs {
    #[arg(long, default_value_t = 10_000)]
    pub n: usize,
    #[arg(long)]
    pub sigma: f64,
    #[arg(long = "T", default_value_t = 10.0)]
    #[serde(rename = "T")]
    pub t_final: f64,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = pde::DEFAULT_DT)]
    pub dt: f64,
    #[arg(long, default_value = "uniform")]
    pub init: String,
    #[arg(long, default_value_t = 0.1)]
    pub sample_interval: f64,
    /// Write a 64-bin histogram of the final positions here.
    #[arg(long)]
    pub histogram: Option<PathBuf>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ChaosArgs {
    #[arg(long, value_delimiter = ',', default_value = "1000,10000,100000")]
    pub n_list: Vec<usize>,
    #[arg(long, default_value_t = 8)]
    pub replicates: usize,
    #[arg(long, default_value_t = 0.9)]
    pub sigma: f64,
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T")]
    pub t_final: f64,
    #[arg(long, default_value = "uniform")]
    pub init: String,
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    #[arg(long, default_value_t = pde::DEFAULT_DT)]
    pub dt: f64,
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ControlArgs {
    #[arg(long)]
    pub sigma: f64,
    /// Initial state, same syntax as --init elsewhere.
    #[arg(long, default_value = "uniform")]
    pub from: String,
    #[arg(long, default_value = "stationary:+")]
    pub target: String,
    #[arg(long = "T", default_value_t = 1.0)]
    #[serde(rename = "T")]
    pub t_final: f64,
    #[arg(long, default_value_t = spde::DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = spde::DEFAULT_C)]
    pub c: f64,
    #[arg(long = "K", default_value_t = pde::DEFAULT_ORDER)]
    #[serde(rename = "K")]
    pub order: usize,
    #[arg(long, default_value_t = pde::DEFAULT_DT)]
    pub dt: f64,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct ErgodicityArgs {
    #[arg(long, value_delimiter = ',', default_value = "stationary:+,stationary:-")]
    pub inits: Vec<String>,
    /// Number of noise seeds.
    #[arg(long, default_value_t = 20)]
    pub samples: usize,
    #[arg(long, default_value_t = 0.6)]
    pub sigma: f64,
    #[arg(long, default_value_t = spde::DEFAULT_GAMMA)]
    pub gamma: f64,
    #[arg(long, default_value_t = spde::DEFAULT_C)]
    pub c: f64,
    #[arg(long = "T", default_value_t = 200.0)]
    #[serde(rename = "T")]
    pub t_final: f64,
    #[arg(long, default_value_t = 50.0)]
    pub window_start: f64,
    #[arg(long, default_value_t = 200.0)]
    pub window_end: f64,
    /// First seed; the others follow consecutively.
    #[arg(long, default_value_t = 0)]
    pub seed: u64,
    /// Switch the noise off.
    #[arg(long)]
    pub no_noise: bool,
    #[arg(long, default_value_t = pde::DEFAULT_DT)]
    pub dt: f64,
    #[arg(long = "K", default_value_t = pde::DEFAULT_ORDER)]
    #[serde(rename = "K")]
    pub order: usize,
    #[arg(long)]
    #[serde(skip)]
    pub threads: Option<usize>,
    #[arg(long, value_enum, default_value_t = Format::Json)]
    pub format: Format,
}

#[derive(Debug, Args, Serialize)]
#[serde(rename_all = "kebab-case")]
pub struct PhaseArgs {
    /// Explicit comma-separated sigma grid; overrides --from/--to/--points.
    #[arg(long, value_delimiter = ',')]
    pub grid: Option<Vec<f64>>,
    #[arg(long, default_value_t = 0.05)]
    pub from: f64,
    #[arg(long, default_value_t = 1.5)]
    pub to: f64,
    #[arg(long, default_value_t = 30)]
    pub points: usize,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum, default_value_t = Format::Csv)]
    pub format: Format,
}

/// Failure of a subcommand, mapped onto an exit code.
#[derive(Debug)]
pub enum CliError {
    Run(Error),
    Io(std::io::Error),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        CliError::Run(e)
    }
}

impl From<std::io::Error> for CliError {
    fn from(e: std::io::Error) -> Self {
        CliError::Io(e)
    }
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Run(e) if e.is_config() => EXIT_CONFIG,
            CliError::Run(_) => EXIT_NUMERICAL,
            CliError::Io(_) => EXIT_IO,
        }
    }
}

impl std::fmt::Display for CliError {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CliError::Run(e) => write!(f, "{e}"),
            CliError::Io(e) => write!(f, "I/O error: {e}"),
        }
    }
}

type CliResult = std::result::Result<(), CliError>;

/// Parses `argv` (program name first), runs the subcommand and returns
/// the exit code. Reports go to `out`, diagnostics to `err`.
pub fn run<I, T>(argv: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let argv: Vec<OsString> = argv.into_iter().map(Into::into).collect();
    let argv = match config::expand(argv) {
        Ok(a) => a,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            return EXIT_CONFIG;
        }
    };
    let cli = match Cli::try_parse_from(argv) {
        Ok(c) => c,
        Err(e) => {
            use clap::error::ErrorKind;
            return match e.kind() {
                ErrorKind::DisplayHelp | ErrorKind::DisplayVersion => {
                    let _ = write!(out, "{}", e.render());
                    EXIT_OK
                }
                _ => {
                    let _ = write!(err, "{}", e.render());
                    EXIT_CONFIG
                }
            };
        }
    };
    match dispatch(&cli.command, out) {
        Ok(()) => EXIT_OK,
        Err(e) => {
            let _ = writeln!(err, "error: {e}");
            e.exit_code()
        }
    }
}

/// Runs an already parsed command.
pub fn dispatch(cmd: &Command, out: &mut dyn Write) -> CliResult {
    match cmd {
        Command::SigmaC(a) => sigma_c(a, out),
        Command::Stationary(a) => stationary_cmd(a, out),
        Command::Pde(a) => pde_cmd(a, out),
        Command::Spde(a) => spde_cmd(a, out),
        Command::Particles(a) => particles_cmd(a, out),
        Command::Chaos(a) => chaos_cmd(a, out),
        Command::Control(a) => control_cmd(a, out),
        Command::Ergodicity(a) => ergodicity_cmd(a, out),
        Command::PhaseDiagram(a) => phase_cmd(a, out),
    }
}

fn config_echo<T: Serialize>(name: &str, args: &T) -> Value {
    let mut m = Map::new();
    m.insert("command".into(), Value::String(name.into()));
    if let Value::Object(o) = to_value(args) {
        m.extend(o.into_iter().filter(|(_, v)| !v.is_null()));
    }
    Value::Object(m)
}

/// `report` with the config echo appended.
fn with_config<T: Serialize>(report: Value, name: &str, args: &T) -> Value {
    let mut m = match report {
        Value::Object(o) => o,
        other => {
            let mut m = Map::new();
            m.insert("result".into(), other);
            m
        }
    };
    m.insert("config".into(), config_echo(name, args));
    Value::Object(m)
}

fn threads(requested: Option<usize>) -> usize {
    requested.unwrap_or_else(|| std::thread::available_parallelism().map_or(1, |n| n.get()))
}

fn parse_init(s: &str) -> Result<InitSpec, Error> {
    s.parse()
}

/// Writes CSV either to a file (and a JSON summary to `out`) or to `out`.
fn emit_csv(
    out: &mut dyn Write,
    explicit: Option<&Path>,
    default_name: &str,
    summary: Value,
    write: impl FnOnce(&mut dyn Write) -> std::io::Result<()>,
) -> CliResult {
    match output::resolve(explicit, default_name) {
        Some(path) => {
            let mut f = output::create(&path)?;
            write(&mut f)?;
            f.flush()?;
            let mut summary = summary;
            if let Value::Object(o) = &mut summary {
                o.insert("output".into(), Value::String(path.display().to_string()));
            }
            write_json(out, &summary)?;
        }
        None => write(out)?,
    }
    Ok(())
}

fn emit_json(out: &mut dyn Write, explicit: Option<&Path>, v: &Value) -> CliResult {
    match explicit {
        Some(path) => {
            let mut f = output::create(path)?;
            write_json(&mut f, v)?;
            f.flush()?;
        }
        None => write_json(out, v)?,
    }
    Ok(())
}

fn sigma_c(a: &SigmaCArgs, out: &mut dyn Write) -> CliResult {
    let r = bessel::find_sigma_c(a.tol)?;
    match a.format {
        Format::Json => write_json(out, &with_config(to_value(&r), "sigma-c", a))?,
        Format::Csv => writeln!(out, "sigma_c,residual,iterations\n{:.16e},{:.16e},{}", r.sigma_c, r.residual, r.iterations)?,
    }
    Ok(())
}

fn stationary_cmd(a: &StationaryArgs, out: &mut dyn Write) -> CliResult {
    let cfg = FixedPointConfig { residual_tol: a.tol, newton_grid: a.newton_grid, ..FixedPointConfig::default() };
    if let Some(sigma) = a.sigma {
        let r = stationary::find_fixed_points_with(sigma, &cfg)?;
        match a.format {
            Format::Json => write_json(out, &with_config(to_value(&r), "stationary", a))?,
            Format::Csv => {
                writeln!(out, "m1,m2,residual")?;
                for (m, res) in r.solutions.iter().zip(&r.residuals) {
                    writeln!(out, "{:.16e},{:.16e},{:.16e}", m.m1, m.m2, res)?;
                }
            }
        }
    } else {
        let sigmas = a.scan.as_deref().unwrap_or_default();
        let reports = sigmas
            .iter()
            .map(|&s| stationary::find_fixed_points_with(s, &cfg))
            .collect::<Result<Vec<_>, _>>()?;
        match a.format {
            Format::Json => write_json(out, &with_config(json!({ "reports": to_value(&reports) }), "stationary", a))?,
            Format::Csv => {
                writeln!(out, "sigma,count,m_star")?;
                for r in &reports {
                    writeln!(out, "{:.16e},{},{:.16e}", r.sigma, r.count, r.m_star.unwrap_or(0.0))?;
                }
            }
        }
    }
    Ok(())
}

fn phase_cmd(a: &PhaseArgs, out: &mut dyn Write) -> CliResult {
    let grid = match &a.grid {
        Some(g) if !g.is_empty() => g.clone(),
        Some(_) => return Err(Error::Config("empty sigma grid".into()).into()),
        None => {
            if a.points < 2 || !(a.from > 0.0 && a.to > a.from) {
                return Err(Error::Config("need 0 < from < to and at least two points".into()).into());
            }
            let h = (a.to - a.from) / (a.points - 1) as f64;
            (0..a.points).map(|i| a.from + h * i as f64).collect()
        }
    };
    let rows = stationary::phase_scan(&grid)?;
    match a.format {
        Format::Json => emit_json(out, a.out.as_deref(), &with_config(json!({ "rows": to_value(&rows) }), "phase-diagram", a)),
        Format::Csv => {
            let summary = with_config(json!({ "rows": rows.len() }), "phase-diagram", a);
            emit_csv(out, a.out.as_deref(), "phase_diagram.csv", summary, |w| {
                writeln!(w, "sigma,count,m_star_on_M2,zeta_prime0,f_c")?;
                for r in &rows {
                    writeln!(w, "{:.16e},{},{:.16e},{:.16e},{:.16e}", r.sigma, r.count, r.m_star, r.zeta_prime0, r.f_c)?;
                }
                Ok(())
            })
        }
    }
}

fn pde_config(sigma: f64, order: usize, grid: usize, dt: f64, t_final: f64, sample_interval: f64) -> PdeConfig {
    PdeConfig {
        order,
        grid,
        dt,
        t_final,
        sample_interval,
        v: pde::default_v(order),
        f: pde::default_f(order),
        ..PdeConfig::new(sigma)
    }
}

fn pde_cmd(a: &PdeArgs, out: &mut dyn Write) -> CliResult {
    let mut cfg = pde_config(a.sigma, a.order, a.grid, a.dt, a.t_final, a.sample_interval);
    cfg.stop_when_stationary = a.stop_when_stationary;
    cfg.validate()?;
    let rho0 = parse_init(&a.init)?.to_field(a.sigma, a.order)?;
    let traj = pde::evolve_with(&rho0, &cfg, a.snapshots.is_some())?;
    if let Some(path) = &a.snapshots {
        let mut f = output::create(path)?;
        traj.write_snapshots_csv(&mut f)?;
        f.flush()?;
    }
    let last = traj.samples.last().expect("at least the initial sample");
    let summary = json!({
        "t": num17(traj.final_state.t),
        "m1": num17(last.m1),
        "m2": num17(last.m2),
        "mass_drift": num17(traj.mass_drift),
        "min_value": num17(traj.min_value),
        "l2_residual": num17(last.l2_residual),
        "stationary_at": traj.stationary_at.map_or(Value::Null, num17),
    });
    let summary = with_config(summary, "pde", a);
    match a.format {
        Format::Json => {
            let mut v = summary;
            v["samples"] = to_value(&traj.samples);
            emit_json(out, a.out.as_deref(), &v)
        }
        Format::Csv => emit_csv(out, a.out.as_deref(), "pde.csv", summary, |w| traj.write_csv(w)),
    }
}

fn spde_cmd(a: &SpdeArgs, out: &mut dyn Write) -> CliResult {
    let pcfg = pde_config(a.sigma, a.order, (3 * a.order + 2).max(pde::DEFAULT_GRID), a.dt, a.t_final, a.sample_interval);
    let q = CovarianceSpec::power_law(a.order, a.c, a.gamma)?;
    let cfg = SpdeConfig { truncation: a.truncate, ..SpdeConfig::new(pcfg, q.clone(), a.seed) };
    cfg.validate()?;
    let u0 = parse_init(&a.init)?.to_field(a.sigma, a.order)?;
    let traj = spde::evolve(&u0, &cfg)?;
    let last = traj.samples.last().expect("at least the initial sample");
    let summary = with_config(
        json!({
            "t": num17(traj.final_state.t),
            "m1": num17(last.m1),
            "m2": num17(last.m2),
            "l2_norm": num17(last.l2_norm),
            "mass_mode": num17(last.mass_mode),
            "trace_q": num17(q.trace()),
            "strong_feller": a.gamma < 1.0,
        }),
        "spde",
        a,
    );
    match a.format {
        Format::Json => {
            let mut v = summary;
            v["samples"] = to_value(&traj.samples);
            emit_json(out, a.out.as_deref(), &v)
        }
        Format::Csv => emit_csv(out, a.out.as_deref(), "spde.csv", summary, |w| traj.write_csv(w)),
    }
}

fn particles_cmd(a: &ParticlesArgs, out: &mut dyn Write) -> CliResult {
    let cfg = ParticleConfig { dt: a.dt, ..ParticleConfig::new(a.sigma) };
    cfg.validate()?;
    let init = parse_init(&a.init)?;
    let mut ens = ParticleEnsemble::sample(&init, a.n, a.sigma, a.seed)?;
    let stride = ((a.sample_interval / a.dt).round() as usize).max(1);
    let samples = particles::simulate(&mut ens, &cfg, a.t_final, stride)?;
    if let Some(path) = &a.histogram {
        let h = ens.histogram(64);
        let width = std::f64::consts::TAU / h.len() as f64;
        let mut f = output::create(path)?;
        writeln!(f, "x,density")?;
        for (i, v) in h.iter().enumerate() {
            writeln!(f, "{:.16e},{:.16e}", (i as f64 + 0.5) * width, v)?;
        }
        f.flush()?;
    }
    let last = samples.last().expect("at least the initial sample");
    let summary = with_config(json!({ "t": num17(last.t), "m1_emp": num17(last.m1_emp), "m2_emp": num17(last.m2_emp) }), "particles", a);
    match a.format {
        Format::Json => {
            let mut v = summary;
            v["samples"] = to_value(&samples);
            emit_json(out, a.out.as_deref(), &v)
        }
        Format::Csv => emit_csv(out, a.out.as_deref(), "particles.csv", summary, |w| {
            writeln!(w, "t,m1_emp,m2_emp")?;
            for s in &samples {
                writeln!(w, "{:.16e},{:.16e},{:.16e}", s.t, s.m1_emp, s.m2_emp)?;
            }
            Ok(())
        }),
    }
}

fn chaos_cmd(a: &ChaosArgs, out: &mut dyn Write) -> CliResult {
    let cfg = ParticleConfig { dt: a.dt, ..ParticleConfig::new(a.sigma) };
    let init = parse_init(&a.init)?;
    let r = particles::chaos_compare(&a.n_list, &cfg, &init, a.t_final, a.replicates, a.seed, threads(a.threads))?;
    match a.format {
        Format::Json => write_json(out, &with_config(to_value(&r), "chaos", a))?,
        Format::Csv => {
            writeln!(out, "n,rms_error")?;
            for row in &r.rows {
                writeln!(out, "{},{:.16e}", row.n, row.rms_error)?;
            }
        }
    }
    Ok(())
}

fn control_cmd(a: &ControlArgs, out: &mut dyn Write) -> CliResult {
    let cfg = pde_config(a.sigma, a.order, (3 * a.order + 2).max(pde::DEFAULT_GRID), a.dt, a.t_final, a.t_final);
    cfg.validate()?;
    let q = CovarianceSpec::power_law(a.order, a.c, a.gamma)?;
    let y0 = parse_init(&a.from)?.to_field(a.sigma, a.order)?;
    let y1 = parse_init(&a.target)?.to_field(a.sigma, a.order)?;
    let control = spde::build_control(&y0, &y1, a.t_final, &q, &cfg)?;
    let end = spde::run_controlled(&control, &cfg)?;
    let err = end.l2_distance(&y1);
    let f_norm = |t: f64| control.f(t).l2_norm();
    let report = json!({
        "endpoint_error": num17(err),
        "initial_distance": num17(y0.l2_distance(&y1)),
        "control_norm_start": num17(f_norm(0.0)),
        "control_norm_end": num17(f_norm(a.t_final)),
    });
    match a.format {
        Format::Json => write_json(out, &with_config(report, "control", a))?,
        Format::Csv => writeln!(out, "endpoint_error\n{err:.16e}")?,
    }
    Ok(())
}

fn ergodicity_cmd(a: &ErgodicityArgs, out: &mut dyn Write) -> CliResult {
    if a.inits.len() != 2 {
        return Err(Error::Config(format!("--inits needs exactly two initial data, got {}", a.inits.len())).into());
    }
    let pcfg = pde_config(a.sigma, a.order, (3 * a.order + 2).max(pde::DEFAULT_GRID), a.dt, a.t_final, 1.0);
    let q = if a.no_noise { CovarianceSpec::zero(a.order) } else { CovarianceSpec::power_law(a.order, a.c, a.gamma)? };
    let cfg = SpdeConfig::new(pcfg, q, a.seed);
    let fields: Vec<SpectralField> = a
        .inits
        .iter()
        .map(|s| parse_init(s)?.to_field(a.sigma, a.order))
        .collect::<Result<_, _>>()?;
    let seeds: Vec<u64> = (0..a.samples as u64).map(|i| a.seed + i).collect();
    let stats = spde::ergodicity_experiment(&fields[0], &fields[1], &cfg, &seeds, (a.window_start, a.window_end), threads(a.threads))?;
    match a.format {
        Format::Json => write_json(out, &with_config(to_value(&stats), "ergodicity", a))?,
        Format::Csv => {
            writeln!(out, "seed,m2_a,m2_b")?;
            for ((s, x), y) in stats.seeds.iter().zip(&stats.m2_a).zip(&stats.m2_b) {
                writeln!(out, "{s},{x:.16e},{y:.16e}")?;
            }
        }
    }
    Ok(())
}
