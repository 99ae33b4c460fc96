//! Command-line front end. [`run`] parses arguments, dispatches one
//! subcommand and returns the process exit code: 0 on success, 1 when the
//! computation fails, 2 for usage errors.

use std::ffi::OsString;
use std::fs::File;
use std::io::{self, BufWriter, Write};
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use rayon::prelude::*;
use serde::Serialize;
use serde_json::{json, Value};
use thiserror::Error;

use crate::averaging::{find_root, predict_cycle_seed, root_closed_form, stability};
use crate::darboux::{
    darboux_obstruction, search_darboux_fixed_cofactor, sweep_darboux, verify_darboux,
    verify_exponential_factor, Branch, BranchField,
};
use crate::dynamics::{integrate, Mode, State, SystemParams, DEFAULT_TOL};
use crate::equilibria::{classify_first_integral, nonresonance_check, write_table, EquilibriumReport, Resonance};
use crate::limitcycle::{cycle_orbit, floquet, refine_cycle, CycleResult, FloquetReport, SHOOTING_TOL};
use crate::polyalg::{parse_rational, Poly3, Rat};

pub const SCHEMA_VERSION: u32 = 1;

/// Perturbation scale used when a command needs one and none is given.
pub const REFERENCE_EPS: f64 = 1e-4;
pub const DESK_EPS: f64 = 1e-3;

#[derive(Debug, Error)]
pub enum CliError {
    #[error("usage: {0}")]
    Usage(String),
    #[error("{0}")]
    Domain(String),
    #[error("i/o: {0}")]
    Io(#[from] io::Error),
}

impl CliError {
    pub fn exit_code(&self) -> i32 {
        match self {
            CliError::Usage(_) => 2,
            CliError::Domain(_) | CliError::Io(_) => 1,
        }
    }
}

impl From<csv::Error> for CliError {
    fn from(e: csv::Error) -> Self {
        CliError::Io(io::Error::other(e))
    }
}

fn domain<E: std::fmt::Display>(e: E) -> CliError {
    CliError::Domain(e.to_string())
}

#[derive(Parser, Debug)]
#[command(name = "zerohopf", version, about = "Zero-Hopf limit cycles and Darboux integrability toolkit")]
pub struct Cli {
    /// Emit a versioned JSON report instead of plain text.
    #[arg(long, global = true)]
    json: bool,
    /// JSON object of option values; flags given on the command line win.
    #[arg(long, global = true, value_name = "FILE")]
    config: Option<PathBuf>,
    /// Worker threads for sweeps.
    #[arg(long, global = true, default_value_t = 1)]
    jobs: usize,
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand, Debug)]
enum Command {
    /// Integrate the full system or one smooth branch.
    Simulate(SimulateArgs),
    /// Root and stability data of the averaged system.
    Average(AverageArgs),
    /// Refine the periodic orbit by shooting and report its multipliers.
    Cycle(CycleArgs),
    /// Exact Darboux checks on one smooth branch.
    #[command(subcommand)]
    Darboux(DarbouxCommand),
    /// Spectra and first-integral classification along the equilibrium line.
    Equilibria(EquilibriaArgs),
    /// Trajectory at eps = 1e-4 plus the averaged and shooting reports.
    #[command(name = "reproduce-fig1")]
    ReproduceReference(ReferenceRunArgs),
}

#[derive(Args, Debug, Clone)]
struct ParamArgs {
    #[arg(long, allow_hyphen_values = true)]
    a: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    b: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    c: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    eps: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    beta: Option<f64>,
}

impl ParamArgs {
    fn resolve(&self, default_eps: Option<f64>) -> Result<SystemParams, CliError> {
        let a = self.a.ok_or_else(|| CliError::Usage("--a is required".into()))?;
        let c = self.c.unwrap_or(0.0);
        let p = match (self.eps, self.beta) {
            (eps, Some(beta)) => {
                let eps = eps
                    .or(default_eps)
                    .ok_or_else(|| CliError::Usage("--beta requires --eps".into()))?;
                let p = SystemParams::perturbed(a, c, eps, beta);
                if let Some(b) = self.b {
                    if b != p.b {
                        return Err(CliError::Usage(format!("--b {b} conflicts with eps * beta = {}", p.b)));
                    }
                }
                p
            }
            (Some(_), None) => return Err(CliError::Usage("--eps requires --beta".into())),
            (None, None) => SystemParams::new(a, self.b.unwrap_or(0.0), c),
        };
        p.validate().map_err(|e| CliError::Usage(e.to_string()))?;
        Ok(p)
    }
}

#[derive(Copy, Clone, Debug, ValueEnum)]
enum ModeArg {
    Full,
    Upper,
    Lower,
}

impl From<ModeArg> for Mode {
    fn from(m: ModeArg) -> Mode {
        match m {
            ModeArg::Full => Mode::Full,
            ModeArg::Upper => Mode::Branch(Branch::Upper),
            ModeArg::Lower => Mode::Branch(Branch::Lower),
        }
    }
}

#[derive(Args, Debug)]
struct SimulateArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Initial state; defaults to the predicted cycle seed when eps and beta are set.
    #[arg(long, allow_hyphen_values = true)]
    x0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    y0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    tmax: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, allow_hyphen_values = true, value_enum, default_value = "full")]
    mode: ModeArg,
    /// Trajectory CSV (t,x,y,z); stdout when omitted in text mode.
    #[arg(long, allow_hyphen_values = true)]
    out: Option<PathBuf>,
    /// Crossings of y = 0 as CSV (t,x,z).
    #[arg(long, allow_hyphen_values = true)]
    crossings: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct AverageArgs {
    #[command(flatten)]
    params: ParamArgs,
}

#[derive(Args, Debug)]
struct CycleArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Integrator tolerance for the return map.
    #[arg(long, allow_hyphen_values = true, default_value_t = SHOOTING_TOL)]
    tol: f64,
    /// Comma-separated eps values refined independently.
    #[arg(long, allow_hyphen_values = true, value_delimiter = ',')]
    sweep_eps: Vec<f64>,
    /// One period of the refined orbit as CSV (t,x,y,z).
    #[arg(long, allow_hyphen_values = true)]
    orbit: Option<PathBuf>,
}

#[derive(Args, Debug, Clone)]
struct ExactParams {
    /// +1 selects the branch y >= 0, -1 the branch y < 0.
    #[arg(long, allow_hyphen_values = true, default_value_t = 1)]
    sigma: i64,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    a: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    b: String,
    #[arg(long, allow_hyphen_values = true, default_value = "0")]
    c: String,
}

impl ExactParams {
    fn field(&self) -> Result<BranchField, CliError> {
        let branch = Branch::from_sigma(self.sigma)
            .ok_or_else(|| CliError::Usage(format!("--sigma must be +1 or -1, got {}", self.sigma)))?;
        let q = |name: &str, s: &str| -> Result<Rat, CliError> {
            parse_rational(s).map_err(|e| CliError::Usage(format!("--{name}: {e}")))
        };
        Ok(BranchField::new(branch, q("a", &self.a)?, q("b", &self.b)?, q("c", &self.c)?))
    }
}

fn poly_arg(name: &str, s: &str) -> Result<Poly3, CliError> {
    Poly3::parse(s).map_err(|e| CliError::Usage(format!("--{name}: {e}")))
}

#[derive(Subcommand, Debug)]
enum DarbouxCommand {
    /// Check X(f) = K f.
    Verify {
        #[command(flatten)]
        params: ExactParams,
        #[arg(long, allow_hyphen_values = true)]
        f: String,
        #[arg(long = "K", allow_hyphen_values = true)]
        k: String,
    },
    /// Darboux polynomials up to a degree for a fixed cofactor, or for
    /// K = z, 2z, ... when no cofactor is given.
    Search {
        #[command(flatten)]
        params: ExactParams,
        #[arg(long, allow_hyphen_values = true)]
        degree: u32,
        #[arg(long = "K", allow_hyphen_values = true)]
        k: Option<String>,
    },
    /// Check exp(g/h) with cofactor L.
    Expfactor {
        #[command(flatten)]
        params: ExactParams,
        #[arg(long, allow_hyphen_values = true)]
        g: String,
        #[arg(long, allow_hyphen_values = true, default_value = "1")]
        h: String,
        #[arg(long = "L", allow_hyphen_values = true)]
        l: String,
    },
    /// Linear relations among cofactors; empty means no Darboux first integral.
    Obstruction {
        #[arg(long = "K", allow_hyphen_values = true, value_delimiter = ',')]
        k: Vec<String>,
        #[arg(long = "L", allow_hyphen_values = true, value_delimiter = ',')]
        l: Vec<String>,
    },
}

#[derive(Args, Debug)]
struct EquilibriaArgs {
    #[command(flatten)]
    params: ParamArgs,
    /// Single z0; otherwise the grid below is used.
    #[arg(long, allow_hyphen_values = true)]
    z0: Option<f64>,
    #[arg(long, allow_hyphen_values = true, default_value_t = -5.0)]
    z0_min: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 5.0)]
    z0_max: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 101)]
    points: usize,
    #[arg(long, allow_hyphen_values = true, default_value_t = 64)]
    kmax: u32,
    /// Table CSV; stdout when omitted in text mode.
    #[arg(long, allow_hyphen_values = true)]
    out: Option<PathBuf>,
}

#[derive(Args, Debug)]
struct ReferenceRunArgs {
    #[arg(long, allow_hyphen_values = true, default_value_t = 2.5)]
    a: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 9.0)]
    c: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 2.0)]
    beta: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = REFERENCE_EPS)]
    eps: f64,
    /// Scale used for shooting and multipliers.
    #[arg(long, allow_hyphen_values = true, default_value_t = DESK_EPS)]
    cycle_eps: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = 200.0)]
    tmax: f64,
    #[arg(long, allow_hyphen_values = true, default_value_t = DEFAULT_TOL)]
    tol: f64,
    #[arg(long, allow_hyphen_values = true, default_value = "reference-run")]
    out_dir: PathBuf,
}

/// Appends `--key value` for every config entry whose flag is absent from
/// `args`.
fn merge_config(mut args: Vec<OsString>) -> Result<Vec<OsString>, CliError> {
    let Some(pos) = args.iter().position(|a| a == "--config") else {
        return Ok(args);
    };
    let path = args
        .get(pos + 1)
        .ok_or_else(|| CliError::Usage("--config needs a path".into()))?
        .clone();
    let text = std::fs::read_to_string(&path)
        .map_err(|e| CliError::Usage(format!("--config {}: {e}", Path::new(&path).display())))?;
    let value: Value =
        serde_json::from_str(&text).map_err(|e| CliError::Usage(format!("--config: {e}")))?;
    let Value::Object(map) = value else {
        return Err(CliError::Usage("--config: expected a JSON object".into()));
    };
    args.drain(pos..pos + 2);
    for (key, v) in map {
        let flag = format!("--{}", key.replace('_', "-"));
        if args.iter().any(|a| a == flag.as_str()) {
            continue;
        }
        match v {
            Value::Bool(true) => args.push(flag.into()),
            Value::Bool(false) | Value::Null => {}
            Value::Number(n) => {
                args.push(flag.into());
                args.push(n.to_string().into());
            }
            Value::String(s) => {
                args.push(flag.into());
                args.push(s.into());
            }
            Value::Array(items) => {
                let parts: Vec<String> = items
                    .iter()
                    .map(|i| match i {
                        Value::String(s) => s.clone(),
                        other => other.to_string(),
                    })
                    .collect();
                args.push(flag.into());
                args.push(parts.join(",").into());
            }
            Value::Object(_) => return Err(CliError::Usage(format!("--config: {key} must not be an object"))),
        }
    }
    Ok(args)
}

/// Parses `args` (program name first), runs the command and returns the
/// exit code. Reports go to `out`, diagnostics to stderr.
pub fn run<I, T>(args: I, out: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString>,
{
    let args: Vec<OsString> = args.into_iter().map(Into::into).collect();
    let cli = match merge_config(args).map(Cli::try_parse_from) {
        Ok(Ok(cli)) => cli,
        Ok(Err(e)) => {
            let code = if e.use_stderr() { 2 } else { 0 };
            let _ = e.print();
            return code;
        }
        Err(e) => {
            eprintln!("error: {e}");
            return e.exit_code();
        }
    };
    match dispatch(&cli, out) {
        Ok(()) => 0,
        Err(e) => {
            eprintln!("error: {e}");
            e.exit_code()
        }
    }
}

fn dispatch(cli: &Cli, out: &mut dyn Write) -> Result<(), CliError> {
    if cli.jobs == 0 {
        return Err(CliError::Usage("--jobs must be at least 1".into()));
    }
    match &cli.command {
        Command::Simulate(a) => simulate(cli, a, out),
        Command::Average(a) => average(cli, a, out),
        Command::Cycle(a) => cycle(cli, a, out),
        Command::Darboux(d) => darboux(cli, d, out),
        Command::Equilibria(a) => equilibria(cli, a, out),
        Command::ReproduceReference(a) => reproduce_reference(cli, a, out),
    }
}

fn envelope(command: &str, body: Value) -> Value {
    let mut v = json!({ "schema": format!("zerohopf/{command}/v{SCHEMA_VERSION}") });
    if let (Value::Object(dst), Value::Object(src)) = (&mut v, body) {
        dst.extend(src);
    }
    v
}

fn emit_json(out: &mut dyn Write, command: &str, body: Value) -> Result<(), CliError> {
    serde_json::to_writer_pretty(&mut *out, &envelope(command, body)).map_err(io::Error::other)?;
    writeln!(out)?;
    Ok(())
}

fn create(path: &Path) -> Result<BufWriter<File>, CliError> {
    if let Some(dir) = path.parent().filter(|d| !d.as_os_str().is_empty()) {
        std::fs::create_dir_all(dir)?;
    }
    Ok(BufWriter::new(File::create(path)?))
}

fn pool(jobs: usize) -> Result<rayon::ThreadPool, CliError> {
    rayon::ThreadPoolBuilder::new()
        .num_threads(jobs)
        .build()
        .map_err(|e| CliError::Domain(e.to_string()))
}

fn simulate(cli: &Cli, args: &SimulateArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = args.params.resolve(None)?;
    let s0 = match (args.x0, args.y0, args.z0) {
        (None, None, None) if p.eps.is_some() => predict_cycle_seed(&p).map_err(domain)?.state,
        (None, None, None) => {
            return Err(CliError::Usage("--x0/--y0/--z0 required without --eps/--beta".into()))
        }
        (x, y, z) => State::new(x.unwrap_or(0.0), y.unwrap_or(0.0), z.unwrap_or(0.0)),
    };
    let traj = integrate(&s0, &p, args.mode.into(), args.tmax, args.tol).map_err(domain)?;
    if let Some(path) = &args.out {
        traj.write_csv(create(path)?)?;
    }
    if let Some(path) = &args.crossings {
        traj.write_crossings_csv(create(path)?)?;
    }
    if cli.json {
        emit_json(
            out,
            "simulate",
            json!({
                "params": p,
                "initial": s0,
                "final": traj.last(),
                "samples": traj.samples.len(),
                "crossings": traj.crossings.len(),
                "stats": traj.stats,
            }),
        )
    } else if args.out.is_none() {
        traj.write_csv(out)?;
        Ok(())
    } else {
        writeln!(out, "samples {} crossings {}", traj.samples.len(), traj.crossings.len())?;
        Ok(())
    }
}

fn average_report(p: &SystemParams) -> Result<Value, CliError> {
    let guess = root_closed_form(p).map_err(domain)?;
    let root = find_root(p, (guess.0.max(1.0), 1.0)).map_err(domain)?;
    let stab = stability(&root, p).map_err(domain)?;
    Ok(json!({
        "params": p,
        "r_star": root.r_star,
        "w_star": root.w_star,
        "root": root,
        "stability": stab,
    }))
}

fn average(cli: &Cli, args: &AverageArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = args.params.resolve(Some(REFERENCE_EPS))?;
    let report = average_report(&p)?;
    if cli.json {
        return emit_json(out, "average", report);
    }
    let r = &report["root"];
    let s = &report["stability"];
    writeln!(out, "r_star {}", r["r_star"])?;
    writeln!(out, "w_star {}", r["w_star"])?;
    writeln!(out, "det {}", s["det"])?;
    writeln!(out, "claimed_det {}", s["claimed_det"])?;
    writeln!(out, "eigenvalues {}", s["eigenvalues"])?;
    writeln!(out, "magnitude_matches_claim {}", s["claim_magnitude_match"])?;
    Ok(())
}

#[derive(Serialize)]
struct CycleEntry {
    eps: f64,
    cycle: CycleResult,
    floquet: FloquetReport,
}

fn run_cycle(p: &SystemParams, tol: f64) -> Result<CycleEntry, CliError> {
    let seed = predict_cycle_seed(p).map_err(domain)?;
    let cycle = refine_cycle([seed.state.x, seed.state.z], p, tol).map_err(domain)?;
    let floquet = floquet(&cycle, p).map_err(domain)?;
    Ok(CycleEntry { eps: p.eps.unwrap_or(0.0), cycle, floquet })
}

fn write_cycle_text(out: &mut dyn Write, e: &CycleEntry) -> io::Result<()> {
    let c = &e.cycle;
    writeln!(
        out,
        "eps {} x {} z {} period {} residual {:e} multipliers {} {}i, {} {}i verdict {} (claimed {})",
        e.eps,
        c.section_point[0],
        c.section_point[1],
        c.period,
        c.residual,
        c.multipliers[0].re,
        c.multipliers[0].im,
        c.multipliers[1].re,
        c.multipliers[1].im,
        e.floquet.verdict_text,
        e.floquet.claimed
    )
}

fn cycle(cli: &Cli, args: &CycleArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let base = args.params.resolve(Some(DESK_EPS))?;
    let beta = base
        .beta
        .ok_or_else(|| CliError::Usage("--beta is required".into()))?;
    let scales: Vec<f64> = if args.sweep_eps.is_empty() {
        vec![base.eps.unwrap_or(DESK_EPS)]
    } else {
        args.sweep_eps.clone()
    };
    let params: Vec<SystemParams> = scales
        .iter()
        .map(|&eps| {
            let p = SystemParams::perturbed(base.a, base.c, eps, beta);
            p.validate().map_err(|e| CliError::Usage(e.to_string())).map(|_| p)
        })
        .collect::<Result<_, _>>()?;
    let results: Vec<Result<CycleEntry, CliError>> =
        pool(cli.jobs)?.install(|| params.par_iter().map(|p| run_cycle(p, args.tol)).collect());
    let entries: Vec<CycleEntry> = results.into_iter().collect::<Result<_, _>>()?;
    if let Some(path) = &args.orbit {
        let orbit = cycle_orbit(&entries[0].cycle, &params[0], args.tol).map_err(domain)?;
        orbit.write_csv(create(path)?)?;
    }
    if cli.json {
        return emit_json(out, "cycle", json!({ "a": base.a, "c": base.c, "beta": beta, "results": entries }));
    }
    for e in &entries {
        write_cycle_text(out, e)?;
    }
    Ok(())
}

fn darboux(cli: &Cli, cmd: &DarbouxCommand, out: &mut dyn Write) -> Result<(), CliError> {
    match cmd {
        DarbouxCommand::Verify { params, f, k } => {
            let vf = params.field()?;
            let v = verify_darboux(&vf, &poly_arg("f", f)?, &poly_arg("K", k)?).map_err(domain)?;
            if cli.json {
                return emit_json(out, "darboux-verify", json!({ "sigma": params.sigma, "verdict": v }));
            }
            writeln!(out, "{}", if v.passed { "passed" } else { "failed" })?;
            writeln!(out, "residual {}", v.residual)?;
        }
        DarbouxCommand::Search { params, degree, k } => {
            let vf = params.field()?;
            let found: Vec<(Poly3, Vec<Poly3>)> = match k {
                Some(k) => {
                    let k = poly_arg("K", k)?;
                    let basis = search_darboux_fixed_cofactor(&vf, *degree, &k).map_err(domain)?;
                    vec![(k, basis)]
                }
                None => sweep_darboux(&vf, *degree, &[]).map_err(domain)?,
            };
            if cli.json {
                let rows: Vec<Value> = found
                    .iter()
                    .map(|(k, b)| json!({ "cofactor": k, "basis": b }))
                    .collect();
                return emit_json(
                    out,
                    "darboux-search",
                    json!({ "sigma": params.sigma, "degree": degree, "results": rows }),
                );
            }
            for (k, basis) in &found {
                let list: Vec<String> = basis.iter().map(ToString::to_string).collect();
                writeln!(out, "K = {k}: [{}]", list.join(", "))?;
            }
        }
        DarbouxCommand::Expfactor { params, g, h, l } => {
            let vf = params.field()?;
            let v = verify_exponential_factor(&vf, &poly_arg("g", g)?, &poly_arg("h", h)?, &poly_arg("L", l)?)
                .map_err(domain)?;
            if cli.json {
                return emit_json(out, "darboux-expfactor", json!({ "sigma": params.sigma, "verdict": v }));
            }
            writeln!(out, "{}", if v.passed { "passed" } else { "failed" })?;
            writeln!(out, "residual {}", v.residual)?;
        }
        DarbouxCommand::Obstruction { k, l } => {
            let ks: Vec<Poly3> = k.iter().map(|s| poly_arg("K", s)).collect::<Result<_, _>>()?;
            let ls: Vec<Poly3> = l.iter().map(|s| poly_arg("L", s)).collect::<Result<_, _>>()?;
            let basis = darboux_obstruction(&ks, &ls).map_err(domain)?;
            let text: Vec<Vec<String>> = basis
                .iter()
                .map(|v| v.iter().map(ToString::to_string).collect())
                .collect();
            if cli.json {
                return emit_json(
                    out,
                    "darboux-obstruction",
                    json!({ "cofactors": ks, "exp_cofactors": ls, "relations": text, "obstructed": text.is_empty() }),
                );
            }
            if text.is_empty() {
                writeln!(out, "no relation")?;
            }
            for v in text {
                writeln!(out, "[{}]", v.join(", "))?;
            }
        }
    }
    Ok(())
}

#[derive(Serialize)]
struct EquilibriumRow {
    #[serde(flatten)]
    report: EquilibriumReport,
    resonance: Resonance,
}

fn equilibria(cli: &Cli, args: &EquilibriaArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = args.params.resolve(None)?;
    if args.kmax > crate::equilibria::MAX_KMAX {
        return Err(CliError::Usage(format!("--kmax must be at most {}", crate::equilibria::MAX_KMAX)));
    }
    let grid: Vec<f64> = match args.z0 {
        Some(z) => vec![z],
        None => {
            if args.points < 2 || !(args.z0_max > args.z0_min) {
                return Err(CliError::Usage("grid needs --points >= 2 and --z0-max > --z0-min".into()));
            }
            let step = (args.z0_max - args.z0_min) / (args.points - 1) as f64;
            (0..args.points).map(|i| args.z0_min + step * i as f64).collect()
        }
    };
    let rows: Vec<EquilibriumRow> = pool(cli.jobs)?.install(|| {
        grid.par_iter()
            .map(|&z0| EquilibriumRow {
                report: classify_first_integral(z0, &p),
                resonance: nonresonance_check(z0, &p, args.kmax),
            })
            .collect()
    });
    let reports: Vec<EquilibriumReport> = rows.iter().map(|r| r.report.clone()).collect();
    if let Some(path) = &args.out {
        write_table(&reports, create(path)?)?;
    }
    if cli.json {
        return emit_json(out, "equilibria", json!({ "params": p, "kmax": args.kmax, "rows": rows }));
    }
    if args.out.is_none() {
        write_table(&reports, out)?;
    } else {
        writeln!(out, "rows {}", reports.len())?;
    }
    Ok(())
}

fn reproduce_reference(cli: &Cli, args: &ReferenceRunArgs, out: &mut dyn Write) -> Result<(), CliError> {
    let p = SystemParams::perturbed(args.a, args.c, args.eps, args.beta);
    let desk = SystemParams::perturbed(args.a, args.c, args.cycle_eps, args.beta);
    for q in [&p, &desk] {
        q.validate().map_err(|e| CliError::Usage(e.to_string()))?;
    }
    let dir = &args.out_dir;
    std::fs::create_dir_all(dir)?;

    let seed = predict_cycle_seed(&p).map_err(domain)?;
    let traj = integrate(&seed.state, &p, Mode::Full, args.tmax, args.tol).map_err(domain)?;
    traj.write_csv(create(&dir.join("trajectory.csv"))?)?;
    traj.write_crossings_csv(create(&dir.join("crossings.csv"))?)?;

    let avg = average_report(&p)?;
    let entry = run_cycle(&desk, SHOOTING_TOL)?;
    let orbit = cycle_orbit(&entry.cycle, &desk, SHOOTING_TOL).map_err(domain)?;
    orbit.write_csv(create(&dir.join("cycle_orbit.csv"))?)?;

    let report = envelope(
        "reproduce-fig1",
        json!({
            "trajectory": {
                "params": p,
                "initial": seed.state,
                "samples": traj.samples.len(),
                "crossings": traj.crossings.len(),
                "final": traj.last(),
            },
            "average": avg,
            "cycle": entry,
        }),
    );
    let mut f = create(&dir.join("report.json"))?;
    serde_json::to_writer_pretty(&mut f, &report).map_err(io::Error::other)?;
    writeln!(f)?;
    f.flush()?;

    if cli.json {
        serde_json::to_writer_pretty(&mut *out, &report).map_err(io::Error::other)?;
        writeln!(out)?;
    } else {
        writeln!(out, "seed x {} period estimate {}", seed.state.x, seed.period_estimate)?;
        writeln!(out, "trajectory samples {} crossings {}", traj.samples.len(), traj.crossings.len())?;
        write_cycle_text(out, &entry)?;
        writeln!(out, "written to {}", dir.display())?;
    }
    Ok(())
}
