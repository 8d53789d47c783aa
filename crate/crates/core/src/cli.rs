//! Command-line front end. [`run`] parses arguments, merges an optional
//! config file, dispatches and returns the process exit status.

use std::collections::BTreeMap;
use std::ffi::OsString;
use std::io::Write;

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;
use serde_json::{json, Value};

use crate::closedform::{self, IrMode, LinearLogCoefficient, THETA_EPS};
use crate::error::Error;
use crate::fockspace::{FockBasis, ModeGrid};
use crate::model::{ModelParams, ScaleFrame};
use crate::observables::GroundStateReport;
use crate::quadrature;
use crate::spectral::assemble::Variant;
use crate::spectral::identities::effective_mass_numeric;
use crate::spectral::solve::{reference_state, solve_ground, SolveOptions};
use crate::verify::{self, BoundReport, Resolution, Status, SuiteConfig, CHECKS};

pub const EXIT_OK: i32 = 0;
pub const EXIT_CHECK_FAILED: i32 = 1;
pub const EXIT_USAGE: i32 = 2;
pub const EXIT_INTERNAL: i32 = 3;

#[derive(Debug, Parser)]
#[command(name = "nelson", version, about = "Numerical checks for the cutoff Nelson Hamiltonian")]
struct Cli {
    #[command(subcommand)]
    command: Command,
    #[command(flatten)]
    opts: Flags,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Subcommand, Serialize)]
#[serde(rename_all = "snake_case")]
enum Command {
    /// Coupling window and every closed-form constant.
    Constants,
    /// Momentum-space integrals next to their closed-form ceilings.
    Integrals,
    /// Ground state and its observables.
    Solve,
    /// Inequality suite.
    Verify,
    /// Inequality suite over a parameter axis.
    Scan,
    /// Effective mass from the fiber Hamiltonian against perturbation theory.
    Effmass,
    /// Second-order binding-energy expansion.
    Binding,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Format {
    Json,
    Csv,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    E,
    #[value(name = "Z")]
    Z,
    Kappa,
    Lambda,
    Tau,
}

#[derive(Debug, Clone, Default, Args)]
struct Flags {
    #[arg(long, global = true, allow_negative_numbers = true)]
    e: Option<f64>,
    #[arg(long = "Z", global = true)]
    z: Option<f64>,
    #[arg(long, global = true)]
    m: Option<f64>,
    #[arg(long, global = true)]
    kappa: Option<f64>,
    #[arg(long, global = true)]
    lambda: Option<f64>,
    #[arg(long, global = true)]
    tau: Option<f64>,
    #[arg(long, global = true)]
    lambda1: Option<f64>,
    #[arg(long = "grid-n", global = true)]
    grid_n: Option<usize>,
    #[arg(long = "box-L", global = true)]
    box_l: Option<f64>,
    #[arg(long = "modes-radial", global = true)]
    modes_radial: Option<usize>,
    #[arg(long = "modes-angular", global = true)]
    modes_angular: Option<usize>,
    #[arg(long, global = true)]
    nmax: Option<usize>,
    #[arg(long, global = true)]
    tol: Option<f64>,
    #[arg(long, global = true)]
    maxit: Option<usize>,
    #[arg(long, global = true, value_enum)]
    format: Option<Format>,
    /// Output file; standard output when absent.
    #[arg(long, global = true)]
    out: Option<String>,
    /// Comma-separated check ids or id prefixes.
    #[arg(long, global = true)]
    select: Option<String>,
    /// key=value file; command-line flags take precedence.
    #[arg(long, global = true)]
    config: Option<String>,
    #[arg(long, global = true, value_enum)]
    axis: Option<Axis>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    from: Option<f64>,
    #[arg(long, global = true, allow_negative_numbers = true)]
    to: Option<f64>,
    #[arg(long, global = true)]
    steps: Option<usize>,
}

/// Effective configuration after merging defaults, the config file and flags.
#[derive(Debug, Clone, Serialize)]
pub struct RunConfig {
    pub command: String,
    pub e: f64,
    #[serde(rename = "Z")]
    pub z: f64,
    pub m: f64,
    pub kappa: f64,
    pub lambda: f64,
    pub tau: f64,
    pub lambda1: f64,
    pub grid_n: usize,
    pub box_l: f64,
    pub modes_radial: usize,
    pub modes_angular: usize,
    pub nmax: usize,
    pub tol: f64,
    pub maxit: usize,
    pub format: Format,
    pub out: Option<String>,
    pub select: Vec<String>,
    pub axis: Axis,
    pub from: f64,
    pub to: f64,
    pub steps: usize,
}

#[derive(Debug)]
enum CliError {
    Usage(String),
    Internal(String),
}

impl From<Error> for CliError {
    fn from(e: Error) -> Self {
        match e {
            Error::InvalidParameter(_) | Error::CutoffOrder { .. } => Self::Usage(e.to_string()),
            _ => Self::Internal(e.to_string()),
        }
    }
}

const CONFIG_KEYS: [&str; 21] = [
    "e",
    "Z",
    "m",
    "kappa",
    "lambda",
    "tau",
    "lambda1",
    "grid-n",
    "box-L",
    "modes-radial",
    "modes-angular",
    "nmax",
    "tol",
    "maxit",
    "format",
    "out",
    "select",
    "axis",
    "from",
    "to",
    "steps",
];

/// Parses `key = value` lines; `#` starts a comment.
pub fn parse_config(text: &str) -> std::result::Result<BTreeMap<String, String>, String> {
    let mut map = BTreeMap::new();
    for (n, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let (k, v) = line.split_once('=').ok_or_else(|| format!("line {}: expected key=value", n + 1))?;
        let k = k.trim();
        if !CONFIG_KEYS.contains(&k) {
            return Err(format!("line {}: unknown key '{k}'", n + 1));
        }
        map.insert(k.to_string(), v.trim().to_string());
    }
    Ok(map)
}

fn fill_from_config(flags: &mut Flags, map: &BTreeMap<String, String>) -> std::result::Result<(), String> {
    fn num<T: std::str::FromStr>(k: &str, v: &str) -> std::result::Result<T, String> {
        v.parse().map_err(|_| format!("config key '{k}': cannot parse '{v}'"))
    }
    for (k, v) in map {
        let v = v.as_str();
        match k.as_str() {
            "e" => flags.e = flags.e.or(Some(num(k, v)?)),
            "Z" => flags.z = flags.z.or(Some(num(k, v)?)),
            "m" => flags.m = flags.m.or(Some(num(k, v)?)),
            "kappa" => flags.kappa = flags.kappa.or(Some(num(k, v)?)),
            "lambda" => flags.lambda = flags.lambda.or(Some(num(k, v)?)),
            "tau" => flags.tau = flags.tau.or(Some(num(k, v)?)),
            "lambda1" => flags.lambda1 = flags.lambda1.or(Some(num(k, v)?)),
            "grid-n" => flags.grid_n = flags.grid_n.or(Some(num(k, v)?)),
            "box-L" => flags.box_l = flags.box_l.or(Some(num(k, v)?)),
            "modes-radial" => flags.modes_radial = flags.modes_radial.or(Some(num(k, v)?)),
            "modes-angular" => flags.modes_angular = flags.modes_angular.or(Some(num(k, v)?)),
            "nmax" => flags.nmax = flags.nmax.or(Some(num(k, v)?)),
            "tol" => flags.tol = flags.tol.or(Some(num(k, v)?)),
            "maxit" => flags.maxit = flags.maxit.or(Some(num(k, v)?)),
            "format" => {
                if flags.format.is_none() {
                    flags.format = Some(Format::from_str(v, false).map_err(|_| format!("config key 'format': '{v}'"))?);
                }
            }
            "out" => flags.out = flags.out.clone().or(Some(v.to_string())),
            "select" => flags.select = flags.select.clone().or(Some(v.to_string())),
            "axis" => {
                if flags.axis.is_none() {
                    flags.axis = Some(Axis::from_str(v, false).map_err(|_| format!("config key 'axis': '{v}'"))?);
                }
            }
            "from" => flags.from = flags.from.or(Some(num(k, v)?)),
            "to" => flags.to = flags.to.or(Some(num(k, v)?)),
            "steps" => flags.steps = flags.steps.or(Some(num(k, v)?)),
            _ => unreachable!(),
        }
    }
    Ok(())
}

fn resolve(command: Command, f: &Flags) -> RunConfig {
    // The effective-mass command integrates over the full sphere and needs a
    // finer default mode grid than the atomic solves.
    let (radial, angular) = if command == Command::Effmass { (12, 6) } else { (4, 1) };
    RunConfig {
        command: serde_json::to_value(command).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default(),
        e: f.e.unwrap_or(0.3),
        z: f.z.unwrap_or(1.0),
        m: f.m.unwrap_or(1.0),
        kappa: f.kappa.unwrap_or(0.1),
        lambda: f.lambda.unwrap_or(10.0),
        tau: f.tau.unwrap_or(0.9),
        lambda1: f.lambda1.unwrap_or(1.0),
        grid_n: f.grid_n.unwrap_or(16),
        box_l: f.box_l.unwrap_or(6.0),
        modes_radial: f.modes_radial.unwrap_or(radial),
        modes_angular: f.modes_angular.unwrap_or(angular),
        nmax: f.nmax.unwrap_or(2),
        tol: f.tol.unwrap_or(1e-10),
        maxit: f.maxit.unwrap_or(20_000),
        format: f.format.unwrap_or(if command == Command::Scan { Format::Csv } else { Format::Json }),
        out: f.out.clone(),
        select: f
            .select
            .as_deref()
            .map(|s| s.split(',').map(|t| t.trim().to_string()).filter(|t| !t.is_empty()).collect())
            .unwrap_or_default(),
        axis: f.axis.unwrap_or(Axis::E),
        from: f.from.unwrap_or(0.05),
        to: f.to.unwrap_or(0.5),
        steps: f.steps.unwrap_or(10),
    }
}

impl RunConfig {
    pub fn params(&self) -> crate::Result<ModelParams> {
        ModelParams::new(self.e, self.z, self.m, self.kappa, self.lambda)
    }

    pub fn resolution(&self) -> Resolution {
        Resolution {
            grid_n: self.grid_n,
            box_l: self.box_l,
            modes_radial: self.modes_radial,
            modes_angular: self.modes_angular,
            n_max: self.nmax,
        }
    }

    fn suite(&self) -> crate::Result<SuiteConfig> {
        Ok(SuiteConfig { params: self.params()?, tau: self.tau, resolution: self.resolution(), tol: self.tol })
    }
}

/// Full-precision rendering (17 significant digits).
pub fn full(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.16e}")
    } else {
        format!("{x}")
    }
}

fn display(x: f64) -> String {
    if x.is_finite() {
        format!("{x:.6e}")
    } else {
        format!("{x}")
    }
}

/// One named scalar of a table.
#[derive(Debug, Clone, Serialize)]
struct Row {
    name: String,
    value: Option<f64>,
    /// Closed-form ceiling or reference where one exists.
    reference: Option<f64>,
    note: String,
}

fn row(name: &str, value: crate::Result<f64>) -> Row {
    match value {
        Ok(v) => Row { name: name.into(), value: Some(v), reference: None, note: String::new() },
        Err(e) => Row { name: name.into(), value: None, reference: None, note: e.to_string() },
    }
}

fn row_ref(name: &str, value: crate::Result<f64>, reference: f64, note: &str) -> Row {
    Row { reference: Some(reference), note: note.into(), ..row(name, value) }
}

struct Output {
    json: Value,
    csv: String,
    status: i32,
}

fn opt(x: Option<f64>) -> String {
    x.map(full).unwrap_or_default()
}

fn opt_display(x: Option<f64>) -> String {
    x.map(display).unwrap_or_default()
}

fn csv_escape(s: &str) -> String {
    if s.contains([',', '"', '\n']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

fn rows_csv(rows: &[Row]) -> String {
    let mut s = String::from("name,value,display,reference,note\n");
    for r in rows {
        s += &format!(
            "{},{},{},{},{}\n",
            r.name,
            opt(r.value),
            opt_display(r.value),
            opt(r.reference),
            csv_escape(&r.note)
        );
    }
    s
}

fn reports_csv(reports: &[BoundReport]) -> String {
    let mut s = String::from("id,status,lhs,rhs,slack,slack_display,paper_anchor,notes\n");
    for r in reports {
        s += &format!(
            "{},{},{},{},{},{},{},{}\n",
            r.id,
            status_name(r.status),
            opt(r.lhs),
            opt(r.rhs),
            opt(r.slack),
            opt_display(r.slack),
            csv_escape(&r.paper_anchor),
            csv_escape(&r.notes.join("; "))
        );
    }
    s
}

fn status_name(s: Status) -> &'static str {
    match s {
        Status::Pass => "pass",
        Status::Fail => "fail",
        Status::Skipped => "skipped",
    }
}

/// Flattens a JSON object into `key,value` lines.
fn flatten_csv(v: &Value) -> String {
    fn walk(prefix: &str, v: &Value, out: &mut String) {
        match v {
            Value::Object(m) => {
                for (k, x) in m {
                    let p = if prefix.is_empty() { k.clone() } else { format!("{prefix}.{k}") };
                    walk(&p, x, out);
                }
            }
            Value::Array(a) => {
                for (i, x) in a.iter().enumerate() {
                    walk(&format!("{prefix}.{i}"), x, out);
                }
            }
            Value::Number(n) => {
                let s = n.as_f64().map(full).unwrap_or_else(|| n.to_string());
                *out += &format!("{prefix},{s}\n");
            }
            Value::Null => *out += &format!("{prefix},\n"),
            Value::String(s) => *out += &format!("{prefix},{}\n", csv_escape(s)),
            Value::Bool(b) => *out += &format!("{prefix},{b}\n"),
        }
    }
    let mut out = String::from("key,value\n");
    walk("", v, &mut out);
    out
}

fn cmd_constants(cfg: &RunConfig) -> Result<Output, CliError> {
    let (e, z, tau) = (cfg.e, cfg.z, cfg.tau);
    let p = cfg.params()?;
    let euv = closedform::e_uv(z)?;
    let euv_residual = (closedform::c_uv(euv, z) - 1.0).abs();
    let frame = ScaleFrame::atomic(&p, tau, cfg.lambda1).ok();
    let rho = frame.map(|f| f.rho).unwrap_or(1.0);
    let large = LinearLogCoefficient::Large;
    let small = LinearLogCoefficient::Small;
    let rows = vec![
        row("alpha", Ok(p.alpha)),
        row("c_uv", Ok(closedform::c_uv(e, z))),
        row("e_uv", Ok(euv)),
        row("e_uv_residual", Ok(euv_residual)),
        row("e_uv_limit_small_z", Ok(closedform::e_uv_limit())),
        row("rho_atomic", frame.map(|f| f.rho).ok_or(Error::OutOfDomain("rho vanishes at e = 0".into()))),
        row("c_star", Ok(closedform::c_star(e, z, tau, rho))),
        row("c1", closedform::c_star_c1(e, z, tau, rho).map(|c| c.1)),
        row("c1_relativistic", closedform::c1_relativistic(e, z)),
        row("c_d", closedform::c_d(e, z)),
        row("c_d_restated", closedform::c_d_restated(e, z)),
        row("c_tau", Ok(closedform::c_tau(e, z, tau))),
        row("f_ir", Ok(closedform::f_ir(e, z, tau))),
        row("log_factor", Ok(closedform::log_factor(e, z))),
        row("photon_constant", closedform::photon_constant(e, z, large)),
        row("photon_constant_small_log_coefficient", closedform::photon_constant(e, z, small)),
        row("total_photon_bound", closedform::total_photon_bound(e, z, large)),
        row("total_photon_bound_small_log_coefficient", closedform::total_photon_bound(e, z, small)),
        row("hard_photon_bound", closedform::hard_photon_bound(e, z)),
        row("soft_m", closedform::soft_m(e, z)),
        row("soft_photon_bound", closedform::soft_photon_bound(e, z, large)),
        row("soft_photon_bound_small_log_coefficient", closedform::soft_photon_bound(e, z, small)),
        row("q_bound", Ok(closedform::q_bound(e, z, tau))),
        row("g_ir", closedform::g_ir(e, z, tau)),
        row("a_ir1", closedform::a_ir1(z, tau).and_then(|a| a.ok_or(Error::OutOfDomain("no root of C_tau = 1/2".into())))),
        row("a_ir2", closedform::a_ir2(z, tau)),
        row("xi_ceiling", Ok(closedform::xi_ceiling(rho, tau))),
    ];
    let window = closedform::e_ir(z, tau, IrMode::Bisection);
    let literal = closedform::e_ir(z, tau, IrMode::Literal);
    let overlap = closedform::overlap_constants(e, z, tau, THETA_EPS);
    let status = if euv_residual < 1e-12 { EXIT_OK } else { EXIT_CHECK_FAILED };
    let json = json!({
        "values": rows,
        "coupling_window": window.as_ref().ok(),
        "coupling_window_literal": literal.as_ref().ok(),
        "coupling_window_error": window.as_ref().err().map(|e| e.to_string()),
        "overlap_constants": overlap.as_ref().ok(),
        "overlap_constants_error": overlap.as_ref().err().map(|e| e.to_string()),
    });
    let mut csv = rows_csv(&rows);
    if let Ok(w) = &window {
        csv += &format!("e_ir,{},{},,bisection\n", opt(w.e_ir), opt_display(w.e_ir));
    }
    if let Ok(w) = &literal {
        csv += &format!("e_ir_literal,{},{},,literal\n", opt(w.e_ir), opt_display(w.e_ir));
    }
    Ok(Output { json, csv, status })
}

fn cmd_integrals(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.params()?;
    let tau = 0.0;
    let c = quadrature::norm_ceilings(tau, 1.0);
    let n = quadrature::f_tau_norms(&p, tau, 1.0);
    let nv = |f: fn(&closedform::NormBundle) -> f64| n.as_ref().map(f).map_err(Clone::clone);
    let full_shell = quadrature::full_norm_over_sqrt_omega(p.kappa, p.lambda, tau, 1.0);
    let shell = quadrature::shell_moment(0.0, 2.0, 1.0, &quadrature::ShellSpec::new(0.0, f64::INFINITY, quadrature::Region::Full));
    let mass = quadrature::effective_mass_coefficient();
    let ren = quadrature::energy_renormalization(&p);
    let inf = quadrature::f_tau_norms_shell(0.0, f64::INFINITY, tau, 1.0);
    let xi = inf.as_ref().map(|b| closedform::xi_bound(b, b)).map_err(Clone::clone);
    let rows = vec![
        row_ref("f_ir_l2", nv(|b| b.f_ir_l2), c.f_ir_l2, "cutoff shell, tau = 0"),
        row_ref("f_ir_over_sqrt_omega", nv(|b| b.f_ir_over_sqrt_omega), c.f_ir_over_sqrt_omega, "cutoff shell, tau = 0"),
        row_ref("f_uv_over_sqrt_omega", nv(|b| b.f_uv_over_sqrt_omega), c.f_uv_over_sqrt_omega, "cutoff shell, tau = 0"),
        row_ref(
            "f_uv_over_quarter_omega",
            nv(|b| b.f_uv_over_quarter_omega),
            c.f_uv_over_quarter_omega,
            "cutoff shell, tau = 0",
        ),
        row_ref("full_over_sqrt_omega", full_shell, c.full_over_sqrt_omega, "cutoff shell, tau = 0"),
        row_ref("xi_unit_shell_removed_cutoffs", xi, closedform::xi_ceiling(1.0, 0.0), "kappa = 0, Lambda = inf"),
        row_ref("shell_moment_a0_b2", shell.map(|q| q.value), 8.0 * std::f64::consts::PI, "exact 8 pi"),
        row_ref(
            "effective_mass_coefficient",
            mass.map(|q| q.value),
            1.0 / (6.0 * std::f64::consts::PI.powi(2)),
            "exact 1/(6 pi^2)",
        ),
        row_ref("energy_renormalization", ren.map(|q| q.value), quadrature::energy_renormalization_exact(&p), "closed form"),
        row_ref(
            "cin_100",
            Ok(quadrature::cin(100.0)),
            quadrature::EULER_GAMMA + 15f64.ln() + 91.0 / 30.0,
            "ceiling gamma_E + log 15 + 91/30",
        ),
    ];
    let status = if rows.iter().all(|r| r.value.is_some()) { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(Output { json: json!({ "integrals": rows }), csv: rows_csv(&rows), status })
}

fn cmd_solve(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.params()?;
    let model = verify::build_model(&p, &cfg.resolution(), Variant::Gross)?;
    let atomic = reference_state(&model, 1e-12)?;
    let gs = solve_ground(&model, &SolveOptions { tol: cfg.tol, maxit: cfg.maxit, ..Default::default() })?;
    let report = GroundStateReport::new(&model, &gs, &atomic, verify::BETA_TILDE)?;
    let status = if report.markov_margin >= -1e-12 { EXIT_OK } else { EXIT_CHECK_FAILED };
    let json = json!({
        "report": report,
        "ground_state": gs,
        "atomic": atomic,
        "frame": model.frame,
        "warnings": model.warnings,
    });
    let csv = flatten_csv(&json);
    Ok(Output { json, csv, status })
}

fn cmd_verify(cfg: &RunConfig) -> Result<Output, CliError> {
    let suite = cfg.suite()?;
    for s in &cfg.select {
        if !CHECKS.iter().any(|(id, _)| verify::selected(id, std::slice::from_ref(s))) {
            return Err(CliError::Usage(format!("--select: no check matches '{s}'")));
        }
    }
    let reports = verify::run_suite(&suite, &cfg.select);
    let status = if verify::all_passed(&reports) { EXIT_OK } else { EXIT_CHECK_FAILED };
    Ok(Output { json: json!({ "reports": reports }), csv: reports_csv(&reports), status })
}

fn cmd_scan(cfg: &RunConfig) -> Result<Output, CliError> {
    if cfg.steps == 0 {
        return Err(CliError::Usage("--steps must be at least 1".into()));
    }
    let axis_name = serde_json::to_value(cfg.axis).ok().and_then(|v| v.as_str().map(String::from)).unwrap_or_default();
    let mut rows = Vec::new();
    let mut header = axis_name.clone();
    for (id, _) in CHECKS {
        if verify::selected(id, &cfg.select) {
            header += &format!(",{id}.status,{id}.slack");
        }
    }
    let mut csv = header + "\n";
    let mut failed = false;
    for i in 0..cfg.steps {
        let t = if cfg.steps == 1 { 0.0 } else { i as f64 / (cfg.steps - 1) as f64 };
        let x = cfg.from + t * (cfg.to - cfg.from);
        let mut c = cfg.clone();
        match cfg.axis {
            Axis::E => c.e = x,
            Axis::Z => c.z = x,
            Axis::Kappa => c.kappa = x,
            Axis::Lambda => c.lambda = x,
            Axis::Tau => c.tau = x,
        }
        let reports = verify::run_suite(&c.suite()?, &cfg.select);
        failed |= !verify::all_passed(&reports);
        let mut line = full(x);
        for r in &reports {
            line += &format!(",{},{}", status_name(r.status), opt(r.slack));
        }
        csv += &(line + "\n");
        let summary: Vec<Value> = reports
            .iter()
            .map(|r| json!({ "id": r.id, "status": r.status, "slack": r.slack, "lhs": r.lhs, "rhs": r.rhs }))
            .collect();
        rows.push(json!({ "value": x, "reports": summary }));
    }
    let status = if failed { EXIT_CHECK_FAILED } else { EXIT_OK };
    Ok(Output { json: json!({ "axis": axis_name, "rows": rows }), csv, status })
}

fn cmd_effmass(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.params()?;
    let modes = ModeGrid::build(p.kappa, p.lambda, cfg.modes_radial, cfg.modes_angular)?;
    let basis = FockBasis::new(modes.len(), cfg.nmax)?;
    let r = effective_mass_numeric(&p, &modes, &basis, cfg.tol)?;
    let predicted = 1.0 + p.e * p.e * r.riemann_sum;
    let mismatch = if p.e == 0.0 { 0.0 } else { (r.m_eff_over_m - 1.0) / (p.e * p.e * r.riemann_sum) - 1.0 };
    let json = json!({
        "numeric": r,
        "perturbative": predicted,
        "perturbative_continuum": 1.0 + p.e * p.e * r.continuum,
        "relative_mismatch_of_correction": mismatch,
        "modes": modes.len(),
    });
    let csv = flatten_csv(&json);
    Ok(Output { json, csv, status: EXIT_OK })
}

fn cmd_binding(cfg: &RunConfig) -> Result<Output, CliError> {
    let p = cfg.params()?;
    let a = p.alpha_z();
    let one = quadrature::binding_second_order(p.e, p.z, quadrature::ratio_one_element(a))?;
    let closed = -p.atomic_energy() * p.e * p.e / (6.0 * std::f64::consts::PI.powi(2));
    let envelope = quadrature::binding_envelope(p.e, p.z);
    let full_res = quadrature::binding_second_order(p.e, p.z, quadrature::resolvent_element(a));
    let rel = if closed == 0.0 { one.value.abs() } else { (one.value / closed - 1.0).abs() };
    let full_ok = full_res.as_ref().map(|q| q.value.abs() <= envelope.value).unwrap_or(false);
    let status = if rel < 1e-6 && full_ok { EXIT_OK } else { EXIT_CHECK_FAILED };
    let json = json!({
        "atomic_energy": p.atomic_energy(),
        "ratio_one": one,
        "ratio_one_closed_form": closed,
        "ratio_one_relative_error": rel,
        "full_resolvent": full_res.as_ref().ok(),
        "full_resolvent_error": full_res.as_ref().err().map(|e| e.to_string()),
        "envelope": envelope,
        "binding_one_particle": -p.atomic_energy(),
        "binding_ratio_one": -p.atomic_energy() - closed,
    });
    let csv = flatten_csv(&json);
    Ok(Output { json, csv, status })
}

fn dispatch(command: Command, cfg: &RunConfig) -> Result<Output, CliError> {
    match command {
        Command::Constants => cmd_constants(cfg),
        Command::Integrals => cmd_integrals(cfg),
        Command::Solve => cmd_solve(cfg),
        Command::Verify => cmd_verify(cfg),
        Command::Scan => cmd_scan(cfg),
        Command::Effmass => cmd_effmass(cfg),
        Command::Binding => cmd_binding(cfg),
    }
}

fn render(cfg: &RunConfig, out: &Output) -> String {
    match cfg.format {
        Format::Json => {
            let doc = json!({ "config": cfg, "result": out.json });
            serde_json::to_string_pretty(&doc).unwrap_or_default() + "\n"
        }
        Format::Csv => {
            let echo = serde_json::to_value(cfg).unwrap_or(Value::Null);
            let mut head = String::new();
            if let Value::Object(m) = echo {
                for (k, v) in m {
                    head += &format!("# {k}={v}\n");
                }
            }
            head + &out.csv
        }
    }
}

/// Parses `args` (program name first), runs the command and writes its output.
pub fn run<I, T>(args: I, stdout: &mut dyn Write, stderr: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = if e.use_stderr() { EXIT_USAGE } else { EXIT_OK };
            if e.use_stderr() {
                let _ = write!(stderr, "{}", e.render());
            } else {
                let _ = write!(stdout, "{}", e.render());
            }
            return code;
        }
    };
    let mut flags = cli.opts.clone();
    if let Some(path) = &cli.opts.config {
        let text = match std::fs::read_to_string(path) {
            Ok(t) => t,
            Err(e) => {
                let _ = writeln!(stderr, "error: cannot read config {path}: {e}");
                return EXIT_USAGE;
            }
        };
        if let Err(msg) = parse_config(&text).and_then(|m| fill_from_config(&mut flags, &m)) {
            let _ = writeln!(stderr, "error: {path}: {msg}");
            return EXIT_USAGE;
        }
    }
    let cfg = resolve(cli.command, &flags);
    let out = match dispatch(cli.command, &cfg) {
        Ok(o) => o,
        Err(CliError::Usage(m)) => {
            let _ = writeln!(stderr, "error: {m}");
            return EXIT_USAGE;
        }
        Err(CliError::Internal(m)) => {
            let _ = writeln!(stderr, "internal error: {m}");
            return EXIT_INTERNAL;
        }
    };
    let text = render(&cfg, &out);
    let written = match &cfg.out {
        Some(path) => std::fs::write(path, &text).map_err(|e| e.to_string()),
        None => stdout.write_all(text.as_bytes()).map_err(|e| e.to_string()),
    };
    if let Err(e) = written {
        let _ = writeln!(stderr, "error: cannot write output: {e}");
        return EXIT_INTERNAL;
    }
    out.status
}
