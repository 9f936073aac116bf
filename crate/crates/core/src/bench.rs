//! Command-line experiments: configuration resolution, the five subcommands and their
//! output formats.
//!
//! Settings come from three layers, later ones winning: per-command defaults, a flat TOML
//! file named by `--config` or `VARINT_CONFIG`, and command-line flags.

use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::{Deserialize, Serialize};

use crate::analysis::{
    convergence_order, energy_drift, equivalence_defect, harmonic_exact, kepler_circular_exact,
    paired_trajectories, reference_solution, symmetry_defect, symplecticity_defect, ConvergenceReport,
    StructureReport,
};
use crate::error::{Error, Result};
use crate::galerkin::{build_csprk, GalerkinIntegrator, PrkTableau};
use crate::lagrangian::{LagrangianForm, LagrangianVi, LagrangianViConfig};
use crate::mechanics::{default_initial_state, problem, MechanicalSystem, PhaseState, ProblemParams};
use crate::quadrature::QuadratureRule;
use crate::solver::{SolverConfig, SolverKind};
use crate::stepping::{integrate, OneStepMethod, Trajectory};

/// Finite-difference step of the `structure` Jacobian.
pub const STRUCTURE_FD_STEP: f64 = 1e-5;

#[derive(Debug, Parser)]
#[command(name = "varint", version, about = "Lagrangian and Galerkin variational integrators")]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Integrate one problem and write the trajectory.
    Run(Overrides),
    /// Run both integrator families and report the largest gap between them.
    Compare(Overrides),
    /// Fit the convergence order over four halvings of the step size.
    Converge(Overrides),
    /// Symplecticity, symmetry, energy drift and equivalence defects.
    Structure(Overrides),
    /// Print the discretized partitioned Runge–Kutta tableau.
    Tableau(Overrides),
}

impl Command {
    pub fn kind(&self) -> CommandKind {
        match self {
            Command::Run(_) => CommandKind::Run,
            Command::Compare(_) => CommandKind::Compare,
            Command::Converge(_) => CommandKind::Converge,
            Command::Structure(_) => CommandKind::Structure,
            Command::Tableau(_) => CommandKind::Tableau,
        }
    }

    pub fn overrides(&self) -> &Overrides {
        match self {
            Command::Run(o)
            | Command::Compare(o)
            | Command::Converge(o)
            | Command::Structure(o)
            | Command::Tableau(o) => o,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum CommandKind {
    Run,
    Compare,
    Converge,
    Structure,
    Tableau,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum IntegratorKind {
    Lagrangian,
    /// The Lagrangian integrator with Hamiltonian right-hand sides.
    LagrangianHamiltonian,
    Galerkin,
    GalerkinSwapped,
}

impl IntegratorKind {
    pub fn as_str(self) -> &'static str {
        match self {
            IntegratorKind::Lagrangian => "lagrangian",
            IntegratorKind::LagrangianHamiltonian => "lagrangian-hamiltonian",
            IntegratorKind::Galerkin => "galerkin",
            IntegratorKind::GalerkinSwapped => "galerkin-swapped",
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Format {
    Csv,
    Json,
    /// Human-readable text; only `tableau` and `structure` use it.
    Text,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, ValueEnum, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverArg {
    FixedPoint,
    Newton,
}

impl From<SolverArg> for SolverKind {
    fn from(s: SolverArg) -> Self {
        match s {
            SolverArg::FixedPoint => SolverKind::FixedPoint,
            SolverArg::Newton => SolverKind::Newton,
        }
    }
}

/// Optional settings shared by the flags and the config file.
#[derive(Debug, Clone, Default, PartialEq, Args, Deserialize)]
#[serde(default, deny_unknown_fields, rename_all = "kebab-case")]
pub struct Overrides {
    /// harmonic, pendulum, kepler or pdm.
    #[arg(long)]
    pub problem: Option<String>,
    #[arg(long, value_enum)]
    pub integrator: Option<IntegratorKind>,
    /// Polynomial degree parameter.
    #[arg(long)]
    pub s: Option<usize>,
    /// Number of Gauss–Legendre nodes.
    #[arg(long)]
    pub quad_nodes: Option<usize>,
    #[arg(long, allow_negative_numbers = true)]
    pub h: Option<f64>,
    #[arg(long)]
    pub steps: Option<usize>,
    #[arg(long)]
    pub tol: Option<f64>,
    #[arg(long)]
    pub max_iter: Option<usize>,
    #[arg(long, value_enum)]
    pub solver: Option<SolverArg>,
    #[arg(long)]
    pub out: Option<PathBuf>,
    #[arg(long, value_enum)]
    pub format: Option<Format>,
    /// Pass/fail threshold of `compare`.
    #[arg(long)]
    pub threshold: Option<f64>,
    /// Final time of `converge`.
    #[arg(long)]
    pub t_end: Option<f64>,
    /// Mass modulation of pdm.
    #[arg(long, allow_negative_numbers = true)]
    pub epsilon: Option<f64>,
    /// Frequency of harmonic.
    #[arg(long)]
    pub omega: Option<f64>,
    /// Initial positions, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub q0: Option<Vec<f64>>,
    /// Initial momenta, comma separated.
    #[arg(long, value_delimiter = ',', allow_negative_numbers = true)]
    pub p0: Option<Vec<f64>>,
    /// Flat TOML file with any of the settings above.
    #[arg(long, env = "VARINT_CONFIG")]
    #[serde(skip)]
    pub config: Option<PathBuf>,
}

impl Overrides {
    pub fn from_toml(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(format!("config file: {}", e.message())))
    }

    pub fn from_file(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| Error::Config(format!("cannot read config {}: {e}", path.display())))?;
        Self::from_toml(&text)
    }
}

/// A fully resolved experiment.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ExperimentConfig {
    pub problem: String,
    pub integrator: IntegratorKind,
    pub s: usize,
    pub quad_nodes: usize,
    pub h: f64,
    pub steps: usize,
    pub tol: f64,
    pub max_iter: usize,
    pub solver: SolverKind,
    pub out: Option<PathBuf>,
    pub format: Format,
    pub threshold: f64,
    pub t_end: f64,
    pub epsilon: f64,
    pub omega: f64,
    pub q0: Option<Vec<f64>>,
    pub p0: Option<Vec<f64>>,
}

impl ExperimentConfig {
    /// Defaults for `kind`, overridden by `file` and then by `flags`.
    pub fn resolve(kind: CommandKind, file: &Overrides, flags: &Overrides) -> Result<Self> {
        macro_rules! pick {
            ($field:ident, $default:expr) => {
                flags.$field.clone().or_else(|| file.$field.clone()).unwrap_or($default)
            };
        }
        macro_rules! pick_opt {
            ($field:ident) => {
                flags.$field.clone().or_else(|| file.$field.clone())
            };
        }
        let s = pick!(s, 2);
        let compare = kind == CommandKind::Compare;
        let params = ProblemParams::default();
        let cfg = Self {
            problem: pick!(problem, "pendulum".to_string()),
            integrator: pick!(integrator, IntegratorKind::Galerkin),
            s,
            // compare probes beyond m = s, where the families can part ways
            quad_nodes: pick!(quad_nodes, if compare { s + 1 } else { s }),
            h: pick!(h, if kind == CommandKind::Converge { 0.2 } else { 0.1 }),
            steps: pick!(steps, 100),
            tol: pick!(tol, if compare { 1e-13 } else { SolverConfig::default().tol }),
            max_iter: pick!(max_iter, SolverConfig::default().max_iter),
            solver: pick_opt!(solver).map(SolverKind::from).unwrap_or(SolverKind::FixedPoint),
            out: pick_opt!(out),
            format: pick!(
                format,
                match kind {
                    CommandKind::Tableau | CommandKind::Structure => Format::Text,
                    _ => Format::Csv,
                }
            ),
            threshold: pick!(threshold, 1e-10),
            t_end: pick!(t_end, 1.0),
            epsilon: pick!(epsilon, params.epsilon),
            omega: pick!(omega, params.omega),
            q0: pick_opt!(q0),
            p0: pick_opt!(p0),
        };
        cfg.validate(kind)?;
        Ok(cfg)
    }

    fn validate(&self, kind: CommandKind) -> Result<()> {
        self.system()?;
        self.solver_config().validate()?;
        QuadratureRule::gauss_legendre(self.quad_nodes)?;
        build_csprk(self.s, false)?;
        if self.quad_nodes < self.s {
            return Err(Error::Config(format!(
                "--quad-nodes {} is below --s {}; the stage integrals need m ≥ s",
                self.quad_nodes, self.s
            )));
        }
        if !(self.h.is_finite() && self.h != 0.0) {
            return Err(Error::Config(format!("--h must be finite and non-zero, got {}", self.h)));
        }
        if !(self.threshold >= 0.0) {
            return Err(Error::Config(format!("--threshold must be non-negative, got {}", self.threshold)));
        }
        if kind == CommandKind::Converge && !(self.h > 0.0 && self.t_end > 0.0) {
            return Err(Error::Config("converge needs positive --h and --t-end".into()));
        }
        if kind == CommandKind::Tableau && self.format == Format::Csv {
            return Err(Error::Config("tableau prints text or json".into()));
        }
        self.initial_state()?;
        Ok(())
    }

    pub fn params(&self) -> ProblemParams {
        ProblemParams { omega: self.omega, epsilon: self.epsilon }
    }

    pub fn system(&self) -> Result<Box<dyn MechanicalSystem>> {
        problem(&self.problem, &self.params())
    }

    pub fn solver_config(&self) -> SolverConfig {
        SolverConfig { tol: self.tol, max_iter: self.max_iter, kind: self.solver }
    }

    pub fn quadrature(&self) -> Result<QuadratureRule> {
        QuadratureRule::gauss_legendre(self.quad_nodes)
    }

    /// `--q0`/`--p0` when given (missing halves come from the default state), otherwise
    /// the problem's default initial state.
    pub fn initial_state(&self) -> Result<PhaseState> {
        let default = default_initial_state(&self.problem)?;
        let q = self.q0.clone().unwrap_or_else(|| default.q().to_vec());
        let p = self.p0.clone().unwrap_or_else(|| default.p().to_vec());
        if q.len() != default.dim() || p.len() != default.dim() {
            return Err(Error::Config(format!(
                "{} has {} degrees of freedom; got {} positions and {} momenta",
                self.problem,
                default.dim(),
                q.len(),
                p.len()
            )));
        }
        PhaseState::new(q, p)
    }

    pub fn method(&self) -> Result<Box<dyn OneStepMethod>> {
        self.method_with(self.integrator, self.solver_config())
    }

    fn method_with(&self, kind: IntegratorKind, solver: SolverConfig) -> Result<Box<dyn OneStepMethod>> {
        let quad = self.quadrature()?;
        Ok(match kind {
            IntegratorKind::Lagrangian | IntegratorKind::LagrangianHamiltonian => {
                let form = if kind == IntegratorKind::Lagrangian {
                    LagrangianForm::Lagrangian
                } else {
                    LagrangianForm::Hamiltonian
                };
                Box::new(LagrangianVi::new(LagrangianViConfig::new(self.s, quad, solver)?, form)?)
            }
            IntegratorKind::Galerkin | IntegratorKind::GalerkinSwapped => {
                let swapped = kind == IntegratorKind::GalerkinSwapped;
                Box::new(GalerkinIntegrator::new(build_csprk(self.s, swapped)?.discretize(&quad)?, solver)?)
            }
        })
    }
}

/// Exit status for an error: `2` for usage and configuration problems, `1` for numerical
/// failures.
pub fn exit_code(err: &Error) -> u8 {
    match err.root() {
        Error::Config(_) | Error::Dimension { .. } | Error::BasisIndex { .. } | Error::Unsupported(_) => 2,
        _ => 1,
    }
}

/// Runs a parsed command line. Reports go to `stdout`; data goes to `--out` when given
/// and to `stdout` otherwise. Returns the exit status on success.
pub fn execute(cli: &Cli, stdout: &mut dyn Write) -> Result<u8> {
    let flags = cli.command.overrides();
    let file = match &flags.config {
        Some(path) => Overrides::from_file(path)?,
        None => Overrides::default(),
    };
    let cfg = ExperimentConfig::resolve(cli.command.kind(), &file, flags)?;
    match cli.command.kind() {
        CommandKind::Run => cmd_run(&cfg, stdout),
        CommandKind::Compare => cmd_compare(&cfg, stdout),
        CommandKind::Converge => cmd_converge(&cfg, stdout),
        CommandKind::Structure => cmd_structure(&cfg, stdout),
        CommandKind::Tableau => cmd_tableau(&cfg, stdout),
    }
}

fn emit(cfg: &ExperimentConfig, data: &str, stdout: &mut dyn Write) -> Result<()> {
    match &cfg.out {
        Some(path) => std::fs::write(path, data)
            .map_err(|e| Error::Config(format!("cannot write {}: {e}", path.display()))),
        None => stdout.write_all(data.as_bytes()).map_err(|e| Error::Config(format!("stdout: {e}"))),
    }
}

fn say(stdout: &mut dyn Write, line: &str) -> Result<()> {
    writeln!(stdout, "{line}").map_err(|e| Error::Config(format!("stdout: {e}")))
}

fn to_json<T: Serialize>(value: &T) -> String {
    let mut text = serde_json::to_string_pretty(value).expect("reports serialize");
    text.push('\n');
    text
}

/// Scientific notation with 17 significant digits, enough to round-trip any `f64`.
fn fmt17(x: f64) -> String {
    format!("{x:.16e}")
}

/// `step,t,q0..,p0..[,energy]` rows.
pub fn trajectory_csv(traj: &Trajectory, system: &dyn MechanicalSystem) -> Result<String> {
    let d = traj.states()[0].dim();
    let mut out = String::from("step,t");
    for i in 0..d {
        write!(out, ",q{i}").unwrap();
    }
    for i in 0..d {
        write!(out, ",p{i}").unwrap();
    }
    if system.has_energy() {
        out.push_str(",energy");
    }
    out.push('\n');
    for (k, z) in traj.states().iter().enumerate() {
        write!(out, "{k},{}", fmt17(traj.time(k))).unwrap();
        for v in z.q().iter().chain(z.p()) {
            write!(out, ",{}", fmt17(*v)).unwrap();
        }
        if system.has_energy() {
            write!(out, ",{}", fmt17(system.state_energy(z)?)).unwrap();
        }
        out.push('\n');
    }
    Ok(out)
}

#[derive(Serialize)]
struct TrajectoryRow<'a> {
    step: usize,
    t: f64,
    q: &'a [f64],
    p: &'a [f64],
    #[serde(skip_serializing_if = "Option::is_none")]
    energy: Option<f64>,
}

#[derive(Serialize)]
struct TrajectoryDocument<'a> {
    problem: &'a str,
    method: String,
    h: f64,
    rows: Vec<TrajectoryRow<'a>>,
}

fn cmd_run(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<u8> {
    let system = cfg.system()?;
    let method = cfg.method()?;
    let traj = integrate(&method, system.as_ref(), &cfg.initial_state()?, cfg.h, cfg.steps)?;
    let data = match cfg.format {
        Format::Json => {
            let mut rows = Vec::with_capacity(traj.len());
            for (k, z) in traj.states().iter().enumerate() {
                let energy = if system.has_energy() { Some(system.state_energy(z)?) } else { None };
                rows.push(TrajectoryRow { step: k, t: traj.time(k), q: z.q(), p: z.p(), energy });
            }
            to_json(&TrajectoryDocument { problem: &cfg.problem, method: method.name(), h: cfg.h, rows })
        }
        _ => trajectory_csv(&traj, system.as_ref())?,
    };
    emit(cfg, &data, stdout)?;
    Ok(0)
}

/// Result of `compare`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ComparisonReport {
    pub problem: String,
    pub s: usize,
    pub quad_nodes: usize,
    pub h: f64,
    pub steps: usize,
    pub max_defect: f64,
    pub threshold: f64,
    pub pass: bool,
    /// Per-step max componentwise gap.
    pub gaps: Vec<f64>,
}

pub fn compare(cfg: &ExperimentConfig) -> Result<ComparisonReport> {
    let system = cfg.system()?;
    let (lagrangian, galerkin) = paired_trajectories(
        system.as_ref(),
        &cfg.initial_state()?,
        cfg.h,
        cfg.steps,
        cfg.s,
        &cfg.quadrature()?,
        &cfg.solver_config(),
    )?;
    let gaps: Vec<f64> =
        lagrangian.states().iter().zip(galerkin.states()).map(|(a, b)| a.max_abs_diff(b)).collect();
    let max_defect = gaps.iter().copied().fold(0.0, f64::max);
    Ok(ComparisonReport {
        problem: cfg.problem.clone(),
        s: cfg.s,
        quad_nodes: cfg.quad_nodes,
        h: cfg.h,
        steps: cfg.steps,
        max_defect,
        threshold: cfg.threshold,
        pass: max_defect < cfg.threshold,
        gaps,
    })
}

fn cmd_compare(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<u8> {
    let report = compare(cfg)?;
    let data = match cfg.format {
        Format::Json => to_json(&report),
        _ => {
            let mut out = String::from("step,t,gap\n");
            for (k, g) in report.gaps.iter().enumerate() {
                writeln!(out, "{k},{},{}", fmt17(k as f64 * cfg.h), fmt17(*g)).unwrap();
            }
            out
        }
    };
    if cfg.out.is_some() {
        emit(cfg, &data, stdout)?;
    }
    say(
        stdout,
        &format!(
            "{} s={} m={} h={} steps={}: max defect {:.3e} (threshold {:.1e})",
            cfg.problem, cfg.s, cfg.quad_nodes, cfg.h, cfg.steps, report.max_defect, cfg.threshold
        ),
    )?;
    if report.pass {
        say(stdout, "PASS")?;
        return Ok(0);
    }
    if cfg.system()?.is_quadratic_kinetic() {
        say(stdout, "FAIL")?;
        Ok(1)
    } else {
        say(stdout, "FAIL: not equivalent (expected for non-quadratic kinetic energy)")?;
        Ok(0)
    }
}

/// Convergence study over `h, h/2, h/4, h/8` up to `t_end`.
pub fn converge(cfg: &ExperimentConfig) -> Result<ConvergenceReport> {
    let system = cfg.system()?;
    let initial = cfg.initial_state()?;
    let step_sizes: Vec<f64> = (0..4).map(|k| cfg.h / f64::from(1u32 << k)).collect();
    let reference = match cfg.problem.as_str() {
        "harmonic" => harmonic_exact(cfg.omega, &initial, cfg.t_end),
        "kepler" if initial == default_initial_state("kepler")? => kepler_circular_exact(cfg.t_end),
        _ => reference_solution(system.as_ref(), &initial, step_sizes[3], cfg.t_end)?,
    };
    let method = cfg.method()?;
    convergence_order(&method, system.as_ref(), &initial, &step_sizes, cfg.t_end, &reference, 2 * cfg.s)
}

fn cmd_converge(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<u8> {
    let report = converge(cfg)?;
    let data = match cfg.format {
        Format::Json => to_json(&report),
        _ => {
            let mut out = String::from("h,error\n");
            for (h, e) in report.step_sizes.iter().zip(&report.errors) {
                writeln!(out, "{},{}", fmt17(*h), fmt17(*e)).unwrap();
            }
            out
        }
    };
    emit(cfg, &data, stdout)?;
    if cfg.out.is_some() || cfg.format == Format::Json {
        say(stdout, &format!("slope {:.4} (target {})", report.slope, report.target_order))?;
    }
    Ok(0)
}

/// Structure checks for the configured integrator.
pub fn structure(cfg: &ExperimentConfig) -> Result<StructureReport> {
    let system = cfg.system()?;
    let initial = cfg.initial_state()?;
    let solver = SolverConfig { tol: cfg.tol.min(1e-13), ..cfg.solver_config() };
    let method = cfg.method_with(cfg.integrator, solver)?;
    let energy = if system.has_energy() {
        Some(energy_drift(&method, system.as_ref(), &initial, cfg.h, cfg.steps)?.max_deviation)
    } else {
        None
    };
    let equivalence = match cfg.integrator {
        IntegratorKind::GalerkinSwapped => None,
        _ => Some(equivalence_defect(
            system.as_ref(),
            &initial,
            cfg.h,
            cfg.steps,
            cfg.s,
            &cfg.quadrature()?,
            &solver,
        )?),
    };
    Ok(StructureReport {
        symplecticity_defect: symplecticity_defect(&method, system.as_ref(), &initial, cfg.h, STRUCTURE_FD_STEP)?,
        symmetry_defect: symmetry_defect(&method, system.as_ref(), &initial, cfg.h)?,
        energy_drift: energy,
        equivalence_defect: equivalence,
    })
}

fn cmd_structure(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<u8> {
    let report = structure(cfg)?;
    let opt = |v: Option<f64>| v.map(fmt17).unwrap_or_default();
    let data = match cfg.format {
        Format::Json => to_json(&report),
        Format::Csv => format!(
            "symplecticity_defect,symmetry_defect,energy_drift,equivalence_defect\n{},{},{},{}\n",
            fmt17(report.symplecticity_defect),
            fmt17(report.symmetry_defect),
            opt(report.energy_drift),
            opt(report.equivalence_defect)
        ),
        Format::Text => {
            let mut out = String::new();
            writeln!(out, "symplecticity defect  {:.3e}", report.symplecticity_defect).unwrap();
            writeln!(out, "symmetry defect       {:.3e}", report.symmetry_defect).unwrap();
            if let Some(e) = report.energy_drift {
                writeln!(out, "energy drift          {e:.3e}").unwrap();
            }
            if let Some(e) = report.equivalence_defect {
                writeln!(out, "equivalence defect    {e:.3e}").unwrap();
            }
            out
        }
    };
    emit(cfg, &data, stdout)?;
    Ok(0)
}

pub fn tableau(cfg: &ExperimentConfig) -> Result<PrkTableau> {
    let swapped = cfg.integrator == IntegratorKind::GalerkinSwapped;
    build_csprk(cfg.s, swapped)?.discretize(&cfg.quadrature()?)
}

/// The tableau with every entry at 17 significant digits.
pub fn tableau_text(t: &PrkTableau) -> String {
    let row = |v: &[f64]| v.iter().map(|x| fmt17(*x)).collect::<Vec<_>>().join("  ");
    let mut out = String::new();
    writeln!(out, "# s = {}, m = {}{}", t.s(), t.stages(), if t.swapped() { ", swapped" } else { "" }).unwrap();
    writeln!(out, "c\n  {}", row(t.c())).unwrap();
    out.push_str("a\n");
    for r in t.a() {
        writeln!(out, "  {}", row(r)).unwrap();
    }
    out.push_str("a_hat\n");
    for r in t.a_hat() {
        writeln!(out, "  {}", row(r)).unwrap();
    }
    writeln!(out, "b\n  {}", row(t.b())).unwrap();
    writeln!(out, "b_hat\n  {}", row(t.b_hat())).unwrap();
    out
}

fn cmd_tableau(cfg: &ExperimentConfig, stdout: &mut dyn Write) -> Result<u8> {
    let t = tableau(cfg)?;
    let data = match cfg.format {
        Format::Json => to_json(&t),
        _ => tableau_text(&t),
    };
    emit(cfg, &data, stdout)?;
    Ok(0)
}
