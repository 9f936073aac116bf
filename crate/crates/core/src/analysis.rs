//! Measurements of the structural properties of one-step maps.
//!
//! Symplecticity is checked through the finite-difference Jacobian `J` of the step map
//! (`‖JᵀΩJ − Ω‖_∞`), symmetry through `Φ_{−h} ∘ Φ_h`, order through a least-squares fit
//! of terminal errors on a log–log scale, and long-time behaviour through the energy
//! deviation along a trajectory.

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};
use crate::galerkin::GalerkinIntegrator;
use crate::lagrangian::{LagrangianForm, LagrangianVi, LagrangianViConfig};
use crate::mechanics::{MechanicalSystem, PhaseState};
use crate::quadrature::QuadratureRule;
use crate::solver::SolverConfig;
use crate::stepping::{integrate, OneStepMethod};

/// Finite-difference scheme for [`step_jacobian`].
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Difference {
    Forward,
    Central,
}

/// Canonical symplectic matrix `Ω = [[0, I], [−I, 0]]` of size `2d`.
pub fn canonical_form(d: usize) -> DMatrix<f64> {
    let mut omega = DMatrix::zeros(2 * d, 2 * d);
    for i in 0..d {
        omega[(i, d + i)] = 1.0;
        omega[(d + i, i)] = -1.0;
    }
    omega
}

/// `‖JᵀΩJ − Ω‖_∞` (largest absolute entry).
pub fn symplectic_form_defect(jac: &DMatrix<f64>) -> f64 {
    let omega = canonical_form(jac.nrows() / 2);
    (jac.transpose() * &omega * jac - omega).amax()
}

/// Jacobian of `z ↦ Φ_h(z)` by finite differences with step `fd_step`.
pub fn step_jacobian<M: OneStepMethod + ?Sized>(
    method: &M,
    system: &dyn MechanicalSystem,
    state: &PhaseState,
    h: f64,
    fd_step: f64,
    scheme: Difference,
) -> Result<DMatrix<f64>> {
    let z = state.to_flat();
    let n = z.len();
    let base = match scheme {
        Difference::Forward => Some(method.step(system, state, h)?.to_flat()),
        Difference::Central => None,
    };
    let perturbed = |component: usize, delta: f64| -> Result<Vec<f64>> {
        let mut shifted = z.clone();
        shifted[component] += delta;
        let start = PhaseState::from_flat(&shifted)?;
        method
            .step(system, &start, h)
            .map(|s| s.to_flat())
            .map_err(|e| Error::Perturbation { component, source: Box::new(e) })
    };
    let mut jac = DMatrix::zeros(n, n);
    for j in 0..n {
        let plus = perturbed(j, fd_step)?;
        let (minus, width) = match &base {
            Some(b) => (b.clone(), fd_step),
            None => (perturbed(j, -fd_step)?, 2.0 * fd_step),
        };
        for i in 0..n {
            jac[(i, j)] = (plus[i] - minus[i]) / width;
        }
    }
    Ok(jac)
}

/// `‖JᵀΩJ − Ω‖_∞` for the central-difference Jacobian of one step.
///
/// `fd_step` must lie in `[1e-7, 1e-4]`. With a stage-solver tolerance of `1e-13` and
/// `fd_step = 1e-5` the measurement floor is around `1e-8`.
pub fn symplecticity_defect<M: OneStepMethod + ?Sized>(
    method: &M,
    system: &dyn MechanicalSystem,
    state: &PhaseState,
    h: f64,
    fd_step: f64,
) -> Result<f64> {
    if !(1e-7..=1e-4).contains(&fd_step) {
        return Err(Error::Config(format!("finite-difference step {fd_step:e} outside [1e-7, 1e-4]")));
    }
    let jac = step_jacobian(method, system, state, h, fd_step, Difference::Central)?;
    Ok(symplectic_form_defect(&jac))
}

/// `‖Φ_{−h}(Φ_h(z)) − z‖_∞`.
pub fn symmetry_defect<M: OneStepMethod + ?Sized>(
    method: &M,
    system: &dyn MechanicalSystem,
    state: &PhaseState,
    h: f64,
) -> Result<f64> {
    let forward = method.step(system, state, h)?;
    let back = method.step(system, &forward, -h)?;
    Ok(back.max_abs_diff(state))
}

/// Terminal errors against a reference for a sequence of step sizes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ConvergenceReport {
    pub step_sizes: Vec<f64>,
    pub errors: Vec<f64>,
    /// Least-squares slope of `log(error)` against `log(h)`.
    pub slope: f64,
    pub target_order: usize,
    /// `false` when the errors stop decreasing with `h`; usually the solver tolerance or
    /// round-off floor has been reached.
    pub monotone: bool,
}

impl ConvergenceReport {
    pub fn within(&self, tolerance: f64) -> bool {
        (self.slope - self.target_order as f64).abs() <= tolerance
    }
}

/// Least-squares slope through `(log x_i, log y_i)`.
pub fn fitted_slope(x: &[f64], y: &[f64]) -> f64 {
    let pts: Vec<(f64, f64)> = x
        .iter()
        .zip(y)
        .filter(|(_, &e)| e > 0.0)
        .map(|(&h, &e)| (h.ln(), e.ln()))
        .collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx) * (p.0 - mx)).sum();
    sxy / sxx
}

fn steps_to(t_end: f64, h: f64) -> Result<usize> {
    let n = (t_end / h).round();
    if n < 1.0 || ((t_end / h) - n).abs() > 1e-9 * n.max(1.0) {
        return Err(Error::Config(format!("t_end = {t_end} is not a positive multiple of h = {h}")));
    }
    Ok(n as usize)
}

/// Integrates to `t_end` with every `h` in `step_sizes` and fits the order against the
/// state `reference` at `t_end`.
pub fn convergence_order<M: OneStepMethod + ?Sized>(
    method: &M,
    system: &dyn MechanicalSystem,
    initial: &PhaseState,
    step_sizes: &[f64],
    t_end: f64,
    reference: &PhaseState,
    target_order: usize,
) -> Result<ConvergenceReport> {
    if step_sizes.len() < 3 {
        return Err(Error::Config(format!(
            "convergence study needs at least 3 step sizes, got {}",
            step_sizes.len()
        )));
    }
    let mut errors = Vec::with_capacity(step_sizes.len());
    for &h in step_sizes {
        let n = steps_to(t_end, h)?;
        let traj = integrate(method, system, initial, h, n)?;
        errors.push(traj.last().max_abs_diff(reference));
    }
    let mut order: Vec<usize> = (0..step_sizes.len()).collect();
    order.sort_by(|&a, &b| step_sizes[b].total_cmp(&step_sizes[a]));
    let monotone = errors.iter().all(|&e| e > 0.0)
        && order.windows(2).all(|w| errors[w[1]] < errors[w[0]]);
    Ok(ConvergenceReport {
        step_sizes: step_sizes.to_vec(),
        slope: fitted_slope(step_sizes, &errors),
        errors,
        target_order,
        monotone,
    })
}

/// Exact flow of `H = ½p² + ½ω²q²` (one degree of freedom).
pub fn harmonic_exact(omega: f64, initial: &PhaseState, t: f64) -> PhaseState {
    let (q0, p0) = (initial.q()[0], initial.p()[0]);
    let (s, c) = (omega * t).sin_cos();
    PhaseState::new(vec![q0 * c + p0 / omega * s], vec![p0 * c - q0 * omega * s])
        .expect("finite input gives finite output")
}

/// Exact unit circular Kepler orbit through `q = (1, 0)`, `p = (0, 1)`.
pub fn kepler_circular_exact(t: f64) -> PhaseState {
    let (s, c) = t.sin_cos();
    PhaseState::new(vec![c, s], vec![-s, c]).expect("finite")
}

/// High-accuracy reference at `t_end`: Galerkin `s = 3` on three Gauss nodes with step
/// `h / 100`.
pub fn reference_solution(
    system: &dyn MechanicalSystem,
    initial: &PhaseState,
    h: f64,
    t_end: f64,
) -> Result<PhaseState> {
    let fine = h / 100.0;
    let n = steps_to(t_end, fine)?;
    let method = GalerkinIntegrator::gauss(3, 3, false, SolverConfig::with_tol(1e-14))?;
    Ok(integrate(&method, system, initial, fine, n)?.last().clone())
}

/// Max componentwise gap between the Lagrangian and Galerkin trajectories with the same
/// `s`, quadrature and solver settings.
pub fn equivalence_defect(
    system: &dyn MechanicalSystem,
    initial: &PhaseState,
    h: f64,
    n_steps: usize,
    s: usize,
    quad: &QuadratureRule,
    solver: &SolverConfig,
) -> Result<f64> {
    let (lagrangian, galerkin) = paired_trajectories(system, initial, h, n_steps, s, quad, solver)?;
    Ok(lagrangian.max_abs_diff(&galerkin))
}

/// Both families' trajectories, Lagrangian first.
pub fn paired_trajectories(
    system: &dyn MechanicalSystem,
    initial: &PhaseState,
    h: f64,
    n_steps: usize,
    s: usize,
    quad: &QuadratureRule,
    solver: &SolverConfig,
) -> Result<(crate::stepping::Trajectory, crate::stepping::Trajectory)> {
    let lagrangian = LagrangianVi::new(
        LagrangianViConfig::new(s, quad.clone(), *solver)?,
        LagrangianForm::Lagrangian,
    )?;
    let tableau = crate::galerkin::build_csprk(s, false)?.discretize(quad)?;
    let galerkin = GalerkinIntegrator::new(tableau, *solver)?;
    Ok((
        integrate(&lagrangian, system, initial, h, n_steps)?,
        integrate(&galerkin, system, initial, h, n_steps)?,
    ))
}

/// Energy deviation `|H(z_k) − H(z_0)|` along a trajectory, split into halves.
#[derive(Debug, Clone, Copy, PartialEq, Serialize)]
pub struct EnergyDrift {
    pub max_deviation: f64,
    pub first_half_max: f64,
    pub second_half_max: f64,
}

impl EnergyDrift {
    /// `second_half_max / first_half_max`; a secular drift makes this grow with the run
    /// length while a bounded oscillation keeps it near 1.
    pub fn trend_ratio(&self) -> f64 {
        if self.first_half_max == 0.0 {
            if self.second_half_max == 0.0 {
                1.0
            } else {
                f64::INFINITY
            }
        } else {
            self.second_half_max / self.first_half_max
        }
    }
}

/// Energy deviation over `n_steps` steps of size `h`.
pub fn energy_drift<M: OneStepMethod + ?Sized>(
    method: &M,
    system: &dyn MechanicalSystem,
    initial: &PhaseState,
    h: f64,
    n_steps: usize,
) -> Result<EnergyDrift> {
    if !system.has_energy() {
        return Err(Error::Unsupported("an energy function"));
    }
    let h0 = system.state_energy(initial)?;
    let half = n_steps / 2;
    let mut drift = EnergyDrift { max_deviation: 0.0, first_half_max: 0.0, second_half_max: 0.0 };
    let mut z = initial.clone();
    for k in 1..=n_steps {
        z = method.step(system, &z, h).map_err(|e| e.at_step(k - 1))?;
        let dev = (system.state_energy(&z)? - h0).abs();
        drift.max_deviation = drift.max_deviation.max(dev);
        if k <= half {
            drift.first_half_max = drift.first_half_max.max(dev);
        } else {
            drift.second_half_max = drift.second_half_max.max(dev);
        }
    }
    Ok(drift)
}

/// Summary of the structural checks for one integrator on one problem.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct StructureReport {
    pub symplecticity_defect: f64,
    pub symmetry_defect: f64,
    pub energy_drift: Option<f64>,
    pub equivalence_defect: Option<f64>,
}
