//! Plugging in a new mechanical system: the Hénon–Heiles potential
//! `U = ½(x² + y²) + x²y − y³/3` through the quadratic-kinetic constructor, and a
//! hand-written Duffing-type Lagrangian through the trait.

use varint::analysis::energy_drift;
use nalgebra::DMatrix;
use varint::mechanics::QuadraticKineticSystem;
use varint::{
    integrate, GalerkinIntegrator, LagrangianForm, LagrangianVi, LagrangianViConfig, MechanicalSystem, PhaseState,
    SolverConfig,
};

/// `L = ½q̇² − ¼q⁴`, given only through its Lagrangian derivatives.
struct Quartic;

impl MechanicalSystem for Quartic {
    fn name(&self) -> &str {
        "quartic"
    }

    fn dim(&self) -> usize {
        1
    }

    fn lagrangian_grad_q(&self, q: &[f64], _qdot: &[f64], out: &mut [f64]) -> varint::Result<()> {
        out[0] = -q[0].powi(3);
        Ok(())
    }

    fn lagrangian_grad_qdot(&self, _q: &[f64], qdot: &[f64], out: &mut [f64]) -> varint::Result<()> {
        out[0] = qdot[0];
        Ok(())
    }
}

fn main() -> varint::Result<()> {
    let henon_heiles = QuadraticKineticSystem::new(
        "henon-heiles",
        DMatrix::identity(2, 2),
        |q: &[f64]| Ok(0.5 * (q[0] * q[0] + q[1] * q[1]) + q[0] * q[0] * q[1] - q[1].powi(3) / 3.0),
        |q: &[f64], g: &mut [f64]| {
            g[0] = q[0] + 2.0 * q[0] * q[1];
            g[1] = q[1] + q[0] * q[0] - q[1] * q[1];
            Ok(())
        },
    )?;
    let z0 = PhaseState::new(vec![0.1, -0.2], vec![0.35, 0.1])?;
    let solver = SolverConfig::with_tol(1e-13);
    let method = GalerkinIntegrator::gauss(2, 2, false, solver)?;
    let drift = energy_drift(&method, &henon_heiles, &z0, 0.1, 20_000)?;
    println!("Hénon–Heiles, E = {:.6}: max |ΔH| {:.2e} over t = 2000", henon_heiles.state_energy(&z0)?, drift.max_deviation);

    // the Lagrangian family needs no Hamiltonian
    let lagrangian = LagrangianVi::new(LagrangianViConfig::gauss(2, solver)?, LagrangianForm::Lagrangian)?;
    let traj = integrate(&lagrangian, &Quartic, &PhaseState::new(vec![1.0], vec![0.0])?, 0.05, 200)?;
    let energy = |z: &PhaseState| 0.5 * z.p()[0].powi(2) + 0.25 * z.q()[0].powi(4);
    let e0 = energy(&traj.states()[0]);
    let worst = traj.states().iter().map(|z| (energy(z) - e0).abs()).fold(0.0, f64::max);
    println!("quartic oscillator via its Lagrangian: q(10) = {:.6}, max |ΔE| {worst:.2e}", traj.last().q()[0]);
    Ok(())
}
