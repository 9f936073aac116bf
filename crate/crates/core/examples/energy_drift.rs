//! Long pendulum run: the symplectic integrators keep the energy error bounded, explicit
//! Euler does not.
//!
//! ```text
//! cargo run --release --example energy_drift
//! ```

use varint::analysis::energy_drift;
use varint::mechanics::{default_initial_state, make_pendulum};
use varint::{ExplicitEuler, GalerkinIntegrator, LagrangianForm, LagrangianVi, LagrangianViConfig, OneStepMethod, SolverConfig};

fn main() -> varint::Result<()> {
    let sys = make_pendulum();
    let z0 = default_initial_state("pendulum")?;
    let solver = SolverConfig::with_tol(1e-13);
    let lagrangian = LagrangianVi::new(LagrangianViConfig::gauss(2, solver)?, LagrangianForm::Lagrangian)?;
    let galerkin = GalerkinIntegrator::gauss(2, 2, false, solver)?;

    println!("method                 steps     max |ΔH|    2nd half / 1st half");
    for method in [&lagrangian as &dyn OneStepMethod, &galerkin, &ExplicitEuler] {
        for steps in [1_000, 10_000, 100_000] {
            if method.name() == "explicit-euler" && steps > 10_000 {
                continue;
            }
            let d = energy_drift(method, &sys, &z0, 0.1, steps)?;
            println!("{:<20} {steps:>7}   {:.3e}   {:.3}", method.name(), d.max_deviation, d.trend_ratio());
        }
    }
    Ok(())
}
