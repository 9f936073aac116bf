//! With one basis function and one Gauss node both integrators are the implicit midpoint
//! rule. On the harmonic oscillator that is the Cayley map of the rotation generator.

use varint::mechanics::make_harmonic_oscillator;
use varint::{GalerkinIntegrator, LagrangianForm, LagrangianVi, LagrangianViConfig, OneStepMethod, PhaseState, SolverConfig};

fn main() -> varint::Result<()> {
    let sys = make_harmonic_oscillator(1.0)?;
    let z0 = PhaseState::new(vec![1.0], vec![0.0])?;
    let h = 0.1;

    let k = h / 2.0;
    let cayley = ((1.0 - k * k) / (1.0 + k * k), -2.0 * k / (1.0 + k * k));
    println!("Cayley map            q = {:.16}  p = {:.16}", cayley.0, cayley.1);

    let solver = SolverConfig::with_tol(1e-14);
    let lagrangian = LagrangianVi::new(LagrangianViConfig::gauss(1, solver)?, LagrangianForm::Lagrangian)?;
    let galerkin = GalerkinIntegrator::gauss(1, 1, false, solver)?;
    for method in [&lagrangian as &dyn OneStepMethod, &galerkin] {
        let z1 = method.step(&sys, &z0, h)?;
        println!("{:<21} q = {:.16}  p = {:.16}", method.name(), z1.q()[0], z1.p()[0]);
    }

    let t = galerkin.tableau();
    println!("\ntableau: c = {:?}, a = {:?}, a_hat = {:?}, b = {:?}", t.c(), t.a(), t.a_hat(), t.b());
    Ok(())
}
