//! Finite-difference symplecticity `‖JᵀΩJ − Ω‖` and time-reversal symmetry
//! `‖Φ₋ₕ(Φₕ(z)) − z‖` of every integrator on every benchmark problem.

use varint::analysis::{symmetry_defect, symplecticity_defect};
use varint::mechanics::{default_initial_state, problem, ProblemParams, PROBLEM_NAMES};
use varint::{ExplicitEuler, GalerkinIntegrator, LagrangianForm, LagrangianVi, LagrangianViConfig, OneStepMethod, SolverConfig};

fn main() -> varint::Result<()> {
    let solver = SolverConfig::with_tol(1e-13);
    println!("{:<9} {:<32} {:>13} {:>10}", "problem", "method", "symplecticity", "symmetry");
    for name in PROBLEM_NAMES {
        let sys = problem(name, &ProblemParams::default())?;
        let z0 = default_initial_state(name)?;
        let mut methods: Vec<Box<dyn OneStepMethod>> = vec![Box::new(ExplicitEuler)];
        for s in 1..=3 {
            for form in [LagrangianForm::Lagrangian, LagrangianForm::Hamiltonian] {
                methods.push(Box::new(LagrangianVi::new(LagrangianViConfig::gauss(s, solver)?, form)?));
            }
            methods.push(Box::new(GalerkinIntegrator::gauss(s, s, false, solver)?));
            methods.push(Box::new(GalerkinIntegrator::gauss(s, s + 1, true, solver)?));
        }
        for method in &methods {
            let symp = symplecticity_defect(method, sys.as_ref(), &z0, 0.1, 1e-5)?;
            let sym = symmetry_defect(method, sys.as_ref(), &z0, 0.1)?;
            println!("{name:<9} {:<32} {symp:>13.2e} {sym:>10.2e}", method.name());
        }
    }
    Ok(())
}
