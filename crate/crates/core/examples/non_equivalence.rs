//! A position-dependent mass `L = ½(1 + ε sin q)q̇² − ½q²` breaks the equivalence. With
//! exactly `s` Gauss nodes both families still solve the same discrete equations, so the
//! difference only shows once the quadrature has more nodes than the basis.

use varint::analysis::{paired_trajectories, symmetry_defect, symplecticity_defect};
use varint::mechanics::{default_initial_state, make_position_dependent_mass};
use varint::{GalerkinIntegrator, LagrangianForm, LagrangianVi, LagrangianViConfig, OneStepMethod, QuadratureRule, SolverConfig};

fn main() -> varint::Result<()> {
    let sys = make_position_dependent_mass(0.5)?;
    let z0 = default_initial_state("pdm")?;
    let solver = SolverConfig::with_tol(1e-13);

    println!(" s  m   gap after 50 steps of h = 0.1");
    for s in 1..=3 {
        for m in s..=s + 2 {
            let quad = QuadratureRule::gauss_legendre(m)?;
            let (l, g) = paired_trajectories(&sys, &z0, 0.1, 50, s, &quad, &solver)?;
            println!("{s:2} {m:2}   {:.2e}", l.max_abs_diff(&g));
        }
    }

    // different maps, but each one is still symmetric and symplectic
    let quad = QuadratureRule::gauss_legendre(3)?;
    let lagrangian = LagrangianVi::new(LagrangianViConfig::new(2, quad.clone(), solver)?, LagrangianForm::Lagrangian)?;
    let galerkin = GalerkinIntegrator::gauss(2, 3, false, solver)?;
    println!();
    for method in [&lagrangian as &dyn OneStepMethod, &galerkin] {
        println!(
            "{:<20} symmetry {:.1e}  symplecticity {:.1e}",
            method.name(),
            symmetry_defect(method, &sys, &z0, 0.1)?,
            symplecticity_defect(method, &sys, &z0, 0.1, 1e-5)?
        );
    }
    Ok(())
}
