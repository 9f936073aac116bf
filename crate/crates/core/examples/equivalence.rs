//! For `L = ½q̇ᵀMq̇ − U(q)` the Lagrangian and Galerkin integrators produce the same
//! trajectory. The gap is bounded by the stage-solver tolerance.

use varint::analysis::paired_trajectories;
use varint::mechanics::{default_initial_state, problem, ProblemParams};
use varint::{QuadratureRule, SolverConfig};

fn main() -> varint::Result<()> {
    let solver = SolverConfig::with_tol(1e-13);
    println!("problem    s  m   max gap over 100 steps, h = 0.1");
    for name in ["harmonic", "pendulum", "kepler"] {
        let sys = problem(name, &ProblemParams::default())?;
        let z0 = default_initial_state(name)?;
        for s in 1..=3 {
            for m in [s, s + 1] {
                let quad = QuadratureRule::gauss_legendre(m)?;
                let (l, g) = paired_trajectories(sys.as_ref(), &z0, 0.1, 100, s, &quad, &solver)?;
                println!("{name:<9} {s:2} {m:2}   {:.2e}", l.max_abs_diff(&g));
            }
        }
    }
    Ok(())
}
