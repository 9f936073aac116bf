//! Global error against the exact flow: order 2s for s = 1, 2, 3.

use varint::analysis::{convergence_order, harmonic_exact, kepler_circular_exact};
use varint::mechanics::{default_initial_state, make_harmonic_oscillator, make_kepler};
use varint::{GalerkinIntegrator, LagrangianForm, LagrangianVi, LagrangianViConfig, OneStepMethod, SolverConfig};

fn main() -> varint::Result<()> {
    let grid = [0.5, 0.25, 0.125, 0.0625];
    let solver = SolverConfig::with_tol(1e-14);
    let harmonic = make_harmonic_oscillator(1.0)?;
    let kepler = make_kepler();

    for s in 1..=3 {
        let methods: [Box<dyn OneStepMethod>; 2] = [
            Box::new(LagrangianVi::new(LagrangianViConfig::gauss(s, solver)?, LagrangianForm::Lagrangian)?),
            Box::new(GalerkinIntegrator::gauss(s, s, false, solver)?),
        ];
        for method in &methods {
            let z0 = default_initial_state("harmonic")?;
            let ho = convergence_order(method, &harmonic, &z0, &grid, 10.0, &harmonic_exact(1.0, &z0, 10.0), 2 * s)?;
            let z0 = default_initial_state("kepler")?;
            let kp = convergence_order(method, &kepler, &z0, &grid, 1.0, &kepler_circular_exact(1.0), 2 * s)?;
            println!("{:<20} harmonic {:.3}   kepler {:.3}", method.name(), ho.slope, kp.slope);
            for (h, e) in grid.iter().zip(&kp.errors) {
                println!("    h = {h:<7} kepler error {e:.3e}");
            }
        }
    }
    Ok(())
}
