use proptest::prelude::*;
use varint::analysis::{
    convergence_order, energy_drift, harmonic_exact, paired_trajectories, step_jacobian, symmetry_defect,
    symplecticity_defect, Difference,
};
use varint::mechanics::{
    default_initial_state, make_harmonic_oscillator, make_kepler, make_pendulum, make_position_dependent_mass,
    MechanicalSystem, PhaseState,
};
use varint::{ExplicitEuler, GalerkinIntegrator, LagrangianForm, LagrangianVi, LagrangianViConfig, OneStepMethod, QuadratureRule, SolverConfig};

fn lagrangian(s: usize, tol: f64) -> LagrangianVi {
    LagrangianVi::new(LagrangianViConfig::gauss(s, SolverConfig::with_tol(tol)).unwrap(), LagrangianForm::Lagrangian).unwrap()
}

fn galerkin(s: usize, swapped: bool, tol: f64) -> GalerkinIntegrator {
    GalerkinIntegrator::gauss(s, s, swapped, SolverConfig::with_tol(tol)).unwrap()
}

#[test]
fn order_on_short_grid() {
    let sys = make_harmonic_oscillator(1.0).unwrap();
    let z0 = PhaseState::new(vec![1.0], vec![0.0]).unwrap();
    let exact = PhaseState::new(vec![1f64.cos()], vec![-(1f64.sin())]).unwrap();
    let grid = [0.2, 0.1, 0.05, 0.025];
    for s in 1..=3 {
        let methods: [Box<dyn OneStepMethod>; 3] =
            [Box::new(lagrangian(s, 1e-14)), Box::new(galerkin(s, false, 1e-14)), Box::new(galerkin(s, true, 1e-14))];
        let slopes: Vec<f64> = methods
            .iter()
            .map(|m| convergence_order(m, &sys, &z0, &grid, 1.0, &exact, 2 * s).unwrap().slope)
            .collect();
        for slope in &slopes {
            assert!((slope - 2.0 * s as f64).abs() <= 0.2, "s={s} {slopes:?}");
        }
        // the swapped variant converges at the same rate
        assert!((slopes[1] - slopes[2]).abs() < 0.2);
    }
}

#[test]
fn jacobian_schemes_agree() {
    let systems: [(&str, Box<dyn MechanicalSystem>); 4] = [
        ("harmonic", Box::new(make_harmonic_oscillator(1.0).unwrap())),
        ("pendulum", Box::new(make_pendulum())),
        ("kepler", Box::new(make_kepler())),
        ("pdm", Box::new(make_position_dependent_mass(0.5).unwrap())),
    ];
    let method = galerkin(2, false, 1e-14);
    for (name, sys) in &systems {
        let z0 = default_initial_state(name).unwrap();
        let fwd = step_jacobian(&method, sys.as_ref(), &z0, 0.1, 1e-6, Difference::Forward).unwrap();
        let cen = step_jacobian(&method, sys.as_ref(), &z0, 0.1, 1e-6, Difference::Central).unwrap();
        assert!((fwd - cen).amax() < 1e-4, "{name}");
    }
}

#[test]
fn pdm_swapped_variant_keeps_structure() {
    let sys = make_position_dependent_mass(0.5).unwrap();
    let z0 = default_initial_state("pdm").unwrap();
    let method = GalerkinIntegrator::gauss(2, 3, true, SolverConfig::with_tol(1e-13)).unwrap();
    assert!(symplecticity_defect(&method, &sys, &z0, 0.1, 1e-5).unwrap() < 1e-6);
    assert!(symmetry_defect(&method, &sys, &z0, 0.1).unwrap() < 1e-11);
}

#[test]
fn equivalence_is_symmetric() {
    let sys = make_pendulum();
    let z0 = default_initial_state("pendulum").unwrap();
    let quad = QuadratureRule::gauss_legendre(2).unwrap();
    let (l, g) = paired_trajectories(&sys, &z0, 0.1, 20, 2, &quad, &SolverConfig::with_tol(1e-13)).unwrap();
    assert_eq!(l.max_abs_diff(&g), g.max_abs_diff(&l));
}

#[test]
fn explicit_euler_drifts() {
    let sys = make_pendulum();
    let z0 = default_initial_state("pendulum").unwrap();
    let drift = energy_drift(&ExplicitEuler, &sys, &z0, 0.1, 10_000).unwrap();
    assert!(drift.max_deviation > 1e-1);
    assert!(drift.trend_ratio() > 1.0);
}

#[test]
fn constraint_consistency() {
    let sys = make_kepler();
    let z0 = default_initial_state("kepler").unwrap();
    let method = lagrangian(3, 1e-13);
    let (z1, stages) = method.step_with_stages(&sys, &z0, 0.1).unwrap();
    let quad = method.config().quadrature();
    for a in 0..2 {
        let sum: f64 = quad
            .nodes()
            .iter()
            .zip(quad.weights())
            .map(|(&c, w)| w * stages.velocity_at(method.basis(), c)[a])
            .sum();
        assert!((z1.q()[a] - z0.q()[a] - 0.1 * sum).abs() < 1e-14);
    }
}

#[test]
fn harmonic_reference_is_exact_flow() {
    let z0 = PhaseState::new(vec![0.2], vec![0.7]).unwrap();
    let z = harmonic_exact(2.0, &z0, 0.3);
    let energy = |z: &PhaseState| 0.5 * z.p()[0].powi(2) + 2.0 * z.q()[0].powi(2);
    assert!((energy(&z) - energy(&z0)).abs() < 1e-15);
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn families_agree_for_quadratic_kinetic_energy(
        s in 1usize..=3,
        h in 0.01f64..=0.2,
        q in -1.5f64..1.5,
        p in -1.0f64..1.0,
        pendulum in any::<bool>(),
    ) {
        let tol = 1e-13;
        let sys: Box<dyn MechanicalSystem> =
            if pendulum { Box::new(make_pendulum()) } else { Box::new(make_harmonic_oscillator(1.3).unwrap()) };
        let z0 = PhaseState::new(vec![q], vec![p]).unwrap();
        let a = lagrangian(s, tol).step(sys.as_ref(), &z0, h).unwrap();
        let b = galerkin(s, false, tol).step(sys.as_ref(), &z0, h).unwrap();
        prop_assert!(a.max_abs_diff(&b) < 100.0 * tol);
    }

    #[test]
    fn steps_are_reversible(s in 1usize..=3, h in 0.01f64..=0.2, q in -1.5f64..1.5, p in -1.0f64..1.0) {
        let tol = 1e-13;
        let sys = make_pendulum();
        let z0 = PhaseState::new(vec![q], vec![p]).unwrap();
        prop_assert!(symmetry_defect(&lagrangian(s, tol), &sys, &z0, h).unwrap() <= 10.0 * tol);
        prop_assert!(symmetry_defect(&galerkin(s, false, tol), &sys, &z0, h).unwrap() <= 10.0 * tol);
    }

    #[test]
    fn kepler_maps_are_symplectic(s in 1usize..=3, angle in 0.0f64..std::f64::consts::TAU, e in 0.0f64..0.3) {
        let sys = make_kepler();
        let (sn, cs) = angle.sin_cos();
        let z0 = PhaseState::new(vec![cs, sn], vec![-sn * (1.0 + e), cs * (1.0 + e)]).unwrap();
        let defect = symplecticity_defect(&galerkin(s, false, 1e-13), &sys, &z0, 0.1, 1e-5).unwrap();
        prop_assert!(defect < 1e-6);
    }
}
