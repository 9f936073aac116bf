use nalgebra::DMatrix;

use super::{MassMatrix, MechanicalSystem};
use crate::error::{Error, Result};

/// `‖q‖` below which the Kepler potential reports a singularity.
pub const KEPLER_SINGULARITY_RADIUS: f64 = 1e-12;

type PotentialFn = Box<dyn Fn(&[f64]) -> Result<f64> + Send + Sync>;
type PotentialGradFn = Box<dyn Fn(&[f64], &mut [f64]) -> Result<()> + Send + Sync>;

/// `L(q, q̇) = ½q̇ᵀMq̇ − U(q)`, `H(q, p) = ½pᵀM⁻¹p + U(q)`.
pub struct QuadraticKineticSystem {
    name: String,
    mass: MassMatrix,
    potential: PotentialFn,
    potential_grad: PotentialGradFn,
}

impl std::fmt::Debug for QuadraticKineticSystem {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.debug_struct("QuadraticKineticSystem")
            .field("name", &self.name)
            .field("mass", self.mass.matrix())
            .finish_non_exhaustive()
    }
}

impl QuadraticKineticSystem {
    pub fn new(
        name: impl Into<String>,
        mass: DMatrix<f64>,
        potential: impl Fn(&[f64]) -> Result<f64> + Send + Sync + 'static,
        potential_grad: impl Fn(&[f64], &mut [f64]) -> Result<()> + Send + Sync + 'static,
    ) -> Result<Self> {
        Ok(Self {
            name: name.into(),
            mass: MassMatrix::new(mass)?,
            potential: Box::new(potential),
            potential_grad: Box::new(potential_grad),
        })
    }

    pub fn potential(&self, q: &[f64]) -> Result<f64> {
        (self.potential)(q)
    }

    pub fn potential_grad(&self, q: &[f64], out: &mut [f64]) -> Result<()> {
        (self.potential_grad)(q, out)
    }
}

impl MechanicalSystem for QuadraticKineticSystem {
    fn name(&self) -> &str {
        &self.name
    }

    fn dim(&self) -> usize {
        self.mass.dim()
    }

    fn lagrangian_grad_q(&self, q: &[f64], _qdot: &[f64], out: &mut [f64]) -> Result<()> {
        (self.potential_grad)(q, out)?;
        out.iter_mut().for_each(|v| *v = -*v);
        Ok(())
    }

    fn lagrangian_grad_qdot(&self, _q: &[f64], qdot: &[f64], out: &mut [f64]) -> Result<()> {
        self.mass.apply(qdot, out);
        Ok(())
    }

    fn has_hamiltonian(&self) -> bool {
        true
    }

    fn hamiltonian_grad_q(&self, q: &[f64], _p: &[f64], out: &mut [f64]) -> Result<()> {
        (self.potential_grad)(q, out)
    }

    fn hamiltonian_grad_p(&self, _q: &[f64], p: &[f64], out: &mut [f64]) -> Result<()> {
        self.mass.apply_inverse(p, out);
        Ok(())
    }

    fn has_energy(&self) -> bool {
        true
    }

    fn energy(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        let mut v = vec![0.0; p.len()];
        self.mass.apply_inverse(p, &mut v);
        let kinetic: f64 = 0.5 * p.iter().zip(&v).map(|(a, b)| a * b).sum::<f64>();
        Ok(kinetic + (self.potential)(q)?)
    }

    fn mass_matrix(&self) -> Option<&MassMatrix> {
        Some(&self.mass)
    }
}

/// `H = ½p² + ½ω²q²`.
pub fn make_harmonic_oscillator(omega: f64) -> Result<QuadraticKineticSystem> {
    if !(omega > 0.0 && omega.is_finite()) {
        return Err(Error::Config(format!("harmonic oscillator needs ω > 0, got {omega}")));
    }
    let w2 = omega * omega;
    QuadraticKineticSystem::new(
        "harmonic",
        DMatrix::identity(1, 1),
        move |q| Ok(0.5 * w2 * q[0] * q[0]),
        move |q, out| {
            out[0] = w2 * q[0];
            Ok(())
        },
    )
}

/// `H = ½p² + 1 − cos q`.
pub fn make_pendulum() -> QuadraticKineticSystem {
    QuadraticKineticSystem::new(
        "pendulum",
        DMatrix::identity(1, 1),
        |q| Ok(1.0 - q[0].cos()),
        |q, out| {
            out[0] = q[0].sin();
            Ok(())
        },
    )
    .expect("unit mass is valid")
}

/// Planar two-body problem in relative coordinates: `H = ½‖p‖² − 1/‖q‖`.
pub fn make_kepler() -> QuadraticKineticSystem {
    fn radius(q: &[f64]) -> Result<f64> {
        let r = (q[0] * q[0] + q[1] * q[1]).sqrt();
        if r < KEPLER_SINGULARITY_RADIUS {
            return Err(Error::Singularity(format!(
                "Kepler potential evaluated at |q| = {r:.3e} < {KEPLER_SINGULARITY_RADIUS:e}"
            )));
        }
        Ok(r)
    }
    QuadraticKineticSystem::new(
        "kepler",
        DMatrix::identity(2, 2),
        |q| Ok(-1.0 / radius(q)?),
        |q, out| {
            let r = radius(q)?;
            let r3 = r * r * r;
            out[0] = q[0] / r3;
            out[1] = q[1] / r3;
            Ok(())
        },
    )
    .expect("unit mass is valid")
}

/// `U ≡ 0`, `M = I_d`. Both integrators are exact on it.
pub fn make_free_particle(d: usize) -> Result<QuadraticKineticSystem> {
    if d == 0 {
        return Err(Error::Config("free particle needs d ≥ 1".into()));
    }
    QuadraticKineticSystem::new(
        "free",
        DMatrix::identity(d, d),
        |_| Ok(0.0),
        |_, out| {
            out.fill(0.0);
            Ok(())
        },
    )
}

/// `L(q, q̇) = ½(1 + ε sin q) q̇² − ½q²`.
///
/// The kinetic energy is not quadratic with a constant mass, so `P(τ) = ∂L/∂q̇` along a
/// polynomial path is not a polynomial and the two integrator families can differ.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PositionDependentMass {
    epsilon: f64,
}

impl PositionDependentMass {
    pub fn epsilon(&self) -> f64 {
        self.epsilon
    }

    fn mass(&self, q: f64) -> Result<f64> {
        let mu = 1.0 + self.epsilon * q.sin();
        if !(mu > 0.0) {
            return Err(Error::Config(format!("mass factor {mu} ≤ 0 at q = {q}")));
        }
        Ok(mu)
    }
}

pub fn make_position_dependent_mass(epsilon: f64) -> Result<PositionDependentMass> {
    if !(epsilon.abs() < 1.0) {
        return Err(Error::Config(format!("position-dependent mass needs |ε| < 1, got {epsilon}")));
    }
    Ok(PositionDependentMass { epsilon })
}

impl MechanicalSystem for PositionDependentMass {
    fn name(&self) -> &str {
        "pdm"
    }

    fn dim(&self) -> usize {
        1
    }

    fn lagrangian_grad_q(&self, q: &[f64], qdot: &[f64], out: &mut [f64]) -> Result<()> {
        self.mass(q[0])?;
        out[0] = 0.5 * self.epsilon * q[0].cos() * qdot[0] * qdot[0] - q[0];
        Ok(())
    }

    fn lagrangian_grad_qdot(&self, q: &[f64], qdot: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = self.mass(q[0])? * qdot[0];
        Ok(())
    }

    fn has_hamiltonian(&self) -> bool {
        true
    }

    fn hamiltonian_grad_q(&self, q: &[f64], p: &[f64], out: &mut [f64]) -> Result<()> {
        let mu = self.mass(q[0])?;
        out[0] = -0.5 * p[0] * p[0] * self.epsilon * q[0].cos() / (mu * mu) + q[0];
        Ok(())
    }

    fn hamiltonian_grad_p(&self, q: &[f64], p: &[f64], out: &mut [f64]) -> Result<()> {
        out[0] = p[0] / self.mass(q[0])?;
        Ok(())
    }

    fn has_energy(&self) -> bool {
        true
    }

    fn energy(&self, q: &[f64], p: &[f64]) -> Result<f64> {
        Ok(0.5 * p[0] * p[0] / self.mass(q[0])? + 0.5 * q[0] * q[0])
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanics::{hamiltonian_vector_field, PhaseState};
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;
    use std::f64::consts::FRAC_PI_2;

    fn grad_q_h(sys: &dyn MechanicalSystem, q: &[f64], p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sys.dim()];
        sys.hamiltonian_grad_q(q, p, &mut out).unwrap();
        out
    }

    fn grad_p_h(sys: &dyn MechanicalSystem, q: &[f64], p: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sys.dim()];
        sys.hamiltonian_grad_p(q, p, &mut out).unwrap();
        out
    }

    fn grad_q_l(sys: &dyn MechanicalSystem, q: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sys.dim()];
        sys.lagrangian_grad_q(q, v, &mut out).unwrap();
        out
    }

    fn grad_qdot_l(sys: &dyn MechanicalSystem, q: &[f64], v: &[f64]) -> Vec<f64> {
        let mut out = vec![0.0; sys.dim()];
        sys.lagrangian_grad_qdot(q, v, &mut out).unwrap();
        out
    }

    #[test]
    fn harmonic_values() {
        let sys = make_harmonic_oscillator(1.0).unwrap();
        assert_eq!(sys.energy(&[1.0], &[0.0]).unwrap(), 0.5);
        assert_eq!(grad_q_h(&sys, &[1.0], &[0.0]), vec![1.0]);
        let sys = make_harmonic_oscillator(2.0).unwrap();
        assert_eq!(sys.energy(&[1.0], &[2.0]).unwrap(), 4.0);
        assert!(sys.is_quadratic_kinetic());
        assert!(matches!(make_harmonic_oscillator(0.0), Err(Error::Config(_))));
        assert!(matches!(make_harmonic_oscillator(-1.0), Err(Error::Config(_))));
    }

    #[test]
    fn pendulum_values() {
        let sys = make_pendulum();
        assert_eq!(sys.energy(&[0.0], &[0.0]).unwrap(), 0.0);
        assert_abs_diff_eq!(sys.energy(&[FRAC_PI_2], &[0.0]).unwrap(), 1.0, epsilon = 1e-15);
        assert_eq!(grad_q_l(&sys, &[FRAC_PI_2], &[0.0]), vec![-1.0]);
    }

    #[test]
    fn kepler_values() {
        let sys = make_kepler();
        assert_eq!(sys.energy(&[1.0, 0.0], &[0.0, 1.0]).unwrap(), -0.5);
        let mut g = [0.0; 2];
        sys.potential_grad(&[1.0, 0.0], &mut g).unwrap();
        assert_eq!(g, [1.0, 0.0]);
        assert!(matches!(sys.energy(&[0.0, 0.0], &[0.3, 1.0]), Err(Error::Singularity(_))));
        assert!(matches!(
            sys.hamiltonian_grad_q(&[0.0, 0.0], &[0.3, 1.0], &mut g),
            Err(Error::Singularity(_))
        ));
    }

    #[test]
    fn position_dependent_mass_values() {
        let sys = make_position_dependent_mass(0.0).unwrap();
        assert_eq!(grad_qdot_l(&sys, &[0.7], &[2.0]), vec![2.0]);
        let sys = make_position_dependent_mass(0.5).unwrap();
        assert_abs_diff_eq!(grad_qdot_l(&sys, &[FRAC_PI_2], &[1.0])[0], 1.5, epsilon = 1e-15);
        assert_abs_diff_eq!(grad_p_h(&sys, &[FRAC_PI_2], &[3.0])[0], 2.0, epsilon = 1e-15);
        assert!(!sys.is_quadratic_kinetic());
        assert!(make_position_dependent_mass(1.0).is_err());
        assert!(make_position_dependent_mass(-1.5).is_err());
    }

    #[test]
    fn free_particle() {
        let sys = make_free_particle(3).unwrap();
        assert_eq!(sys.dim(), 3);
        assert_eq!(grad_q_h(&sys, &[1.0, 2.0, 3.0], &[0.0; 3]), vec![0.0; 3]);
        assert!(make_free_particle(0).is_err());
    }

    fn systems() -> Vec<Box<dyn MechanicalSystem>> {
        vec![
            Box::new(make_harmonic_oscillator(1.3).unwrap()),
            Box::new(make_pendulum()),
            Box::new(make_kepler()),
            Box::new(make_position_dependent_mass(0.5).unwrap()),
        ]
    }

    fn point(d: usize, seed: &[f64]) -> (Vec<f64>, Vec<f64>) {
        // keep Kepler away from the origin
        let q: Vec<f64> = (0..d).map(|i| seed[i] + if d == 2 { 0.8 } else { 0.0 }).collect();
        let p: Vec<f64> = (0..d).map(|i| seed[i + 2]).collect();
        (q, p)
    }

    fn fd_check(exact: f64, fd: f64) -> bool {
        (exact - fd).abs() <= 1e-5 * exact.abs().max(1.0)
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(100))]

        #[test]
        fn legendre_duality(seed in proptest::collection::vec(-1.0f64..1.0, 4)) {
            for sys in systems() {
                let (q, p) = point(sys.dim(), &seed);
                let v = grad_p_h(sys.as_ref(), &q, &p);
                let back = grad_qdot_l(sys.as_ref(), &q, &v);
                for (a, b) in back.iter().zip(&p) {
                    prop_assert!((a - b).abs() < 1e-10, "{}: {} vs {}", sys.name(), a, b);
                }
                // ∂L/∂q = −∂H/∂q under the transform
                let lq = grad_q_l(sys.as_ref(), &q, &v);
                let hq = grad_q_h(sys.as_ref(), &q, &p);
                for (a, b) in lq.iter().zip(&hq) {
                    prop_assert!((a + b).abs() < 1e-10);
                }
            }
        }

        #[test]
        fn energy_is_conserved_along_the_vector_field(seed in proptest::collection::vec(-1.0f64..1.0, 4)) {
            for sys in systems() {
                let d = sys.dim();
                let (q, p) = point(d, &seed);
                let (mut f, mut g) = (vec![0.0; d], vec![0.0; d]);
                hamiltonian_vector_field(sys.as_ref(), &q, &p, &mut f, &mut g).unwrap();
                let hq = grad_q_h(sys.as_ref(), &q, &p);
                let hp = grad_p_h(sys.as_ref(), &q, &p);
                let rate: f64 = (0..d).map(|i| hq[i] * f[i] + hp[i] * g[i]).sum();
                prop_assert!(rate.abs() < 1e-8);
            }
        }

        #[test]
        fn gradients_match_finite_differences(seed in proptest::collection::vec(-1.0f64..1.0, 4)) {
            let step = 1e-6;
            for sys in systems() {
                let d = sys.dim();
                let (q, p) = point(d, &seed);
                let state = PhaseState::new(q.clone(), p.clone()).unwrap();
                let h0 = sys.state_energy(&state).unwrap();
                let hq = grad_q_h(sys.as_ref(), &q, &p);
                let hp = grad_p_h(sys.as_ref(), &q, &p);
                prop_assert!(h0.is_finite());
                for i in 0..d {
                    let shift = |x: &[f64], s: f64| { let mut y = x.to_vec(); y[i] += s; y };
                    let e = |q: &[f64], p: &[f64]| sys.energy(q, p).unwrap();
                    let fd_q = (e(&shift(&q, step), &p) - e(&shift(&q, -step), &p)) / (2.0 * step);
                    let fd_p = (e(&q, &shift(&p, step)) - e(&q, &shift(&p, -step))) / (2.0 * step);
                    prop_assert!(fd_check(hq[i], fd_q), "{} dH/dq{}: {} vs {}", sys.name(), i, hq[i], fd_q);
                    prop_assert!(fd_check(hp[i], fd_p), "{} dH/dp{}: {} vs {}", sys.name(), i, hp[i], fd_p);
                }
            }
        }
    }

    #[test]
    fn lagrangian_gradients_match_finite_differences() {
        // L = ½(1 + ε sin q) q̇² − ½q² for the pdm system; checked against its closed form
        let sys = make_position_dependent_mass(0.5).unwrap();
        let lagrangian = |q: f64, v: f64| 0.5 * (1.0 + 0.5 * q.sin()) * v * v - 0.5 * q * q;
        let step = 1e-6;
        for &(q, v) in &[(0.3, -0.7), (1.2, 0.4), (-2.0, 1.5)] {
            let fd_q = (lagrangian(q + step, v) - lagrangian(q - step, v)) / (2.0 * step);
            let fd_v = (lagrangian(q, v + step) - lagrangian(q, v - step)) / (2.0 * step);
            assert!(fd_check(grad_q_l(&sys, &[q], &[v])[0], fd_q));
            assert!(fd_check(grad_qdot_l(&sys, &[q], &[v])[0], fd_v));
        }
    }
}
