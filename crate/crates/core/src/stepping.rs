//! One-step maps and trajectories.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::mechanics::{check_state_dim, hamiltonian_vector_field, MechanicalSystem, PhaseState};

/// A one-step map `z_{n+1} = Φ_h(z_n)`.
pub trait OneStepMethod {
    fn name(&self) -> String;

    fn step(&self, system: &dyn MechanicalSystem, state: &PhaseState, h: f64) -> Result<PhaseState>;
}

impl<M: OneStepMethod + ?Sized> OneStepMethod for &M {
    fn name(&self) -> String {
        (**self).name()
    }

    fn step(&self, system: &dyn MechanicalSystem, state: &PhaseState, h: f64) -> Result<PhaseState> {
        (**self).step(system, state, h)
    }
}

impl<M: OneStepMethod + ?Sized> OneStepMethod for Box<M> {
    fn name(&self) -> String {
        (**self).name()
    }

    fn step(&self, system: &dyn MechanicalSystem, state: &PhaseState, h: f64) -> Result<PhaseState> {
        (**self).step(system, state, h)
    }
}

pub(crate) fn check_step(system: &dyn MechanicalSystem, state: &PhaseState, h: f64) -> Result<()> {
    check_state_dim(system, state)?;
    if h == 0.0 || !h.is_finite() {
        return Err(Error::Config(format!("step size must be finite and non-zero, got {h}")));
    }
    Ok(())
}

/// States `z_0, .., z_N` on the uniform grid `t_k = k h`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Trajectory {
    h: f64,
    states: Vec<PhaseState>,
}

impl Trajectory {
    pub fn h(&self) -> f64 {
        self.h
    }

    pub fn states(&self) -> &[PhaseState] {
        &self.states
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn last(&self) -> &PhaseState {
        self.states.last().expect("trajectory holds at least the initial state")
    }

    pub fn time(&self, k: usize) -> f64 {
        k as f64 * self.h
    }

    /// Largest componentwise gap between two trajectories of equal length.
    pub fn max_abs_diff(&self, other: &Trajectory) -> f64 {
        self.states
            .iter()
            .zip(&other.states)
            .map(|(a, b)| a.max_abs_diff(b))
            .fold(0.0, f64::max)
    }

    pub fn into_states(self) -> Vec<PhaseState> {
        self.states
    }
}

/// Applies `method` `n_steps` times from `initial`. Stops at the first failing step and
/// reports its index.
pub fn integrate<M: OneStepMethod + ?Sized>(
    method: &M,
    system: &dyn MechanicalSystem,
    initial: &PhaseState,
    h: f64,
    n_steps: usize,
) -> Result<Trajectory> {
    let mut states = Vec::with_capacity(n_steps + 1);
    states.push(initial.clone());
    for k in 0..n_steps {
        let next = method.step(system, &states[k], h).map_err(|e| e.at_step(k))?;
        states.push(next);
    }
    Ok(Trajectory { h, states })
}

/// Explicit Euler on Hamilton's equations. Not symplectic; used as a control.
#[derive(Debug, Clone, Copy, Default)]
pub struct ExplicitEuler;

impl OneStepMethod for ExplicitEuler {
    fn name(&self) -> String {
        "explicit-euler".into()
    }

    fn step(&self, system: &dyn MechanicalSystem, state: &PhaseState, h: f64) -> Result<PhaseState> {
        check_step(system, state, h)?;
        let d = state.dim();
        let (mut f, mut g) = (vec![0.0; d], vec![0.0; d]);
        hamiltonian_vector_field(system, state.q(), state.p(), &mut f, &mut g)?;
        let q = state.q().iter().zip(&f).map(|(q, f)| q + h * f).collect();
        let p = state.p().iter().zip(&g).map(|(p, g)| p + h * g).collect();
        PhaseState::from_step(q, p)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mechanics::{make_harmonic_oscillator, make_kepler};

    #[test]
    fn zero_steps_returns_initial() {
        let sys = make_harmonic_oscillator(1.0).unwrap();
        let z0 = PhaseState::new(vec![1.0], vec![0.0]).unwrap();
        let traj = integrate(&ExplicitEuler, &sys, &z0, 0.1, 0).unwrap();
        assert_eq!(traj.states(), &[z0]);
    }

    #[test]
    fn euler_step() {
        let sys = make_harmonic_oscillator(1.0).unwrap();
        let z0 = PhaseState::new(vec![1.0], vec![0.0]).unwrap();
        let z1 = ExplicitEuler.step(&sys, &z0, 0.1).unwrap();
        assert_eq!(z1.q(), &[1.0]);
        assert_eq!(z1.p(), &[-0.1]);
    }

    #[test]
    fn errors_carry_step_index() {
        let sys = make_kepler();
        // radial infall: one Euler step of size 0.5 lands exactly on the origin
        let z0 = PhaseState::new(vec![0.5, 0.0], vec![-1.0, 0.0]).unwrap();
        let err = integrate(&ExplicitEuler, &sys, &z0, 0.5, 5).unwrap_err();
        match err {
            Error::AtStep { step, ref source } => {
                assert_eq!(step, 1);
                assert!(matches!(**source, Error::Singularity(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn rejects_bad_inputs() {
        let sys = make_harmonic_oscillator(1.0).unwrap();
        let z0 = PhaseState::new(vec![1.0], vec![0.0]).unwrap();
        assert!(ExplicitEuler.step(&sys, &z0, 0.0).is_err());
        let wrong = PhaseState::new(vec![1.0, 0.0], vec![0.0, 0.0]).unwrap();
        assert!(matches!(ExplicitEuler.step(&sys, &wrong, 0.1), Err(Error::Dimension { .. })));
    }
}
