//! Mechanical systems in Lagrangian and Hamiltonian form.
//!
//! A system exposes derivatives rather than scalar `L` or `H`: the integrators only ever
//! need `∂L/∂q`, `∂L/∂q̇` (Lagrangian form) or `∂H/∂q`, `∂H/∂p` (Hamiltonian form).

mod registry;
mod systems;

pub use registry::{default_initial_state, problem, ProblemParams, PROBLEM_NAMES};
pub use systems::{
    make_free_particle, make_harmonic_oscillator, make_kepler, make_pendulum,
    make_position_dependent_mass, PositionDependentMass, QuadraticKineticSystem,
    KEPLER_SINGULARITY_RADIUS,
};

use nalgebra::DMatrix;
use serde::Serialize;

use crate::error::{Error, Result};

/// A point `(q, p)` in phase space.
///
/// The Galerkin integrator's numerical fluxes `(Q̂_n, P̂_n)` are stored in this type as
/// well: the discrete states of both integrator families coincide with those fluxes.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PhaseState {
    q: Vec<f64>,
    p: Vec<f64>,
}

impl PhaseState {
    pub fn new(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.is_empty() {
            return Err(Error::Config("phase state needs dimension d ≥ 1".into()));
        }
        if q.len() != p.len() {
            return Err(Error::Dimension { expected: q.len(), got: p.len() });
        }
        if q.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::Config("phase state entries must be finite".into()));
        }
        Ok(Self { q, p })
    }

    /// Builds a state produced by a step; non-finite entries mean the solver diverged.
    pub(crate) fn from_step(q: Vec<f64>, p: Vec<f64>) -> Result<Self> {
        if q.iter().chain(&p).any(|v| !v.is_finite()) {
            return Err(Error::Divergence);
        }
        Ok(Self { q, p })
    }

    pub fn dim(&self) -> usize {
        self.q.len()
    }

    pub fn q(&self) -> &[f64] {
        &self.q
    }

    pub fn p(&self) -> &[f64] {
        &self.p
    }

    /// `[q_0, .., q_{d−1}, p_0, .., p_{d−1}]`.
    pub fn to_flat(&self) -> Vec<f64> {
        self.q.iter().chain(&self.p).copied().collect()
    }

    pub fn from_flat(z: &[f64]) -> Result<Self> {
        if z.len() % 2 != 0 {
            return Err(Error::Dimension { expected: z.len() + 1, got: z.len() });
        }
        let d = z.len() / 2;
        Self::new(z[..d].to_vec(), z[d..].to_vec())
    }

    /// Componentwise max-norm distance.
    pub fn max_abs_diff(&self, other: &PhaseState) -> f64 {
        self.q
            .iter()
            .chain(&self.p)
            .zip(other.q.iter().chain(&other.p))
            .map(|(a, b)| (a - b).abs())
            .fold(0.0, f64::max)
    }
}

/// Symmetric invertible constant mass matrix `M` together with `M⁻¹`.
#[derive(Debug, Clone, PartialEq)]
pub struct MassMatrix {
    mass: DMatrix<f64>,
    inverse: DMatrix<f64>,
}

impl MassMatrix {
    pub fn new(mass: DMatrix<f64>) -> Result<Self> {
        if !mass.is_square() || mass.nrows() == 0 {
            return Err(Error::Config(format!(
                "mass matrix must be square and non-empty, got {}x{}",
                mass.nrows(),
                mass.ncols()
            )));
        }
        if (&mass - mass.transpose()).amax() > 1e-14 {
            return Err(Error::Config("mass matrix is not symmetric".into()));
        }
        let inverse = mass
            .clone()
            .lu()
            .try_inverse()
            .filter(|inv| inv.iter().all(|v| v.is_finite()))
            .ok_or_else(|| Error::Config("mass matrix is singular".into()))?;
        Ok(Self { mass, inverse })
    }

    pub fn identity(d: usize) -> Self {
        Self { mass: DMatrix::identity(d, d), inverse: DMatrix::identity(d, d) }
    }

    pub fn dim(&self) -> usize {
        self.mass.nrows()
    }

    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.mass
    }

    pub fn inverse(&self) -> &DMatrix<f64> {
        &self.inverse
    }

    /// `out = M v`
    pub fn apply(&self, v: &[f64], out: &mut [f64]) {
        mat_vec(&self.mass, v, out);
    }

    /// `out = M⁻¹ v`
    pub fn apply_inverse(&self, v: &[f64], out: &mut [f64]) {
        mat_vec(&self.inverse, v, out);
    }
}

pub(crate) fn mat_vec(a: &DMatrix<f64>, v: &[f64], out: &mut [f64]) {
    for (i, o) in out.iter_mut().enumerate() {
        *o = (0..a.ncols()).map(|j| a[(i, j)] * v[j]).sum();
    }
}

/// A `d`-dimensional mechanical system.
///
/// Every system provides the Lagrangian derivatives. Hamiltonian derivatives and the
/// energy are optional; a system with a constant mass matrix (`L = ½q̇ᵀMq̇ − U(q)`)
/// reports it through [`MechanicalSystem::mass_matrix`].
pub trait MechanicalSystem: Send + Sync {
    fn name(&self) -> &str;

    fn dim(&self) -> usize;

    /// `∂L/∂q (q, q̇)`
    fn lagrangian_grad_q(&self, q: &[f64], qdot: &[f64], out: &mut [f64]) -> Result<()>;

    /// `∂L/∂q̇ (q, q̇)`
    fn lagrangian_grad_qdot(&self, q: &[f64], qdot: &[f64], out: &mut [f64]) -> Result<()>;

    fn has_hamiltonian(&self) -> bool {
        false
    }

    /// `∂H/∂q (q, p)`
    fn hamiltonian_grad_q(&self, _q: &[f64], _p: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(Error::Unsupported("Hamiltonian derivatives"))
    }

    /// `∂H/∂p (q, p)`
    fn hamiltonian_grad_p(&self, _q: &[f64], _p: &[f64], _out: &mut [f64]) -> Result<()> {
        Err(Error::Unsupported("Hamiltonian derivatives"))
    }

    fn has_energy(&self) -> bool {
        false
    }

    fn energy(&self, _q: &[f64], _p: &[f64]) -> Result<f64> {
        Err(Error::Unsupported("an energy function"))
    }

    /// `Some(M)` iff the kinetic energy is `½q̇ᵀMq̇` with constant `M`.
    fn mass_matrix(&self) -> Option<&MassMatrix> {
        None
    }

    fn is_quadratic_kinetic(&self) -> bool {
        self.mass_matrix().is_some()
    }

    fn state_energy(&self, state: &PhaseState) -> Result<f64> {
        self.energy(state.q(), state.p())
    }
}

/// Hamiltonian vector field `f = ∂H/∂p`, `g = −∂H/∂q`.
pub fn hamiltonian_vector_field(
    system: &dyn MechanicalSystem,
    q: &[f64],
    p: &[f64],
    f: &mut [f64],
    g: &mut [f64],
) -> Result<()> {
    system.hamiltonian_grad_p(q, p, f)?;
    system.hamiltonian_grad_q(q, p, g)?;
    g.iter_mut().for_each(|v| *v = -*v);
    Ok(())
}

pub(crate) fn check_state_dim(system: &dyn MechanicalSystem, state: &PhaseState) -> Result<()> {
    if state.dim() != system.dim() {
        return Err(Error::Dimension { expected: system.dim(), got: state.dim() });
    }
    Ok(())
}
