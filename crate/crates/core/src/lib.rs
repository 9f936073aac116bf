//! Structure-preserving variational integrators for mechanical systems.
//!
//! Two integrator families are provided:
//!
//! * [`lagrangian::LagrangianVi`]: a Lagrangian variational integrator obtained by
//!   making a quadrature-discretized action stationary over degree-`s` polynomial paths
//!   written in the shifted Legendre basis.
//! * [`galerkin::GalerkinIntegrator`]: a time-Galerkin method for Hamilton's equations,
//!   implemented as a continuous-stage partitioned Runge–Kutta method and discretized by
//!   quadrature into an ordinary symplectic partitioned Runge–Kutta tableau.
//!
//! For `L = ½q̇ᵀMq̇ − U(q)` the two produce the same discrete trajectories. The
//! [`analysis`] module measures symplecticity, symmetry, convergence order, energy drift
//! and the gap between the two families; [`bench`] drives the command-line front end.

#![allow(clippy::needless_range_loop, clippy::neg_cmp_op_on_partial_ord, clippy::manual_is_multiple_of)]

pub mod analysis;
pub mod bench;
pub mod error;
pub mod galerkin;
pub mod lagrangian;
pub mod legendre;
pub mod mechanics;
pub mod quadrature;
pub mod solver;
pub mod stepping;

pub use error::{Error, Result};
pub use galerkin::{build_csprk, galerkin_step, weak_form_residual, CsprkCoefficients, GalerkinIntegrator, GalerkinStages, PrkTableau};
pub use lagrangian::{
    lagrangian_step, lagrangian_step_hamiltonian_form, LagrangianForm, LagrangianVi, LagrangianViConfig,
    StageCoefficients,
};
pub use legendre::LegendreBasis;
pub use mechanics::{MechanicalSystem, PhaseState};
pub use quadrature::QuadratureRule;
pub use solver::{SolverConfig, SolverKind};
pub use stepping::{integrate, ExplicitEuler, OneStepMethod, Trajectory};
