//! Lagrangian variational integrator from the discrete Hamilton's principle.
//!
//! On each step the velocity is expanded as `Q̇(τ) = Σ_{j<s} Q̇_j ℓ_j(τ)` and the position
//! as `Q(τ) = q_n + h Σ_j a_{τ,j} Q̇_j`, so `Q(0) = q_n` holds by construction and
//! `Q(1) = q_n + h Q̇_0`. The discrete Lagrangian `h Σ_k w_k L(Q(c_k), Q̇(c_k))` is made
//! stationary under that endpoint constraint. Eliminating the multiplier (it equals
//! `p_{n+1}`) leaves `s` vector equations for the coefficients `Q̇_j`:
//!
//! ```text
//! Σ_k w_k P_k ℓ_i(c_k) = p_n δ_{i0} + h Σ_k w_k (δ_{i0} − a_{c_k,i}) Ṗ_k
//! q_{n+1} = q_n + h Σ_k w_k Q̇(c_k),   p_{n+1} = p_n + h Σ_k w_k Ṗ_k
//! ```
//!
//! with `P_k = ∂L/∂q̇` and `Ṗ_k = ∂L/∂q` at `(Q(c_k), Q̇(c_k))`. In the Hamiltonian form
//! `P_k` is instead recovered from `Q̇(c_k) = ∂H/∂p(Q(c_k), P_k)` and `Ṗ_k = −∂H/∂q`.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::legendre::LegendreBasis;
use crate::mechanics::{mat_vec, MechanicalSystem, PhaseState};
use crate::quadrature::QuadratureRule;
use crate::solver::{fd_jacobian, solve, SolverConfig, StageEquations};
use crate::stepping::{check_step, OneStepMethod};

#[derive(Debug, Clone, PartialEq)]
pub struct LagrangianViConfig {
    s: usize,
    quad: QuadratureRule,
    solver: SolverConfig,
}

impl LagrangianViConfig {
    /// `Q` has degree `s`; `quad` must integrate degree `2s − 1` exactly.
    pub fn new(s: usize, quad: QuadratureRule, solver: SolverConfig) -> Result<Self> {
        LegendreBasis::new(s)?;
        solver.validate()?;
        if quad.exactness_degree() + 1 < 2 * s {
            return Err(Error::Config(format!(
                "quadrature exact to degree {} but s = {s} needs {}",
                quad.exactness_degree(),
                2 * s - 1
            )));
        }
        Ok(Self { s, quad, solver })
    }

    /// `s` Gauss–Legendre nodes.
    pub fn gauss(s: usize, solver: SolverConfig) -> Result<Self> {
        Self::new(s, QuadratureRule::gauss_legendre(s)?, solver)
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn quadrature(&self) -> &QuadratureRule {
        &self.quad
    }

    pub fn solver(&self) -> &SolverConfig {
        &self.solver
    }
}

/// Which right-hand side closes the stage equations.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LagrangianForm {
    /// `P = ∂L/∂q̇`, `Ṗ = ∂L/∂q`.
    Lagrangian,
    /// `Q̇ = ∂H/∂p(Q, P)` solved for `P`, `Ṗ = −∂H/∂q`.
    Hamiltonian,
}

/// Converged Legendre coefficients `Q̇_0, .., Q̇_{s−1}` of one step.
#[derive(Debug, Clone, PartialEq)]
pub struct StageCoefficients {
    qdot: Vec<Vec<f64>>,
    residual: f64,
    iterations: usize,
}

impl StageCoefficients {
    pub fn qdot_stages(&self) -> &[Vec<f64>] {
        &self.qdot
    }

    /// Max-norm of the stage residual at convergence.
    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }

    /// `Q̇(τ) = Σ_j Q̇_j ℓ_j(τ)`.
    pub fn velocity_at(&self, basis: &LegendreBasis, tau: f64) -> Vec<f64> {
        let ell = basis.eval_all(tau);
        combine(&self.qdot, &ell)
    }

    /// `Q(τ) = q_n + h Σ_j a_{τ,j} Q̇_j`.
    pub fn position_at(&self, basis: &LegendreBasis, q_n: &[f64], h: f64, tau: f64) -> Vec<f64> {
        let anti = basis.antiderivative_all(tau);
        combine(&self.qdot, &anti)
            .iter()
            .zip(q_n)
            .map(|(v, q)| q + h * v)
            .collect()
    }
}

fn combine(coeffs: &[Vec<f64>], factors: &[f64]) -> Vec<f64> {
    let d = coeffs[0].len();
    let mut out = vec![0.0; d];
    for (c, f) in coeffs.iter().zip(factors) {
        for (o, v) in out.iter_mut().zip(c) {
            *o += f * v;
        }
    }
    out
}

/// The Lagrangian variational integrator with a fixed `(s, quadrature)` pair.
#[derive(Debug, Clone)]
pub struct LagrangianVi {
    config: LagrangianViConfig,
    form: LagrangianForm,
    basis: LegendreBasis,
    /// `ℓ_i(c_k)`, indexed `[k][i]`
    ell: Vec<Vec<f64>>,
    /// `a_{c_k,i}`, indexed `[k][i]`
    anti: Vec<Vec<f64>>,
}

impl LagrangianVi {
    pub fn new(config: LagrangianViConfig, form: LagrangianForm) -> Result<Self> {
        let basis = LegendreBasis::new(config.s)?;
        let ell = config.quad.nodes().iter().map(|&c| basis.eval_all(c)).collect();
        let anti = config.quad.nodes().iter().map(|&c| basis.antiderivative_all(c)).collect();
        Ok(Self { config, form, basis, ell, anti })
    }

    pub fn config(&self) -> &LagrangianViConfig {
        &self.config
    }

    pub fn form(&self) -> LagrangianForm {
        self.form
    }

    pub fn basis(&self) -> &LegendreBasis {
        &self.basis
    }

    /// One step from `state`; also returns the converged stage coefficients.
    pub fn step_with_stages(
        &self,
        system: &dyn MechanicalSystem,
        state: &PhaseState,
        h: f64,
    ) -> Result<(PhaseState, StageCoefficients)> {
        check_step(system, state, h)?;
        if self.form == LagrangianForm::Hamiltonian && !system.has_hamiltonian() {
            return Err(Error::Unsupported("Hamiltonian derivatives"));
        }
        let d = system.dim();
        let s = self.config.s;
        let (q_n, p_n) = (state.q(), state.p());

        let (precond, v0) = self.preconditioner(system, q_n, p_n)?;
        let mut x0 = vec![0.0; s * d];
        x0[..d].copy_from_slice(&v0);

        let m = self.config.quad.len();
        let mut eqs = LagrangianStages {
            vi: self,
            system,
            q_n,
            p_n,
            h,
            precond,
            node_p: vec![p_n.to_vec(); m],
            node_pdot: vec![vec![0.0; d]; m],
            node_q: vec![vec![0.0; d]; m],
            node_qdot: vec![vec![0.0; d]; m],
            scratch: vec![0.0; d],
        };
        let sol = solve(&mut eqs, x0, &self.config.solver)?;

        // outputs from the converged coefficients
        let mut r = vec![0.0; s * d];
        eqs.residual(&sol.x, &mut r)?;
        let w = self.config.quad.weights();
        let mut q_next = q_n.to_vec();
        let mut p_next = p_n.to_vec();
        for k in 0..m {
            let velocity = match self.form {
                LagrangianForm::Lagrangian => eqs.node_qdot[k].clone(),
                LagrangianForm::Hamiltonian => {
                    let mut f = vec![0.0; d];
                    system.hamiltonian_grad_p(&eqs.node_q[k], &eqs.node_p[k], &mut f)?;
                    f
                }
            };
            for a in 0..d {
                q_next[a] += h * w[k] * velocity[a];
                p_next[a] += h * w[k] * eqs.node_pdot[k][a];
            }
        }
        let stages = StageCoefficients {
            qdot: sol.x.chunks(d).map(<[f64]>::to_vec).collect(),
            residual: sol.residual,
            iterations: sol.iterations,
        };
        Ok((PhaseState::from_step(q_next, p_next)?, stages))
    }

    /// Returns `W ≈ (∂P/∂Q̇)⁻¹` for the fixed-point sweep together with the initial
    /// velocity guess `Q̇_0`.
    fn preconditioner(
        &self,
        system: &dyn MechanicalSystem,
        q_n: &[f64],
        p_n: &[f64],
    ) -> Result<(DMatrix<f64>, Vec<f64>)> {
        let d = system.dim();
        if let Some(mass) = system.mass_matrix() {
            let mut v0 = vec![0.0; d];
            mass.apply_inverse(p_n, &mut v0);
            return Ok((mass.inverse().clone(), v0));
        }
        if system.has_hamiltonian() {
            // ∂P/∂Q̇ = (∂²H/∂p²)⁻¹
            let hess = fd_jacobian(|p, out| system.hamiltonian_grad_p(q_n, p, out), p_n, d)?;
            let mut v0 = vec![0.0; d];
            system.hamiltonian_grad_p(q_n, p_n, &mut v0)?;
            return Ok((hess, v0));
        }
        // Lagrangian only: invert ∂²L/∂q̇² at q̇ = p_n, then one Newton correction of
        // ∂L/∂q̇(q_n, v) = p_n
        let hess = fd_jacobian(|v, out| system.lagrangian_grad_qdot(q_n, v, out), p_n, d)?;
        let inv = hess
            .lu()
            .try_inverse()
            .ok_or_else(|| Error::Transform(format!("∂²L/∂q̇² singular at q = {q_n:?}")))?;
        let mut mom = vec![0.0; d];
        system.lagrangian_grad_qdot(q_n, p_n, &mut mom)?;
        let mismatch: Vec<f64> = mom.iter().zip(p_n).map(|(a, b)| a - b).collect();
        let mut corr = vec![0.0; d];
        mat_vec(&inv, &mismatch, &mut corr);
        let v0 = p_n.iter().zip(&corr).map(|(p, c)| p - c).collect();
        Ok((inv, v0))
    }
}

struct LagrangianStages<'a> {
    vi: &'a LagrangianVi,
    system: &'a dyn MechanicalSystem,
    q_n: &'a [f64],
    p_n: &'a [f64],
    h: f64,
    precond: DMatrix<f64>,
    node_p: Vec<Vec<f64>>,
    node_pdot: Vec<Vec<f64>>,
    node_q: Vec<Vec<f64>>,
    node_qdot: Vec<Vec<f64>>,
    scratch: Vec<f64>,
}

impl LagrangianStages<'_> {
    /// Fills `node_q`, `node_qdot`, `node_p`, `node_pdot` from the coefficients `x`.
    fn evaluate_nodes(&mut self, x: &[f64]) -> Result<()> {
        let d = self.q_n.len();
        for k in 0..self.node_q.len() {
            let (ell, anti) = (&self.vi.ell[k], &self.vi.anti[k]);
            for a in 0..d {
                let mut v = 0.0;
                let mut disp = 0.0;
                for (j, coeff) in x.chunks(d).enumerate() {
                    v += ell[j] * coeff[a];
                    disp += anti[j] * coeff[a];
                }
                self.node_qdot[k][a] = v;
                self.node_q[k][a] = self.q_n[a] + self.h * disp;
            }
            match self.vi.form {
                LagrangianForm::Lagrangian => {
                    self.system.lagrangian_grad_qdot(&self.node_q[k], &self.node_qdot[k], &mut self.node_p[k])?;
                    self.system.lagrangian_grad_q(&self.node_q[k], &self.node_qdot[k], &mut self.node_pdot[k])?;
                }
                LagrangianForm::Hamiltonian => {
                    self.recover_momentum(k)?;
                    self.system.hamiltonian_grad_q(&self.node_q[k], &self.node_p[k], &mut self.node_pdot[k])?;
                    self.node_pdot[k].iter_mut().for_each(|v| *v = -*v);
                }
            }
        }
        Ok(())
    }

    /// Solves `∂H/∂p(Q_k, P_k) = Q̇_k` for `P_k`, starting from the previous value.
    fn recover_momentum(&mut self, k: usize) -> Result<()> {
        let system = self.system;
        let q = &self.node_q[k];
        let target = &self.node_qdot[k];
        if let Some(mass) = system.mass_matrix() {
            mass.apply(target, &mut self.node_p[k]);
            return Ok(());
        }
        let d = q.len();
        let tol = self.vi.config.solver.tol;
        let mut p = self.node_p[k].clone();
        let mismatch = |p: &[f64], out: &mut [f64]| -> Result<()> {
            system.hamiltonian_grad_p(q, p, out)?;
            out.iter_mut().zip(target).for_each(|(o, t)| *o -= t);
            Ok(())
        };
        let mut r = vec![0.0; d];
        for _ in 0..50 {
            mismatch(&p, &mut r)?;
            let norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
            if !norm.is_finite() {
                return Err(Error::Divergence);
            }
            if norm <= 1e-2 * tol {
                break;
            }
            let jac = fd_jacobian(mismatch, &p, d)?;
            let rhs = nalgebra::DVector::from_iterator(d, r.iter().map(|v| -v));
            let delta = jac.lu().solve(&rhs).ok_or_else(|| {
                Error::Transform(format!("∂²H/∂p² singular at q = {q:?}, p = {p:?}"))
            })?;
            let before = p.clone();
            p.iter_mut().zip(delta.iter()).for_each(|(pi, di)| *pi += di);
            if p == before {
                break;
            }
        }
        mismatch(&p, &mut r)?;
        let norm = r.iter().fold(0.0f64, |m, v| m.max(v.abs()));
        if norm > tol {
            return Err(Error::Transform(format!(
                "momentum recovery stalled at mismatch {norm:.3e} (q = {q:?})"
            )));
        }
        self.node_p[k] = p;
        Ok(())
    }
}

impl StageEquations for LagrangianStages<'_> {
    fn residual(&mut self, x: &[f64], r: &mut [f64]) -> Result<()> {
        self.evaluate_nodes(x)?;
        let d = self.q_n.len();
        let w = self.vi.config.quad.weights();
        r.fill(0.0);
        for (i, ri) in r.chunks_mut(d).enumerate() {
            let delta = if i == 0 { 1.0 } else { 0.0 };
            for k in 0..w.len() {
                let lhs = w[k] * self.vi.ell[k][i];
                let rhs = self.h * w[k] * (delta - self.vi.anti[k][i]);
                for a in 0..d {
                    ri[a] += lhs * self.node_p[k][a] - rhs * self.node_pdot[k][a];
                }
            }
            if i == 0 {
                ri.iter_mut().zip(self.p_n).for_each(|(v, p)| *v -= p);
            }
        }
        Ok(())
    }

    fn sweep(&mut self, x: &mut [f64], r: &[f64]) -> Result<()> {
        let d = self.q_n.len();
        for (xi, ri) in x.chunks_mut(d).zip(r.chunks(d)) {
            mat_vec(&self.precond, ri, &mut self.scratch);
            xi.iter_mut().zip(&self.scratch).for_each(|(v, c)| *v -= c);
        }
        Ok(())
    }
}

impl OneStepMethod for LagrangianVi {
    fn name(&self) -> String {
        let form = match self.form {
            LagrangianForm::Lagrangian => "lagrangian",
            LagrangianForm::Hamiltonian => "lagrangian-hamiltonian",
        };
        format!("{form}(s={}, m={})", self.config.s, self.config.quad.len())
    }

    fn step(&self, system: &dyn MechanicalSystem, state: &PhaseState, h: f64) -> Result<PhaseState> {
        self.step_with_stages(system, state, h).map(|(z, _)| z)
    }
}

/// One step of the Lagrangian form.
pub fn lagrangian_step(
    system: &dyn MechanicalSystem,
    state: &PhaseState,
    h: f64,
    config: &LagrangianViConfig,
) -> Result<(PhaseState, StageCoefficients)> {
    LagrangianVi::new(config.clone(), LagrangianForm::Lagrangian)?.step_with_stages(system, state, h)
}

/// One step of the Hamiltonian form.
pub fn lagrangian_step_hamiltonian_form(
    system: &dyn MechanicalSystem,
    state: &PhaseState,
    h: f64,
    config: &LagrangianViConfig,
) -> Result<(PhaseState, StageCoefficients)> {
    LagrangianVi::new(config.clone(), LagrangianForm::Hamiltonian)?.step_with_stages(system, state, h)
}
