//! Galerkin variational integrator as a continuous-stage partitioned Runge–Kutta method.
//!
//! The time-discrete Galerkin method with `Q` of degree `s`, `P` of degree `s − 1` and
//! fluxes `Q̂_n = Q(t_n⁺)`, `Q̂_{n+1} = Q(t_{n+1}⁻)` is the continuous-stage method
//!
//! ```text
//! Q_τ = q_n + h ∫₀¹ A(τ,σ) f(Q_σ, P_σ) dσ        q_{n+1} = q_n + h ∫₀¹ f dτ
//! P_τ = p_n + h ∫₀¹ Â(τ,σ) g(Q_σ, P_σ) dσ        p_{n+1} = p_n + h ∫₀¹ g dτ
//!
//! A(τ,σ) = Σ_{i<s} a_{τ,i} ℓ_i(σ),   Â(τ,σ) = 1 − Σ_{i<s} a_{σ,i} ℓ_i(τ),   B = B̂ = 1
//! ```
//!
//! with `f = ∂H/∂p`, `g = −∂H/∂q`. Since `Â(τ,σ) + A(σ,τ) = 1`, the coefficients satisfy
//! `B(τ)Â(τ,σ) + B̂(σ)A(σ,τ) = B(τ)B̂(σ)` and the method is symplectic; any quadrature
//! turns it into a symplectic partitioned Runge–Kutta tableau.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::legendre::LegendreBasis;
use crate::mechanics::{hamiltonian_vector_field, MechanicalSystem, PhaseState};
use crate::quadrature::QuadratureRule;
use crate::solver::{solve, SolverConfig, StageEquations};
use crate::stepping::{check_step, OneStepMethod};

/// Largest tolerated discrete symplecticity defect of a freshly built tableau.
const TABLEAU_DEFECT_LIMIT: f64 = 1e-12;

/// Coefficient functions `A`, `Â`, `B`, `B̂` of the continuous-stage method.
///
/// With `swapped` set, `(A, B)` and `(Â, B̂)` trade places: the roles of the position and
/// momentum variables in the Galerkin trial spaces are interchanged.
#[derive(Debug, Clone, PartialEq)]
pub struct CsprkCoefficients {
    basis: LegendreBasis,
    swapped: bool,
}

impl CsprkCoefficients {
    pub fn new(s: usize, swapped: bool) -> Result<Self> {
        Ok(Self { basis: LegendreBasis::new(s)?, swapped })
    }

    pub fn s(&self) -> usize {
        self.basis.size()
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn basis(&self) -> &LegendreBasis {
        &self.basis
    }

    /// `Σ_i a_{τ,i} ℓ_i(σ)`
    fn kernel(&self, tau: f64, sigma: f64) -> f64 {
        let anti = self.basis.antiderivative_all(tau);
        let ell = self.basis.eval_all(sigma);
        anti.iter().zip(&ell).map(|(a, l)| a * l).sum()
    }

    pub fn a(&self, tau: f64, sigma: f64) -> f64 {
        if self.swapped {
            1.0 - self.kernel(sigma, tau)
        } else {
            self.kernel(tau, sigma)
        }
    }

    pub fn a_hat(&self, tau: f64, sigma: f64) -> f64 {
        if self.swapped {
            self.kernel(tau, sigma)
        } else {
            1.0 - self.kernel(sigma, tau)
        }
    }

    pub fn b(&self, _tau: f64) -> f64 {
        1.0
    }

    pub fn b_hat(&self, _tau: f64) -> f64 {
        1.0
    }

    /// `|B(τ)Â(τ,σ) + B̂(σ)A(σ,τ) − B(τ)B̂(σ)|`
    pub fn symplecticity_defect_at(&self, tau: f64, sigma: f64) -> f64 {
        (self.b(tau) * self.a_hat(tau, sigma) + self.b_hat(sigma) * self.a(sigma, tau)
            - self.b(tau) * self.b_hat(sigma))
        .abs()
    }

    /// Samples the coefficient functions at the quadrature nodes:
    /// `a_kl = w_l A(c_k, c_l)`, `â_kl = w_l Â(c_k, c_l)`, `b_k = w_k B(c_k)`, `b̂_k = w_k B̂(c_k)`.
    pub fn discretize(&self, quad: &QuadratureRule) -> Result<PrkTableau> {
        let c = quad.nodes().to_vec();
        let w = quad.weights();
        let m = c.len();
        let mut a = vec![vec![0.0; m]; m];
        let mut a_hat = vec![vec![0.0; m]; m];
        for k in 0..m {
            for l in 0..m {
                a[k][l] = w[l] * self.a(c[k], c[l]);
                a_hat[k][l] = w[l] * self.a_hat(c[k], c[l]);
            }
        }
        let b = c.iter().zip(w).map(|(&ck, wk)| wk * self.b(ck)).collect();
        let b_hat = c.iter().zip(w).map(|(&ck, wk)| wk * self.b_hat(ck)).collect();
        let tableau = PrkTableau { s: self.s(), swapped: self.swapped, c, a, a_hat, b, b_hat };
        let defect = tableau.symplecticity_defect();
        if defect > TABLEAU_DEFECT_LIMIT {
            return Err(Error::Consistency(defect));
        }
        Ok(tableau)
    }
}

/// Builds the continuous-stage coefficients for degree parameter `s`.
pub fn build_csprk(s: usize, swapped: bool) -> Result<CsprkCoefficients> {
    CsprkCoefficients::new(s, swapped)
}

/// Partitioned Butcher tableau `(c, a, â, b, b̂)`.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct PrkTableau {
    s: usize,
    swapped: bool,
    c: Vec<f64>,
    a: Vec<Vec<f64>>,
    a_hat: Vec<Vec<f64>>,
    b: Vec<f64>,
    b_hat: Vec<f64>,
}

impl PrkTableau {
    pub fn stages(&self) -> usize {
        self.c.len()
    }

    pub fn s(&self) -> usize {
        self.s
    }

    pub fn swapped(&self) -> bool {
        self.swapped
    }

    pub fn c(&self) -> &[f64] {
        &self.c
    }

    pub fn a(&self) -> &[Vec<f64>] {
        &self.a
    }

    pub fn a_hat(&self) -> &[Vec<f64>] {
        &self.a_hat
    }

    pub fn b(&self) -> &[f64] {
        &self.b
    }

    pub fn b_hat(&self) -> &[f64] {
        &self.b_hat
    }

    /// `max_{k,l} |b_k â_kl + b̂_l a_lk − b_k b̂_l|`
    pub fn symplecticity_defect(&self) -> f64 {
        let m = self.stages();
        let mut defect: f64 = 0.0;
        for k in 0..m {
            for l in 0..m {
                let v = self.b[k] * self.a_hat[k][l] + self.b_hat[l] * self.a[l][k] - self.b[k] * self.b_hat[l];
                defect = defect.max(v.abs());
            }
        }
        defect
    }
}

/// Converged stage values `(Q_k, P_k)` at the quadrature nodes.
#[derive(Debug, Clone, PartialEq)]
pub struct GalerkinStages {
    q: Vec<Vec<f64>>,
    p: Vec<Vec<f64>>,
    residual: f64,
    iterations: usize,
}

impl GalerkinStages {
    pub fn new(q: Vec<Vec<f64>>, p: Vec<Vec<f64>>) -> Result<Self> {
        if q.len() != p.len() {
            return Err(Error::Dimension { expected: q.len(), got: p.len() });
        }
        Ok(Self { q, p, residual: 0.0, iterations: 0 })
    }

    pub fn q(&self) -> &[Vec<f64>] {
        &self.q
    }

    pub fn p(&self) -> &[Vec<f64>] {
        &self.p
    }

    pub fn q_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.q
    }

    pub fn p_mut(&mut self) -> &mut [Vec<f64>] {
        &mut self.p
    }

    pub fn residual(&self) -> f64 {
        self.residual
    }

    pub fn iterations(&self) -> usize {
        self.iterations
    }
}

/// The discretized Galerkin integrator: a cached tableau plus solver settings.
#[derive(Debug, Clone)]
pub struct GalerkinIntegrator {
    tableau: PrkTableau,
    solver: SolverConfig,
}

impl GalerkinIntegrator {
    pub fn new(tableau: PrkTableau, solver: SolverConfig) -> Result<Self> {
        solver.validate()?;
        Ok(Self { tableau, solver })
    }

    /// `s`-parameter method on `m` Gauss–Legendre nodes.
    pub fn gauss(s: usize, m: usize, swapped: bool, solver: SolverConfig) -> Result<Self> {
        let tableau = build_csprk(s, swapped)?.discretize(&QuadratureRule::gauss_legendre(m)?)?;
        Self::new(tableau, solver)
    }

    pub fn tableau(&self) -> &PrkTableau {
        &self.tableau
    }

    pub fn solver(&self) -> &SolverConfig {
        &self.solver
    }

    pub fn step_with_stages(
        &self,
        system: &dyn MechanicalSystem,
        state: &PhaseState,
        h: f64,
    ) -> Result<(PhaseState, GalerkinStages)> {
        check_step(system, state, h)?;
        if !system.has_hamiltonian() {
            return Err(Error::Unsupported("Hamiltonian derivatives"));
        }
        let d = state.dim();
        let m = self.tableau.stages();
        // layout: [Q_0, .., Q_{m-1}, P_0, .., P_{m-1}]
        let mut x0 = Vec::with_capacity(2 * m * d);
        for _ in 0..m {
            x0.extend_from_slice(state.q());
        }
        for _ in 0..m {
            x0.extend_from_slice(state.p());
        }
        let mut eqs = GalerkinEquations {
            tableau: &self.tableau,
            system,
            state,
            h,
            f: vec![vec![0.0; d]; m],
            g: vec![vec![0.0; d]; m],
        };
        let sol = solve(&mut eqs, x0, &self.solver)?;
        eqs.evaluate(&sol.x)?;

        let mut q_next = state.q().to_vec();
        let mut p_next = state.p().to_vec();
        for k in 0..m {
            for a in 0..d {
                q_next[a] += h * self.tableau.b[k] * eqs.f[k][a];
                p_next[a] += h * self.tableau.b_hat[k] * eqs.g[k][a];
            }
        }
        let (qs, ps) = sol.x.split_at(m * d);
        let stages = GalerkinStages {
            q: qs.chunks(d).map(<[f64]>::to_vec).collect(),
            p: ps.chunks(d).map(<[f64]>::to_vec).collect(),
            residual: sol.residual,
            iterations: sol.iterations,
        };
        Ok((PhaseState::from_step(q_next, p_next)?, stages))
    }
}

struct GalerkinEquations<'a> {
    tableau: &'a PrkTableau,
    system: &'a dyn MechanicalSystem,
    state: &'a PhaseState,
    h: f64,
    f: Vec<Vec<f64>>,
    g: Vec<Vec<f64>>,
}

impl GalerkinEquations<'_> {
    fn evaluate(&mut self, x: &[f64]) -> Result<()> {
        let d = self.state.dim();
        let m = self.tableau.stages();
        let (qs, ps) = x.split_at(m * d);
        for k in 0..m {
            let (q, p) = (&qs[k * d..(k + 1) * d], &ps[k * d..(k + 1) * d]);
            hamiltonian_vector_field(self.system, q, p, &mut self.f[k], &mut self.g[k])?;
        }
        Ok(())
    }

    /// Writes `z_n + h Σ_l a_kl F_l` into `out`.
    fn stage_update(&self, out: &mut [f64]) {
        let d = self.state.dim();
        let m = self.tableau.stages();
        let (out_q, out_p) = out.split_at_mut(m * d);
        for k in 0..m {
            for a in 0..d {
                let mut dq = 0.0;
                let mut dp = 0.0;
                for l in 0..m {
                    dq += self.tableau.a[k][l] * self.f[l][a];
                    dp += self.tableau.a_hat[k][l] * self.g[l][a];
                }
                out_q[k * d + a] = self.state.q()[a] + self.h * dq;
                out_p[k * d + a] = self.state.p()[a] + self.h * dp;
            }
        }
    }
}

impl StageEquations for GalerkinEquations<'_> {
    fn residual(&mut self, x: &[f64], r: &mut [f64]) -> Result<()> {
        self.evaluate(x)?;
        self.stage_update(r);
        r.iter_mut().zip(x).for_each(|(ri, xi)| *ri = xi - *ri);
        Ok(())
    }

    fn sweep(&mut self, x: &mut [f64], r: &[f64]) -> Result<()> {
        x.iter_mut().zip(r).for_each(|(xi, ri)| *xi -= ri);
        Ok(())
    }
}

impl OneStepMethod for GalerkinIntegrator {
    fn name(&self) -> String {
        let kind = if self.tableau.swapped { "galerkin-swapped" } else { "galerkin" };
        format!("{kind}(s={}, m={})", self.tableau.s, self.tableau.stages())
    }

    fn step(&self, system: &dyn MechanicalSystem, state: &PhaseState, h: f64) -> Result<PhaseState> {
        self.step_with_stages(system, state, h).map(|(z, _)| z)
    }
}

/// One Galerkin step with a prebuilt tableau.
pub fn galerkin_step(
    system: &dyn MechanicalSystem,
    state: &PhaseState,
    h: f64,
    tableau: &PrkTableau,
    solver: &SolverConfig,
) -> Result<(PhaseState, GalerkinStages)> {
    GalerkinIntegrator::new(tableau.clone(), *solver)?.step_with_stages(system, state, h)
}

/// Largest residual of the quadrature-discretized Galerkin weak form on one element.
///
/// With `Q̂_n = q_n`, `Q̂_{n+1} = q_{n+1}`, `P̂_n = p_n`, `P̂_{n+1} = p_{n+1}` it evaluates
///
/// ```text
/// Σ_k w_k [Q_k φ'(c_k) + h f_k φ(c_k)] − (Q̂_{n+1} φ(1) − Q̂_n φ(0)),   φ ∈ {ℓ_0, .., ℓ_{s−1}}
/// Σ_k w_k [P_k ϕ'(c_k) + h g_k ϕ(c_k)] − (P̂_{n+1} ϕ(1) − P̂_n ϕ(0)),   ϕ ∈ {1, a_{τ,0}, .., a_{τ,s−1}}
/// ```
///
/// at the stage values of a step. A converged step of the (unswapped) integrator drives
/// every entry to the solver tolerance.
pub fn weak_form_residual(
    system: &dyn MechanicalSystem,
    stages: &GalerkinStages,
    start: &PhaseState,
    end: &PhaseState,
    h: f64,
    basis: &LegendreBasis,
    quad: &QuadratureRule,
) -> Result<f64> {
    let m = quad.len();
    if stages.q.len() != m {
        return Err(Error::Dimension { expected: m, got: stages.q.len() });
    }
    let d = start.dim();
    let s = basis.size();
    let (c, w) = (quad.nodes(), quad.weights());
    let mut f = vec![vec![0.0; d]; m];
    let mut g = vec![vec![0.0; d]; m];
    for k in 0..m {
        hamiltonian_vector_field(system, &stages.q[k], &stages.p[k], &mut f[k], &mut g[k])?;
    }

    let mut worst: f64 = 0.0;
    // position equation, φ = ℓ_j
    for j in 0..s {
        let phi_0 = basis.eval(j, 0.0)?;
        let phi_1 = basis.eval(j, 1.0)?;
        for a in 0..d {
            let mut integral = 0.0;
            for k in 0..m {
                let dphi = basis.derivative(j, c[k])?;
                let phi = basis.eval(j, c[k])?;
                integral += w[k] * (stages.q[k][a] * dphi + h * f[k][a] * phi);
            }
            let boundary = end.q()[a] * phi_1 - start.q()[a] * phi_0;
            worst = worst.max((integral - boundary).abs());
        }
    }
    // momentum equation, ϕ = 1 then ϕ = a_{τ,i}
    for a in 0..d {
        let integral: f64 = (0..m).map(|k| w[k] * h * g[k][a]).sum();
        worst = worst.max((integral - (end.p()[a] - start.p()[a])).abs());
    }
    for i in 0..s {
        let phi_0 = basis.antiderivative(i, 0.0)?;
        let phi_1 = basis.antiderivative(i, 1.0)?;
        for a in 0..d {
            let mut integral = 0.0;
            for k in 0..m {
                let dphi = basis.eval(i, c[k])?;
                let phi = basis.antiderivative(i, c[k])?;
                integral += w[k] * (stages.p[k][a] * dphi + h * g[k][a] * phi);
            }
            let boundary = end.p()[a] * phi_1 - start.p()[a] * phi_0;
            worst = worst.max((integral - boundary).abs());
        }
    }
    Ok(worst)
}
