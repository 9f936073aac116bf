//! Nonlinear solver for the implicit stage equations shared by both integrator families.
//!
//! A stage system supplies a residual and a cheap fixed-point sweep. The solver runs
//! fixed-point sweeps while they contract and falls back to Newton's method with a
//! central-difference Jacobian when a sweep reduces the residual by less than 10%.

use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum SolverKind {
    /// Fixed-point sweeps, Newton when they stall.
    FixedPoint,
    /// Newton with a finite-difference Jacobian from the first iteration.
    Newton,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SolverConfig {
    /// Max-norm bound on the stage residual.
    pub tol: f64,
    /// Iteration budget for each phase (fixed-point, then Newton).
    pub max_iter: usize,
    pub kind: SolverKind,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self { tol: 1e-12, max_iter: 100, kind: SolverKind::FixedPoint }
    }
}

impl SolverConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        if !(self.tol > 0.0 && self.tol.is_finite()) {
            return Err(Error::Config(format!("solver tolerance must be positive, got {}", self.tol)));
        }
        if self.max_iter == 0 {
            return Err(Error::Config("solver needs max_iter ≥ 1".into()));
        }
        Ok(())
    }
}

/// Stage equations `R(x) = 0` of one step.
pub(crate) trait StageEquations {
    fn residual(&mut self, x: &[f64], r: &mut [f64]) -> Result<()>;

    /// Replaces `x` with the next fixed-point iterate, given `r = R(x)`.
    fn sweep(&mut self, x: &mut [f64], r: &[f64]) -> Result<()>;
}

#[derive(Debug, Clone)]
pub(crate) struct Solution {
    pub x: Vec<f64>,
    pub residual: f64,
    pub iterations: usize,
}

fn max_norm(r: &[f64]) -> Result<f64> {
    let mut norm: f64 = 0.0;
    for v in r {
        if !v.is_finite() {
            return Err(Error::Divergence);
        }
        norm = norm.max(v.abs());
    }
    Ok(norm)
}

pub(crate) fn solve(eqs: &mut impl StageEquations, x0: Vec<f64>, cfg: &SolverConfig) -> Result<Solution> {
    let n = x0.len();
    let mut x = x0;
    let mut r = vec![0.0; n];
    eqs.residual(&x, &mut r)?;
    let mut norm = max_norm(&r)?;
    let mut iterations = 0;

    if cfg.kind == SolverKind::FixedPoint {
        let mut sweeps = 0;
        while norm > cfg.tol && sweeps < cfg.max_iter {
            eqs.sweep(&mut x, &r)?;
            if x.iter().any(|v| !v.is_finite()) {
                return Err(Error::Divergence);
            }
            eqs.residual(&x, &mut r)?;
            let next = max_norm(&r)?;
            sweeps += 1;
            let stalled = next > 0.9 * norm;
            norm = next;
            if stalled {
                break;
            }
        }
        iterations += sweeps;
        if norm <= cfg.tol {
            return Ok(Solution { x, residual: norm, iterations });
        }
    }

    let mut newton = 0;
    while norm > cfg.tol && newton < cfg.max_iter {
        let jac = fd_jacobian(|y, out| eqs.residual(y, out), &x, n)?;
        let rhs = DVector::from_iterator(n, r.iter().map(|v| -v));
        let delta = jac
            .lu()
            .solve(&rhs)
            .ok_or(Error::Convergence { iterations: iterations + newton, residual: norm })?;
        for (xi, di) in x.iter_mut().zip(delta.iter()) {
            *xi += di;
        }
        if x.iter().any(|v| !v.is_finite()) {
            return Err(Error::Divergence);
        }
        eqs.residual(&x, &mut r)?;
        norm = max_norm(&r)?;
        newton += 1;
    }
    iterations += newton;
    if norm <= cfg.tol {
        Ok(Solution { x, residual: norm, iterations })
    } else {
        Err(Error::Convergence { iterations, residual: norm })
    }
}

/// Central-difference Jacobian of `f: R^n → R^m` at `x`.
pub(crate) fn fd_jacobian(
    mut f: impl FnMut(&[f64], &mut [f64]) -> Result<()>,
    x: &[f64],
    m: usize,
) -> Result<DMatrix<f64>> {
    let n = x.len();
    let mut jac = DMatrix::zeros(m, n);
    let mut shifted = x.to_vec();
    let mut plus = vec![0.0; m];
    let mut minus = vec![0.0; m];
    let step_scale = f64::EPSILON.cbrt();
    for j in 0..n {
        let dx = step_scale * x[j].abs().max(1.0);
        shifted[j] = x[j] + dx;
        f(&shifted, &mut plus)?;
        shifted[j] = x[j] - dx;
        f(&shifted, &mut minus)?;
        shifted[j] = x[j];
        for i in 0..m {
            jac[(i, j)] = (plus[i] - minus[i]) / (2.0 * dx);
        }
    }
    Ok(jac)
}

#[cfg(test)]
mod tests {
    use super::*;

    /// x = cos(x), a contraction near its fixed point.
    struct Dottie;

    impl StageEquations for Dottie {
        fn residual(&mut self, x: &[f64], r: &mut [f64]) -> Result<()> {
            r[0] = x[0] - x[0].cos();
            Ok(())
        }
        fn sweep(&mut self, x: &mut [f64], _r: &[f64]) -> Result<()> {
            x[0] = x[0].cos();
            Ok(())
        }
    }

    /// x² = 2 with a useless sweep, so fixed-point stalls and Newton must take over.
    struct Sqrt2;

    impl StageEquations for Sqrt2 {
        fn residual(&mut self, x: &[f64], r: &mut [f64]) -> Result<()> {
            r[0] = x[0] * x[0] - 2.0;
            Ok(())
        }
        fn sweep(&mut self, _x: &mut [f64], _r: &[f64]) -> Result<()> {
            Ok(())
        }
    }

    #[test]
    fn fixed_point_converges() {
        let sol = solve(&mut Dottie, vec![1.0], &SolverConfig::with_tol(1e-13)).unwrap();
        assert!((sol.x[0] - 0.739_085_133_215_160_6).abs() < 1e-12);
        assert!(sol.residual <= 1e-13);
    }

    #[test]
    fn stalled_fixed_point_falls_back_to_newton() {
        let sol = solve(&mut Sqrt2, vec![1.0], &SolverConfig::with_tol(1e-14)).unwrap();
        assert!((sol.x[0] - 2f64.sqrt()).abs() < 1e-14);
    }

    #[test]
    fn newton_only() {
        let cfg = SolverConfig { kind: SolverKind::Newton, ..SolverConfig::with_tol(1e-14) };
        let sol = solve(&mut Dottie, vec![0.0], &cfg).unwrap();
        assert!((sol.x[0] - 0.739_085_133_215_160_6).abs() < 1e-14);
        assert!(sol.iterations < 10);
    }

    #[test]
    fn reports_non_convergence() {
        let cfg = SolverConfig { tol: 1e-14, max_iter: 2, kind: SolverKind::FixedPoint };
        match solve(&mut Dottie, vec![0.0], &cfg) {
            Err(Error::Convergence { iterations, residual }) => {
                assert_eq!(iterations, 4);
                assert!(residual > 1e-14);
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig::with_tol(0.0).validate().is_err());
        assert!(SolverConfig { max_iter: 0, ..Default::default() }.validate().is_err());
    }
}
