//! Orthonormal shifted Legendre polynomials on `[0, 1]`.
//!
//! `ℓ_j(x) = √(2j+1) P_j(2x − 1)` where `P_j` is the classical Legendre polynomial.
//! The basis is defined by Rodrigues' formula
//!
//! ```text
//! ℓ_j(x) = √(2j+1) / j! · d^j/dx^j [ x^j (x − 1)^j ]
//! ```
//!
//! but evaluated with the three-term recurrence. [`rodrigues_coefficients`] expands the
//! definition literally and is kept as the cross-check for the recurrence.

use crate::error::{Error, Result};
use crate::quadrature::QuadratureRule;

/// Largest basis size accepted by [`LegendreBasis::new`].
pub const MAX_BASIS_SIZE: usize = 10;

/// Values `P_0(y), .., P_n(y)` of the classical Legendre polynomials.
fn legendre_values(n: usize, y: f64, out: &mut Vec<f64>) {
    out.clear();
    out.push(1.0);
    if n == 0 {
        return;
    }
    out.push(y);
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * y * out[k] - kf * out[k - 1]) / (kf + 1.0);
        out.push(next);
    }
}

/// `ℓ_j(x)` by the three-term recurrence. No restriction on `j`.
pub fn shifted_legendre(j: usize, x: f64) -> f64 {
    let mut vals = Vec::with_capacity(j + 1);
    legendre_values(j, 2.0 * x - 1.0, &mut vals);
    (2.0 * j as f64 + 1.0).sqrt() * vals[j]
}

/// `∫₀^τ ℓ_j(x) dx` in closed form.
///
/// For `j ≥ 1` this is `(P_{j+1}(y) − P_{j−1}(y)) / (2√(2j+1))` with `y = 2τ − 1`.
pub fn shifted_legendre_antiderivative(j: usize, tau: f64) -> f64 {
    if j == 0 {
        return tau;
    }
    let mut vals = Vec::with_capacity(j + 2);
    legendre_values(j + 1, 2.0 * tau - 1.0, &mut vals);
    (vals[j + 1] - vals[j - 1]) / (2.0 * (2.0 * j as f64 + 1.0).sqrt())
}

/// `ℓ_j'(x)`, using `P'_{n+1} = P'_{n−1} + (2n+1) P_n`.
pub fn shifted_legendre_derivative(j: usize, x: f64) -> f64 {
    if j == 0 {
        return 0.0;
    }
    let mut vals = Vec::with_capacity(j + 1);
    legendre_values(j, 2.0 * x - 1.0, &mut vals);
    let mut dprev = 0.0; // P'_0
    let mut dcur = 1.0; // P'_1
    for n in 1..j {
        let dnext = dprev + (2.0 * n as f64 + 1.0) * vals[n];
        dprev = dcur;
        dcur = dnext;
    }
    2.0 * (2.0 * j as f64 + 1.0).sqrt() * dcur
}

/// Integer monomial coefficients (ascending powers) of `P_j(2x − 1) = ℓ_j(x)/√(2j+1)`,
/// obtained by expanding `x^j (x − 1)^j`, differentiating `j` times and dividing by `j!`.
///
/// Every intermediate value is an integer below `2^53` up to `j = 10`, so the table is exact.
pub fn rodrigues_coefficients(j: usize) -> Vec<f64> {
    // x^j (x-1)^j = Σ_k C(j,k) (-1)^(j-k) x^(j+k)
    let mut poly = vec![0.0; 2 * j + 1];
    let mut binom = 1.0;
    for k in 0..=j {
        let sign = if (j - k) % 2 == 0 { 1.0 } else { -1.0 };
        poly[j + k] = sign * binom;
        binom = binom * (j - k) as f64 / (k + 1) as f64;
    }
    for _ in 0..j {
        poly = poly.iter().enumerate().skip(1).map(|(p, c)| c * p as f64).collect();
    }
    let factorial: f64 = (1..=j).map(|k| k as f64).product();
    poly.iter().map(|c| c / factorial).collect()
}

/// `ℓ_j(x)` from the Rodrigues expansion, evaluated by compensated Horner.
pub fn rodrigues_eval(j: usize, x: f64) -> f64 {
    let coeffs = rodrigues_coefficients(j);
    let mut acc = 0.0;
    let mut err = 0.0;
    for &c in coeffs.iter().rev() {
        let prod = acc * x;
        let prod_err = acc.mul_add(x, -prod);
        let sum = prod + c;
        let bb = sum - prod;
        let sum_err = (prod - (sum - bb)) + (c - bb);
        acc = sum;
        err = err * x + (prod_err + sum_err);
    }
    (2.0 * j as f64 + 1.0).sqrt() * (acc + err)
}

/// The first `s` orthonormal shifted Legendre polynomials `ℓ_0, .., ℓ_{s−1}`.
#[derive(Debug, Clone, PartialEq)]
pub struct LegendreBasis {
    s: usize,
    /// `√(2j+1)` for each degree.
    norms: Vec<f64>,
}

impl LegendreBasis {
    pub fn new(s: usize) -> Result<Self> {
        if !(1..=MAX_BASIS_SIZE).contains(&s) {
            return Err(Error::Config(format!(
                "basis size s = {s} outside 1..={MAX_BASIS_SIZE}"
            )));
        }
        let norms = (0..s).map(|j| (2.0 * j as f64 + 1.0).sqrt()).collect();
        Ok(Self { s, norms })
    }

    pub fn size(&self) -> usize {
        self.s
    }

    fn check(&self, j: usize) -> Result<()> {
        if j >= self.s {
            Err(Error::BasisIndex { index: j, size: self.s })
        } else {
            Ok(())
        }
    }

    /// `ℓ_j(x)`.
    pub fn eval(&self, j: usize, x: f64) -> Result<f64> {
        self.check(j)?;
        Ok(shifted_legendre(j, x))
    }

    /// `a_{τ,i} = ∫₀^τ ℓ_i(x) dx`.
    pub fn antiderivative(&self, i: usize, tau: f64) -> Result<f64> {
        self.check(i)?;
        Ok(shifted_legendre_antiderivative(i, tau))
    }

    /// `ℓ_j'(x)`.
    pub fn derivative(&self, j: usize, x: f64) -> Result<f64> {
        self.check(j)?;
        Ok(shifted_legendre_derivative(j, x))
    }

    /// `[ℓ_0(x), .., ℓ_{s−1}(x)]` from a single recurrence sweep.
    pub fn eval_all(&self, x: f64) -> Vec<f64> {
        let mut vals = Vec::with_capacity(self.s);
        legendre_values(self.s - 1, 2.0 * x - 1.0, &mut vals);
        vals.iter().zip(&self.norms).map(|(v, n)| v * n).collect()
    }

    /// `[a_{τ,0}, .., a_{τ,s−1}]` from a single recurrence sweep.
    pub fn antiderivative_all(&self, tau: f64) -> Vec<f64> {
        let mut vals = Vec::with_capacity(self.s + 1);
        legendre_values(self.s, 2.0 * tau - 1.0, &mut vals);
        (0..self.s)
            .map(|j| {
                if j == 0 {
                    tau
                } else {
                    (vals[j + 1] - vals[j - 1]) / (2.0 * self.norms[j])
                }
            })
            .collect()
    }

    /// `max_{j,k<s} |Σ_m w_m ℓ_j(c_m) ℓ_k(c_m) − δ_{jk}|` under `quad`.
    pub fn orthonormality_defect(&self, quad: &QuadratureRule) -> f64 {
        let values: Vec<Vec<f64>> = quad.nodes().iter().map(|&c| self.eval_all(c)).collect();
        let mut defect: f64 = 0.0;
        for j in 0..self.s {
            for k in 0..self.s {
                let gram: f64 = quad
                    .weights()
                    .iter()
                    .zip(&values)
                    .map(|(w, v)| w * v[j] * v[k])
                    .sum();
                let delta = if j == k { 1.0 } else { 0.0 };
                defect = defect.max((gram - delta).abs());
            }
        }
        defect
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;
    use proptest::prelude::*;

    #[test]
    fn spot_values() {
        let basis = LegendreBasis::new(3).unwrap();
        assert_eq!(basis.eval(0, 0.73).unwrap(), 1.0);
        assert_abs_diff_eq!(basis.eval(1, 1.0).unwrap(), 3f64.sqrt(), epsilon = 1e-15);
        assert_abs_diff_eq!(basis.eval(2, 0.5).unwrap(), -5f64.sqrt() / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn antiderivative_spot_values() {
        let basis = LegendreBasis::new(2).unwrap();
        assert_abs_diff_eq!(basis.antiderivative(0, 0.4).unwrap(), 0.4, epsilon = 1e-16);
        assert_abs_diff_eq!(basis.antiderivative(1, 1.0).unwrap(), 0.0, epsilon = 1e-15);
        assert_abs_diff_eq!(
            basis.antiderivative(1, 0.5).unwrap(),
            -3f64.sqrt() / 4.0,
            epsilon = 1e-15
        );
    }

    #[test]
    fn index_out_of_range() {
        let basis = LegendreBasis::new(3).unwrap();
        assert_eq!(basis.eval(3, 0.2), Err(Error::BasisIndex { index: 3, size: 3 }));
        assert!(matches!(basis.antiderivative(7, 0.2), Err(Error::BasisIndex { .. })));
        assert!(matches!(basis.derivative(3, 0.2), Err(Error::BasisIndex { .. })));
    }

    #[test]
    fn size_limits() {
        assert!(LegendreBasis::new(0).is_err());
        assert!(LegendreBasis::new(MAX_BASIS_SIZE).is_ok());
        assert!(LegendreBasis::new(MAX_BASIS_SIZE + 1).is_err());
    }

    #[test]
    fn antiderivative_at_one_is_kronecker() {
        let basis = LegendreBasis::new(MAX_BASIS_SIZE).unwrap();
        for j in 0..MAX_BASIS_SIZE {
            let delta = if j == 0 { 1.0 } else { 0.0 };
            assert!((basis.antiderivative(j, 1.0).unwrap() - delta).abs() < 1e-14, "j = {j}");
        }
    }

    #[test]
    fn orthonormality_needs_enough_nodes() {
        let basis = LegendreBasis::new(1).unwrap();
        for m in 1..=10 {
            assert_eq!(basis.orthonormality_defect(&QuadratureRule::gauss_legendre(m).unwrap()), 0.0);
        }
        let basis = LegendreBasis::new(3).unwrap();
        assert!(basis.orthonormality_defect(&QuadratureRule::gauss_legendre(3).unwrap()) < 1e-13);
        // one midpoint node sees ℓ_0ℓ_2 = ℓ_2(1/2) = −√5/2 instead of 0
        let under = basis.orthonormality_defect(&QuadratureRule::gauss_legendre(1).unwrap());
        assert_abs_diff_eq!(under, 5f64.sqrt() / 2.0, epsilon = 1e-14);
    }

    #[test]
    fn rodrigues_low_degrees() {
        // P_1(2x − 1) = 2x − 1, P_2(2x − 1) = 6x² − 6x + 1, P_3(2x − 1) = 20x³ − 30x² + 12x − 1
        assert_eq!(rodrigues_coefficients(0), [1.0]);
        assert_eq!(rodrigues_coefficients(1), [-1.0, 2.0]);
        assert_eq!(rodrigues_coefficients(2), [1.0, -6.0, 6.0]);
        assert_eq!(rodrigues_coefficients(3), [-1.0, 12.0, -30.0, 20.0]);
        assert_abs_diff_eq!(rodrigues_eval(2, 0.5), -(5f64.sqrt()) / 2.0, epsilon = 1e-15);
    }

    #[test]
    fn eval_all_matches_single() {
        let basis = LegendreBasis::new(6).unwrap();
        let x = 0.2718;
        let all = basis.eval_all(x);
        let anti = basis.antiderivative_all(x);
        for j in 0..6 {
            assert_eq!(all[j], basis.eval(j, x).unwrap());
            assert_abs_diff_eq!(anti[j], basis.antiderivative(j, x).unwrap(), epsilon = 1e-16);
        }
    }

    proptest! {
        #[test]
        fn recurrence_matches_rodrigues(j in 0usize..=10, x in 0.0f64..=1.0) {
            let rec = shifted_legendre(j, x);
            let rod = rodrigues_eval(j, x);
            prop_assert!((rec - rod).abs() < 1e-12, "j={} x={} rec={} rod={}", j, x, rec, rod);
        }

        #[test]
        fn antiderivative_differentiates_back(j in 0usize..MAX_BASIS_SIZE, tau in 0.01f64..0.99) {
            let step = 1e-5;
            let fd = (shifted_legendre_antiderivative(j, tau + step)
                - shifted_legendre_antiderivative(j, tau - step)) / (2.0 * step);
            prop_assert!((fd - shifted_legendre(j, tau)).abs() < 1e-6);
        }

        #[test]
        fn derivative_matches_finite_difference(j in 0usize..MAX_BASIS_SIZE, x in 0.01f64..0.99) {
            let step = 1e-6;
            let fd = (shifted_legendre(j, x + step) - shifted_legendre(j, x - step)) / (2.0 * step);
            let exact = shifted_legendre_derivative(j, x);
            prop_assert!((fd - exact).abs() < 1e-6 * exact.abs().max(1.0));
        }
    }
}
