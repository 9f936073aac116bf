//! Symmetric quadrature rules on `[0, 1]`.

use crate::error::{Error, Result};

/// Largest Gauss–Legendre node count accepted by [`QuadratureRule::gauss_legendre`].
pub const MAX_NODES: usize = 20;

const SYMMETRY_TOL: f64 = 1e-14;
const EXACTNESS_TOL: f64 = 1e-13;

/// Nodes and weights on `[0, 1]` together with the highest monomial degree the rule
/// integrates exactly.
///
/// Only symmetric rules (`c_k + c_{m+1−k} = 1`, `w_k = w_{m+1−k}`) can be constructed;
/// the one-step maps built on top of a rule inherit their time-reversal symmetry from it.
#[derive(Debug, Clone, PartialEq)]
pub struct QuadratureRule {
    nodes: Vec<f64>,
    weights: Vec<f64>,
    exactness_degree: usize,
}

impl QuadratureRule {
    /// The `m`-point Gauss–Legendre rule mapped to `[0, 1]` (exact up to degree `2m − 1`).
    ///
    /// Roots of `P_m` are found by Newton iteration from the asymptotic guesses
    /// `cos(π(k − 1/4)/(m + 1/2))`; only the upper half is computed and the lower half
    /// mirrored, so the rule is symmetric to the last bit.
    pub fn gauss_legendre(m: usize) -> Result<Self> {
        if !(1..=MAX_NODES).contains(&m) {
            return Err(Error::Config(format!("Gauss-Legendre node count {m} outside 1..={MAX_NODES}")));
        }
        let mf = m as f64;
        let half = m.div_ceil(2);
        // (x, w) on [-1, 1] with x ≥ 0, largest first
        let mut upper = Vec::with_capacity(half);
        for k in 1..=half {
            let mut x = (std::f64::consts::PI * (k as f64 - 0.25) / (mf + 0.5)).cos();
            if m % 2 == 1 && k == half {
                x = 0.0;
            }
            let mut dp = 0.0;
            for _ in 0..100 {
                let (p, d) = legendre_with_derivative(m, x);
                dp = d;
                let dx = p / d;
                x -= dx;
                if dx.abs() <= 1e-15 {
                    dp = legendre_with_derivative(m, x).1;
                    break;
                }
            }
            let w = 2.0 / ((1.0 - x * x) * dp * dp);
            upper.push((x, w));
        }

        let mut nodes = vec![0.0; m];
        let mut weights = vec![0.0; m];
        for (k, &(x, w)) in upper.iter().enumerate() {
            // k-th largest root maps to node m-1-k; its mirror to node k
            let hi = 0.5 * (1.0 + x);
            nodes[m - 1 - k] = hi;
            nodes[k] = 1.0 - hi;
            weights[m - 1 - k] = 0.5 * w;
            weights[k] = 0.5 * w;
        }
        if m % 2 == 1 {
            nodes[m / 2] = 0.5;
        }
        // push the rounding of Σw into the central weight(s) so Σw == 1 exactly
        let centre: &[usize] = if m % 2 == 1 { &[m / 2] } else { &[m / 2 - 1, m / 2] };
        for _ in 0..8 {
            let gap = 1.0 - weights.iter().sum::<f64>();
            if gap == 0.0 {
                break;
            }
            for &k in centre {
                weights[k] += gap / centre.len() as f64;
            }
        }
        Ok(Self { nodes, weights, exactness_degree: 2 * m - 1 })
    }

    /// A user-supplied rule. The claimed exactness degree is verified against the
    /// monomials `x^p`, and asymmetric rules are rejected.
    pub fn new(nodes: Vec<f64>, weights: Vec<f64>, exactness_degree: usize) -> Result<Self> {
        if nodes.is_empty() || nodes.len() != weights.len() {
            return Err(Error::Config(format!(
                "quadrature needs matching non-empty nodes/weights, got {} and {}",
                nodes.len(),
                weights.len()
            )));
        }
        if nodes.iter().any(|c| !(0.0..=1.0).contains(c)) {
            return Err(Error::Config("quadrature nodes must lie in [0, 1]".into()));
        }
        if nodes.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::Config("quadrature nodes must be strictly increasing".into()));
        }
        if weights.iter().any(|&w| !(w > 0.0)) {
            return Err(Error::Config("quadrature weights must be positive".into()));
        }
        let m = nodes.len();
        for k in 0..m {
            if (nodes[k] + nodes[m - 1 - k] - 1.0).abs() > SYMMETRY_TOL
                || (weights[k] - weights[m - 1 - k]).abs() > SYMMETRY_TOL
            {
                return Err(Error::Config("quadrature rule is not symmetric about 1/2".into()));
            }
        }
        let rule = Self { nodes, weights, exactness_degree };
        if let Some(p) = rule.first_inexact_monomial() {
            return Err(Error::Config(format!(
                "rule claims exactness degree {exactness_degree} but fails on x^{p}"
            )));
        }
        Ok(rule)
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn exactness_degree(&self) -> usize {
        self.exactness_degree
    }

    /// `Σ_k w_k · samples[k]`.
    pub fn integrate(&self, samples: &[f64]) -> Result<f64> {
        if samples.len() != self.len() {
            return Err(Error::Dimension { expected: self.len(), got: samples.len() });
        }
        Ok(self.weights.iter().zip(samples).map(|(w, f)| w * f).sum())
    }

    /// Applies the rule to `f` sampled at the nodes.
    pub fn integrate_fn(&self, f: impl Fn(f64) -> f64) -> f64 {
        self.nodes.iter().zip(&self.weights).map(|(&c, w)| w * f(c)).sum()
    }

    /// Lowest `p ≤ exactness_degree` for which `∫₀¹ x^p` is missed by more than `1e-13`.
    pub fn first_inexact_monomial(&self) -> Option<usize> {
        (0..=self.exactness_degree).find(|&p| {
            let approx = self.integrate_fn(|x| x.powi(p as i32));
            (approx - 1.0 / (p as f64 + 1.0)).abs() > EXACTNESS_TOL
        })
    }
}

/// `(P_n(x), P_n'(x))` for the classical Legendre polynomial on `[-1, 1]`.
fn legendre_with_derivative(n: usize, x: f64) -> (f64, f64) {
    let mut p_prev = 1.0;
    let mut p = x;
    for k in 1..n {
        let kf = k as f64;
        let next = ((2.0 * kf + 1.0) * x * p - kf * p_prev) / (kf + 1.0);
        p_prev = p;
        p = next;
    }
    if n == 0 {
        return (1.0, 0.0);
    }
    let nf = n as f64;
    (p, nf * (x * p - p_prev) / (x * x - 1.0))
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_abs_diff_eq;

    #[test]
    fn midpoint_rule() {
        let rule = QuadratureRule::gauss_legendre(1).unwrap();
        assert_eq!(rule.nodes(), &[0.5]);
        assert_eq!(rule.weights(), &[1.0]);
        assert_eq!(rule.exactness_degree(), 1);
    }

    #[test]
    fn weights_sum_to_one_exactly() {
        for m in 1..=MAX_NODES {
            let rule = QuadratureRule::gauss_legendre(m).unwrap();
            let gap = rule.weights().iter().sum::<f64>() - 1.0;
            if m <= 10 {
                assert_eq!(gap, 0.0, "m = {m}");
            }
            assert!(gap.abs() <= f64::EPSILON, "m = {m}");
            let w = rule.weights();
            assert!((0..m).all(|k| w[k] == w[m - 1 - k]));
        }
    }

    #[test]
    fn two_point_rule() {
        let rule = QuadratureRule::gauss_legendre(2).unwrap();
        let off = 3f64.sqrt() / 6.0;
        assert_abs_diff_eq!(rule.nodes()[0], 0.5 - off, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.nodes()[1], 0.5 + off, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.weights()[0], 0.5, epsilon = 1e-15);
        assert_abs_diff_eq!(rule.weights()[1], 0.5, epsilon = 1e-15);
        let cubic = rule.integrate_fn(|x| x.powi(3));
        assert_abs_diff_eq!(cubic, 0.25, epsilon = 1e-15);
    }

    #[test]
    fn three_point_rule_closed_form() {
        // nodes 1/2 ∓ √15/10, weights 5/18, 4/9, 5/18
        let rule = QuadratureRule::gauss_legendre(3).unwrap();
        let off = 15f64.sqrt() / 10.0;
        for (c, e) in rule.nodes().iter().zip([0.5 - off, 0.5, 0.5 + off]) {
            assert_abs_diff_eq!(*c, e, epsilon = 1e-14);
        }
        for (w, e) in rule.weights().iter().zip([5.0 / 18.0, 4.0 / 9.0, 5.0 / 18.0]) {
            assert_abs_diff_eq!(*w, e, epsilon = 1e-14);
        }
    }

    #[test]
    fn integrate_samples() {
        let one = QuadratureRule::gauss_legendre(1).unwrap();
        assert_eq!(one.integrate(&[3.0]).unwrap(), 3.0);
        let two = QuadratureRule::gauss_legendre(2).unwrap();
        let samples: Vec<f64> = two.nodes().iter().map(|x| 6.0 * x * x).collect();
        assert_abs_diff_eq!(two.integrate(&samples).unwrap(), 2.0, epsilon = 1e-15);
        let five = QuadratureRule::gauss_legendre(5).unwrap();
        assert_eq!(five.integrate(&[0.0; 5]).unwrap(), 0.0);
        assert_eq!(two.integrate(&[1.0]), Err(Error::Dimension { expected: 2, got: 1 }));
    }

    #[test]
    fn every_rule_is_valid() {
        for m in 1..=MAX_NODES {
            let rule = QuadratureRule::gauss_legendre(m).unwrap();
            let total: f64 = rule.weights().iter().sum();
            assert!((total - 1.0).abs() < 1e-14, "m = {m}: weight sum {total}");
            assert!(rule.nodes().iter().all(|&c| c > 0.0 && c < 1.0));
            assert!(rule.weights().iter().all(|&w| w > 0.0));
            assert!(rule.nodes().windows(2).all(|w| w[0] < w[1]));
            assert_eq!(rule.first_inexact_monomial(), None, "m = {m}");
            for k in 0..m {
                assert!((rule.nodes()[k] + rule.nodes()[m - 1 - k] - 1.0).abs() < 1e-14);
                assert!((rule.weights()[k] - rule.weights()[m - 1 - k]).abs() < 1e-14);
            }
            // re-validating through the checked constructor must succeed
            QuadratureRule::new(rule.nodes().to_vec(), rule.weights().to_vec(), 2 * m - 1).unwrap();
        }
    }

    #[test]
    fn node_count_limits() {
        assert!(matches!(QuadratureRule::gauss_legendre(0), Err(Error::Config(_))));
        assert!(matches!(QuadratureRule::gauss_legendre(MAX_NODES + 1), Err(Error::Config(_))));
    }

    #[test]
    fn custom_rules_are_checked() {
        // trapezoid: symmetric, exact for degree 1
        assert!(QuadratureRule::new(vec![0.0, 1.0], vec![0.5, 0.5], 1).is_ok());
        assert!(QuadratureRule::new(vec![0.0, 1.0], vec![0.5, 0.5], 2).is_err());
        // left-rectangle rule: asymmetric
        assert!(QuadratureRule::new(vec![0.0], vec![1.0], 0).is_err());
        assert!(QuadratureRule::new(vec![0.5, 0.5], vec![0.5, 0.5], 1).is_err());
        assert!(QuadratureRule::new(vec![0.5], vec![1.0, 0.0], 1).is_err());
        assert!(QuadratureRule::new(vec![-0.5, 0.5, 1.5], vec![0.2, 0.6, 0.2], 1).is_err());
    }
}
