//! Shifted Legendre basis on [0, 1] and the Gauss–Legendre rules that discretize every
//! stage integral.
//!
//! ```text
//! cargo run --example legendre_quadrature
//! ```

use varint::legendre::{rodrigues_eval, LegendreBasis};
use varint::QuadratureRule;

fn main() -> varint::Result<()> {
    let basis = LegendreBasis::new(4)?;
    println!("  x      ℓ_0      ℓ_1      ℓ_2      ℓ_3     a(x,0)   a(x,1)   a(x,2)   a(x,3)");
    for x in [0.0, 0.25, 0.5, 0.75, 1.0] {
        let vals = basis.eval_all(x);
        let anti = basis.antiderivative_all(x);
        print!("{x:5.2}");
        for v in vals.iter().chain(&anti) {
            print!(" {v:8.4}");
        }
        println!();
    }

    // recurrence against the Rodrigues expansion
    let worst = (0..=10)
        .flat_map(|j| (0..=20).map(move |k| (j, k as f64 / 20.0)))
        .map(|(j, x)| (varint::legendre::shifted_legendre(j, x) - rodrigues_eval(j, x)).abs())
        .fold(0.0, f64::max);
    println!("\nrecurrence vs Rodrigues, j ≤ 10: {worst:.1e}");

    println!("\n m  nodes");
    for m in 1..=4 {
        let rule = QuadratureRule::gauss_legendre(m)?;
        let nodes: Vec<String> = rule.nodes().iter().map(|c| format!("{c:.6}")).collect();
        println!("{m:2}  {}", nodes.join(" "));
    }

    println!("\n s  orthonormality defect with m = s  (m = s − 1)");
    for s in 2..=6 {
        let basis = LegendreBasis::new(s)?;
        let exact = basis.orthonormality_defect(&QuadratureRule::gauss_legendre(s)?);
        let short = basis.orthonormality_defect(&QuadratureRule::gauss_legendre(s - 1)?);
        println!("{s:2}  {exact:.1e}  ({short:.3})");
    }
    Ok(())
}
