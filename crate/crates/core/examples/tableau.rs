//! Partitioned Butcher tableaux from the continuous-stage coefficients, plain and swapped.
//! With `m = s` Gauss nodes both matrices coincide with the Gauss collocation matrix.

use varint::bench::tableau_text;
use varint::{build_csprk, QuadratureRule};

fn main() -> varint::Result<()> {
    for (s, m) in [(1, 1), (2, 2), (2, 3)] {
        let quad = QuadratureRule::gauss_legendre(m)?;
        for swapped in [false, true] {
            let t = build_csprk(s, swapped)?.discretize(&quad)?;
            print!("{}", tableau_text(&t));
            println!("# symplecticity defect {:.1e}\n", t.symplecticity_defect());
        }
    }

    let coeffs = build_csprk(3, false)?;
    println!("A(τ,σ) + Â(σ,τ) at (0.3, 0.8): {}", coeffs.a(0.3, 0.8) + coeffs.a_hat(0.8, 0.3));
    Ok(())
}
