//! `|F1| |F2|` is neither quasiconvex nor coercive, yet its pointwise hull
//! is `|F1 ∧ F2|`, the same as that of the Dirichlet integrand.
//!
//! `cargo run --example product_density`

use invhull::densities::{Builtin, Density, MatrixF};
use invhull::pointwise::{pointwise_hull, volume_density};

fn main() -> invhull::Result<()> {
    for literal in ["1,0;0,1;0,0", "2,1;0,1;1,-1", "1,0.9;0,0.1;0,0"] {
        let f = MatrixF::parse(literal)?;
        let product = pointwise_hull(&Builtin::Product, &f, 16, 1)?.value;
        let dirichlet = pointwise_hull(&Builtin::Quadratic, &f, 16, 1)?.value;
        println!(
            "F = [{literal}]: |F1||F2| = {:.6}, |F|²/2 = {:.6}; hulls {product:.10} and {dirichlet:.10}; |F1∧F2| = {:.10}",
            Builtin::Product.eval(f.view()),
            Builtin::Quadratic.eval(f.view()),
            volume_density(&f)
        );
    }
    Ok(())
}
