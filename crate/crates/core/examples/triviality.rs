//! Sub-linear densities have a zero hull: `I(u ∘ ψ_j)` with `ψ_j = t^{j+1}`
//! decays like `2 / sqrt(j)`.
//!
//! `cargo run --example triviality`

use invhull::densities::parse_density;
use invhull::hull1d::{direct_minimize_reparam, invariant_hull_1d, triviality_probe, SmoothCurve, DEFAULT_SEED};

fn main() -> invhull::Result<()> {
    let w = parse_density("power:0.5")?;
    let u = SmoothCurve::line(&[1.0, 0.0, 0.0]).sample(4096)?;
    let probe = triviality_probe(&w, &u, 50);
    for j in [1usize, 5, 10, 25, 50] {
        let exact = ((j + 1) as f64).sqrt() * 2.0 / (j + 2) as f64;
        println!("j = {j:>2}: I(u∘ψ_j) = {:.8}  closed form {exact:.8}", probe[j - 1]);
    }
    let (direct, _) = direct_minimize_reparam(&w, &u, 2000, DEFAULT_SEED)?;
    println!("direct minimizer after 2000 steps: {direct:.5}");
    println!("status: {}", invariant_hull_1d(&w, &u)?.status.as_str());
    Ok(())
}
