//! Closed-form invariant hull of a curve functional.
//!
//! `cargo run --example curve_hull`

use invhull::densities::parse_density;
use invhull::hull1d::{evaluate_functional_1d, invariant_hull_1d, SmoothCurve};

fn main() -> invhull::Result<()> {
    let u = SmoothCurve::helix().sample(2048)?;
    for id in ["quadratic", "ppower:3", "norm"] {
        let w = parse_density(id)?;
        let r = invariant_hull_1d(&w, &u)?;
        println!(
            "{id:>10}: I = {:.6}  I_i = {:.6}  status {}  c = {:?}",
            evaluate_functional_1d(&w, &u)?,
            r.value,
            r.status.as_str(),
            r.c
        );
    }
    // the optimal reparameterization runs at constant speed for the quadratic
    let r = invariant_hull_1d(&parse_density("quadratic")?, &u)?;
    let s = r.slopes.slopes();
    println!(
        "slope range of the optimal φ': [{:.4}, {:.4}]",
        s.iter().cloned().fold(f64::INFINITY, f64::min),
        s.iter().cloned().fold(0.0, f64::max)
    );
    Ok(())
}
