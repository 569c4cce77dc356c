//! The pointwise hull of `|F|^N / N^{N/2}` is the volume density
//! `sqrt(det F^T F)`, attained at the closed-form optimal `X`.
//!
//! `cargo run --example pointwise_volume`

use invhull::densities::{wbar, Builtin, MatrixF};
use invhull::pointwise::{criticality_residual, optimal_x_closed_form, pointwise_hull, volume_density};

fn main() -> invhull::Result<()> {
    for literal in ["1,0;0,2;1,1", "1,0.5,0;0,1,0.2;0.3,0,1;1,1,1"] {
        let f = MatrixF::parse(literal)?;
        let r = pointwise_hull(&Builtin::Wn, &f, 16, 7)?;
        let x = optimal_x_closed_form(&f)?;
        println!("F = [{literal}]");
        println!("  multi-start hull    {:.12}", r.value);
        println!("  volume density      {:.12}", volume_density(&f));
        println!("  W̄ at closed-form X  {:.12}", wbar(&Builtin::Wn, &x, &f)?.to_f64());
        println!("  criticality residual {:.2e}", criticality_residual(&f, &x));
    }
    Ok(())
}
