//! Descent over three-point disk diffeomorphisms; writes the energy history
//! as SVG when given a path.
//!
//! `cargo run --release --example inner_variation [-- history.svg]`

use invhull::cli::emit_svg;
use invhull::mesh::{area_functional, build_disk_mesh, sample_surface, SurfaceId};
use invhull::reparam2d::{conformality_defect, inner_variation_descent, BoundaryPolicy, DescentOptions, DiskDiffeo};

fn main() -> invhull::Result<()> {
    let mesh = build_disk_mesh(4);
    let s = sample_surface(&mesh, |x| SurfaceId::GraphSin(0.3).eval(x))?;
    let id = DiskDiffeo::identity(&mesh, BoundaryPolicy::three_point(&mesh));
    let r = inner_variation_descent(&s, &id, 2000, &DescentOptions::default())?;
    let area = area_functional(&s);
    for (k, e) in r.history.iter().enumerate().step_by(100) {
        println!("step {k:>4}: E = {e:.8}  gap {:.3e}", (e - area) / area);
    }
    println!(
        "{:?} after {} steps; defect {:.4} -> {:.4}",
        r.status,
        r.history.len() - 1,
        conformality_defect(&s, &id),
        conformality_defect(&s, &r.phi)
    );
    if let Some(path) = std::env::args().nth(1) {
        emit_svg(&r.history, path.as_ref())?;
    }
    Ok(())
}
