//! One linear Beltrami solve turns the Dirichlet energy of the stretched
//! disk into its area.
//!
//! `cargo run --release --example beltrami_straightening`

use invhull::mesh::{area_functional, build_disk_mesh, dirichlet_energy, sample_surface, SurfaceId};
use invhull::reparam2d::{
    beltrami_coefficient, conformality_defect, energy_of_reparam, linear_beltrami_solve, BoundaryPolicy,
};

fn main() -> invhull::Result<()> {
    for level in 3..=6 {
        let mesh = build_disk_mesh(level);
        let s = sample_surface(&mesh, |x| SurfaceId::Stretch(2.0, 1.0).eval(x))?;
        let mu = beltrami_coefficient(&s)?;
        let phi = linear_beltrami_solve(&mesh, &mu, BoundaryPolicy::three_point(&mesh))?;
        println!(
            "level {level}: |μ| = {:.4}  dirichlet {:.5} -> E(Φ) {:.5}  area {:.5}  defect {:.4}",
            mu.max_abs(),
            dirichlet_energy(&s),
            energy_of_reparam(&s, &phi)?,
            area_functional(&s),
            conformality_defect(&s, &phi)
        );
    }
    Ok(())
}
