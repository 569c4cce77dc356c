//! Area survives composition with random disk diffeomorphisms; the
//! Dirichlet energy does not.
//!
//! `cargo run --release --example invariance`

use invhull::mesh::{area_functional, build_disk_mesh, dirichlet_energy, sample_surface, SurfaceId};
use invhull::reparam2d::{random_diffeo, resample, BoundaryPolicy};

fn main() -> invhull::Result<()> {
    for level in [3, 4, 5] {
        let mesh = build_disk_mesh(level);
        let s = sample_surface(&mesh, |x| SurfaceId::Stretch(2.0, 1.0).eval(x))?;
        let (a, d) = (area_functional(&s), dirichlet_energy(&s));
        let (mut da, mut dd) = (0.0f64, 0.0f64);
        for seed in 0..20 {
            let phi = random_diffeo(&mesh, BoundaryPolicy::three_point(&mesh), 0.8, seed);
            let r = resample(&s, &phi)?;
            da = da.max((area_functional(&r) - a).abs() / a);
            dd = dd.max((dirichlet_energy(&r) - d).abs() / d);
        }
        println!("level {level}: max relative change  area {da:.2e}  dirichlet {dd:.2e}");
    }
    Ok(())
}
