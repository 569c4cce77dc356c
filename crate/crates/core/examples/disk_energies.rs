//! Dirichlet energy against area on the built-in disk surfaces, across mesh
//! levels; writes the finest mesh as OBJ when given a path.
//!
//! `cargo run --example disk_energies [-- out.obj]`

use std::path::PathBuf;

use invhull::mesh::{area_functional, build_disk_mesh, dirichlet_energy, sample_surface, write_obj, SurfaceId};

fn main() -> invhull::Result<()> {
    let out = std::env::args().nth(1).map(PathBuf::from);
    for id in ["flat", "stretch:2,1", "graph:sin:0.3"] {
        let surface = SurfaceId::parse(id)?;
        for level in 2..=6 {
            let mesh = build_disk_mesh(level);
            let s = sample_surface(&mesh, |x| surface.eval(x))?;
            println!(
                "{id:>14} level {level}: {:>6} triangles  dirichlet {:.6}  area {:.6}",
                mesh.num_triangles(),
                dirichlet_energy(&s),
                area_functional(&s)
            );
            if level == 6 && id == "graph:sin:0.3" {
                if let Some(path) = &out {
                    write_obj(&s, path)?;
                }
            }
        }
    }
    Ok(())
}
