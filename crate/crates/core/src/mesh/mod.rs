//! Triangulated unit disk, piecewise-linear surfaces, and the Dirichlet and
//! area functionals.

mod disk;
mod io;
mod locate;
mod surface;

pub use disk::{build_disk_mesh, TriMesh};
pub use io::{write_obj, write_off};
pub use locate::PointLocator;
pub use surface::{area_functional, dirichlet_energy, sample_surface, EnergyReport, SurfaceId, SurfaceSample};
