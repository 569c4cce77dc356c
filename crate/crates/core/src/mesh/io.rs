//! OFF and OBJ export.

use std::fs::File;
use std::io::{BufWriter, Write};
use std::path::Path;

use super::{SurfaceSample, TriMesh};
use crate::error::Result;

/// ASCII OFF with `z = 0`.
pub fn write_off(mesh: &TriMesh, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    writeln!(w, "OFF")?;
    writeln!(w, "{} {} 0", mesh.num_vertices(), mesh.num_triangles())?;
    for [x, y] in &mesh.vertices {
        writeln!(w, "{x:.17e} {y:.17e} 0")?;
    }
    for [a, b, c] in &mesh.triangles {
        writeln!(w, "3 {a} {b} {c}")?;
    }
    w.flush()?;
    Ok(())
}

/// OBJ with the embedded 3D vertex positions.
pub fn write_obj(s: &SurfaceSample, path: &Path) -> Result<()> {
    let mut w = BufWriter::new(File::create(path)?);
    for [x, y, z] in &s.values {
        writeln!(w, "v {x:.17e} {y:.17e} {z:.17e}")?;
    }
    for [a, b, c] in &s.mesh.triangles {
        writeln!(w, "f {} {} {}", a + 1, b + 1, c + 1)?;
    }
    w.flush()?;
    Ok(())
}
