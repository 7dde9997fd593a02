//! Wavefront OBJ writer: `v x y z` lines, then `f i j k` with 1-based indices.

use std::io::Write;

use super::TriMesh;
use crate::Result;

pub fn write_obj<W: Write>(mut w: W, mesh: &TriMesh) -> Result<()> {
    for v in &mesh.vertices {
        writeln!(w, "v {:.9} {:.9} {:.9}", v[0], v[1], v[2])?;
    }
    for t in &mesh.triangles {
        writeln!(w, "f {} {} {}", t[0] + 1, t[1] + 1, t[2] + 1)?;
    }
    Ok(())
}
