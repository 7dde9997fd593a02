//! Binary STL: 80-byte header, little-endian `u32` triangle count, then per
//! triangle twelve little-endian `f32` (normal, three vertices) and a `u16`
//! attribute word (always 0).

use std::io::{Read, Write};

use super::{normal, TriMesh};
use crate::{Error, Result};

pub const HEADER_TAG: &str = "interlock binary stl";

/// One STL facet exactly as stored on disk.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Facet {
    pub normal: [f32; 3],
    pub vertices: [[f32; 3]; 3],
}

pub fn facets(mesh: &TriMesh) -> Vec<Facet> {
    mesh.triangle_soup()
        .map(|t| {
            let n = normal(&t);
            let len = (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt();
            let n = if len > 0.0 { [n[0] / len, n[1] / len, n[2] / len] } else { [0.0; 3] };
            Facet {
                normal: n.map(|x| x as f32),
                vertices: t.map(|v| v.map(|x| x as f32)),
            }
        })
        .collect()
}

pub fn write_binary<W: Write>(mut w: W, facets: &[Facet]) -> Result<()> {
    let mut header = [0u8; 80];
    header[..HEADER_TAG.len()].copy_from_slice(HEADER_TAG.as_bytes());
    w.write_all(&header)?;
    let count = u32::try_from(facets.len())
        .map_err(|_| Error::InvalidArgument("too many triangles for STL".into()))?;
    w.write_all(&count.to_le_bytes())?;
    let mut buf = Vec::with_capacity(facets.len() * 50);
    for f in facets {
        for x in f.normal.iter().chain(f.vertices.iter().flatten()) {
            buf.extend_from_slice(&x.to_le_bytes());
        }
        buf.extend_from_slice(&0u16.to_le_bytes());
    }
    w.write_all(&buf)?;
    Ok(())
}

pub fn write_mesh<W: Write>(w: W, mesh: &TriMesh) -> Result<()> {
    write_binary(w, &facets(mesh))
}

pub fn read_binary<R: Read>(mut r: R) -> Result<Vec<Facet>> {
    let mut header = [0u8; 80];
    r.read_exact(&mut header)
        .map_err(|_| Error::MalformedStl("truncated header".into()))?;
    let mut count = [0u8; 4];
    r.read_exact(&mut count)
        .map_err(|_| Error::MalformedStl("missing triangle count".into()))?;
    let count = u32::from_le_bytes(count) as usize;
    let mut body = Vec::new();
    r.read_to_end(&mut body)?;
    if body.len() != count * 50 {
        return Err(Error::MalformedStl(format!(
            "expected {} bytes of facets, found {}",
            count * 50,
            body.len()
        )));
    }
    let f32_at = |off: usize| f32::from_le_bytes(body[off..off + 4].try_into().expect("4 bytes"));
    Ok((0..count)
        .map(|i| {
            let base = i * 50;
            let mut vals = [0f32; 12];
            for (k, v) in vals.iter_mut().enumerate() {
                *v = f32_at(base + 4 * k);
            }
            Facet {
                normal: [vals[0], vals[1], vals[2]],
                vertices: [
                    [vals[3], vals[4], vals[5]],
                    [vals[6], vals[7], vals[8]],
                    [vals[9], vals[10], vals[11]],
                ],
            }
        })
        .collect())
}
