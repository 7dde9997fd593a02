//! The Versatile Block and its four planar orientations.
//!
//! The block has a square in the bottom plane `z = 0` and a rectangle of the
//! same area in the top plane `z = 1`. Every horizontal slice has area 2.

use crate::isometry::Isometry2;
use crate::mesh::TriMesh;
use crate::{Error, Result};

/// Vertex coordinates `v1..v9` (stored 0-based).
pub const VERTICES: [[f64; 3]; 9] = [
    [0.0, 0.0, 0.0],
    [1.0, 1.0, 0.0],
    [2.0, 0.0, 0.0],
    [1.0, -1.0, 0.0],
    [0.0, 1.0, 1.0],
    [1.0, 1.0, 1.0],
    [1.0, 0.0, 1.0],
    [1.0, -1.0, 1.0],
    [0.0, -1.0, 1.0],
];

/// The 21 edges as 1-based vertex pairs.
pub const EDGES: [[usize; 2]; 21] = [
    [1, 2],
    [1, 3],
    [1, 4],
    [1, 5],
    [1, 9],
    [2, 3],
    [2, 5],
    [2, 6],
    [2, 7],
    [3, 4],
    [3, 7],
    [4, 7],
    [4, 8],
    [4, 9],
    [5, 6],
    [5, 7],
    [5, 9],
    [6, 7],
    [7, 8],
    [7, 9],
    [8, 9],
];

/// The 14 triangular faces as 1-based vertex triples.
pub const FACES: [[usize; 3]; 14] = [
    [1, 2, 3],
    [1, 2, 5],
    [1, 3, 4],
    [1, 4, 9],
    [1, 5, 9],
    [2, 3, 7],
    [2, 5, 6],
    [2, 6, 7],
    [3, 4, 7],
    [4, 7, 8],
    [4, 8, 9],
    [5, 6, 7],
    [5, 7, 9],
    [7, 8, 9],
];

/// Indices into [`FACES`] of the bottom square.
pub const BOTTOM_SQUARE: [usize; 2] = [0, 2];
/// Indices into [`FACES`] of the top rectangle.
pub const TOP_RECTANGLE: [usize; 3] = [11, 12, 13];

/// Centre of the bottom square; orientations rotate about it.
pub const BOTTOM_CENTER: [f64; 2] = [1.0, 0.0];
pub const HEIGHT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq)]
pub struct VersatileBlock {
    pub mesh: TriMesh,
    pub bottom_square: [usize; 2],
    pub top_rectangle: [usize; 3],
}

impl VersatileBlock {
    pub fn new() -> Self {
        let faces = FACES.iter().map(|f| [f[0] - 1, f[1] - 1, f[2] - 1]).collect();
        let mesh = TriMesh::from_unoriented(VERTICES.to_vec(), faces).expect("static block data is valid");
        // from_unoriented keeps face order, so the published face indices hold
        VersatileBlock {
            mesh,
            bottom_square: BOTTOM_SQUARE,
            top_rectangle: TOP_RECTANGLE,
        }
    }

    fn face_area(&self, faces: &[usize]) -> f64 {
        faces
            .iter()
            .map(|&f| {
                let n = crate::mesh::normal(&self.mesh.triangle(f));
                (n[0] * n[0] + n[1] * n[1] + n[2] * n[2]).sqrt() / 2.0
            })
            .sum()
    }

    pub fn bottom_area(&self) -> f64 {
        self.face_area(&self.bottom_square)
    }

    pub fn top_area(&self) -> f64 {
        self.face_area(&self.top_rectangle)
    }
}

impl Default for VersatileBlock {
    fn default() -> Self {
        Self::new()
    }
}

pub fn versatile_block() -> VersatileBlock {
    VersatileBlock::new()
}

/// Planar isometry taking the base block to orientation `k`: rotation by
/// `k·90°` clockwise (seen from +z) about the bottom-square centre.
pub fn orientation_isometry(k: u8) -> Result<Isometry2> {
    if k > 3 {
        return Err(Error::InvalidArgument(format!("orientation {k} out of range 0..=3")));
    }
    Ok(Isometry2::rotation_cw(k, BOTTOM_CENTER))
}

pub fn oriented_block(k: u8) -> Result<TriMesh> {
    let iso = orientation_isometry(k)?.extend3();
    Ok(versatile_block().mesh.map_vertices(|v| iso.apply(v)))
}

/// Direction from the bottom-square centre towards the side carrying the top
/// rectangle, for orientation `k`.
pub fn rectangle_direction(k: u8) -> [f64; 2] {
    Isometry2::rotation_cw(k % 4, [0.0, 0.0]).apply_linear([-1.0, 0.0])
}

/// Orientation whose rectangle direction is `d` (unit, axis-aligned).
pub fn orientation_from_direction(d: [f64; 2]) -> Option<u8> {
    (0..4u8).find(|&k| {
        let r = rectangle_direction(k);
        (r[0] - d[0]).abs() < 1e-9 && (r[1] - d[1]).abs() < 1e-9
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::collections::BTreeSet;

    fn point_set(m: &TriMesh) -> Vec<[i64; 3]> {
        let mut v: Vec<[i64; 3]> = m
            .vertices
            .iter()
            .map(|p| p.map(|x| (x * 1e12).round() as i64))
            .collect();
        v.sort();
        v
    }

    #[test]
    fn published_counts_and_coordinates() {
        let b = versatile_block();
        assert_eq!(b.mesh.vertices.len(), 9);
        assert_eq!(b.mesh.triangles.len(), 14);
        assert_eq!(b.mesh.edges().len(), 21);
        assert_eq!(b.mesh.vertices[6], [1.0, 0.0, 1.0]);
        assert!(b.mesh.vertices.iter().all(|v| v[2] == 0.0 || v[2] == 1.0));
    }

    #[test]
    fn edge_and_face_sets_match_published_lists() {
        let b = versatile_block();
        let edges: BTreeSet<(usize, usize)> = EDGES.iter().map(|e| (e[0] - 1, e[1] - 1)).collect();
        assert_eq!(b.mesh.edges(), edges);
        let faces: BTreeSet<[usize; 3]> = b
            .mesh
            .triangles
            .iter()
            .map(|t| {
                let mut s = *t;
                s.sort();
                s
            })
            .collect();
        let published: BTreeSet<[usize; 3]> = FACES.iter().map(|f| [f[0] - 1, f[1] - 1, f[2] - 1]).collect();
        assert_eq!(faces, published);
    }

    #[test]
    fn mesh_invariants() {
        let b = versatile_block();
        b.mesh.validate().unwrap();
        assert_eq!(b.mesh.euler_characteristic(), 2);
        assert!((b.mesh.signed_volume() - 2.0).abs() < 1e-12);
        assert!((b.bottom_area() - 2.0).abs() < 1e-12);
        assert!((b.top_area() - 2.0).abs() < 1e-12);
        for f in b.bottom_square {
            assert!(b.mesh.triangle(f).iter().all(|v| v[2] == 0.0));
        }
        for f in b.top_rectangle {
            assert!(b.mesh.triangle(f).iter().all(|v| v[2] == 1.0));
        }
    }

    #[test]
    fn constant_cross_section() {
        let b = versatile_block();
        for z in [0.1, 0.25, 0.37, 0.5, 0.75, 0.9] {
            assert!((b.mesh.cross_section_area(z).unwrap() - 2.0).abs() < 1e-9, "z = {z}");
        }
    }

    #[test]
    fn orientation_examples() {
        assert_eq!(oriented_block(0).unwrap(), versatile_block().mesh);
        assert!(oriented_block(4).is_err());
        let half = oriented_block(2).unwrap();
        assert_eq!(half.vertices[2], [0.0, 0.0, 0.0]);
        for k in 0..4 {
            let m = oriented_block(k).unwrap();
            m.validate().unwrap();
            assert!((m.signed_volume() - 2.0).abs() < 1e-12);
            assert!((m.cross_section_area(0.6).unwrap() - 2.0).abs() < 1e-9);
        }
    }

    #[test]
    fn rotations_cycle_and_share_bottom_square() {
        let quarter = Isometry2::rotation_cw(1, BOTTOM_CENTER).extend3();
        let square: Vec<[i64; 3]> = {
            let mut v: Vec<[i64; 3]> = [[0.0, 0.0], [1.0, 1.0], [2.0, 0.0], [1.0, -1.0]]
                .iter()
                .map(|p| [p[0], p[1], 0.0f64].map(|x| (x * 1e12).round() as i64))
                .collect();
            v.sort();
            v
        };
        for k in 0..4u8 {
            let m = oriented_block(k).unwrap();
            let next = oriented_block((k + 1) % 4).unwrap();
            assert_eq!(point_set(&m.map_vertices(|v| quarter.apply(v))), point_set(&next));
            let mut bottom: Vec<[i64; 3]> = point_set(&m).into_iter().filter(|p| p[2] == 0).collect();
            bottom.sort();
            assert_eq!(bottom, square);
        }
    }

    #[test]
    fn rectangle_directions() {
        assert_eq!(rectangle_direction(0), [-1.0, 0.0]);
        assert_eq!(rectangle_direction(1), [0.0, 1.0]);
        for k in 0..4 {
            assert_eq!(orientation_from_direction(rectangle_direction(k)), Some(k));
        }
    }
}
