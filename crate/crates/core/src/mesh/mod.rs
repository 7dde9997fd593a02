//! Indexed triangle meshes with the geometric predicates needed by the
//! assembly and blocking modules.

mod clip;
pub mod obj;
pub mod stl;

use std::collections::{BTreeSet, HashMap, VecDeque};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::{Error, Result};

pub type Vec3 = [f64; 3];

/// Default minimum intersection volume counted as overlap.
pub const DEFAULT_OVERLAP_TOL: f64 = 1e-9;

/// Closed triangle mesh; triangles are counter-clockwise seen from outside.
#[derive(Debug, Clone, PartialEq)]
pub struct TriMesh {
    pub vertices: Vec<Vec3>,
    pub triangles: Vec<[usize; 3]>,
}

impl TriMesh {
    /// Builds a mesh, checking only that indices are in range.
    pub fn new(vertices: Vec<Vec3>, triangles: Vec<[usize; 3]>) -> Result<Self> {
        if let Some(t) = triangles.iter().find(|t| t.iter().any(|&i| i >= vertices.len())) {
            return Err(Error::InvalidMesh(format!("triangle {t:?} indexes past {} vertices", vertices.len())));
        }
        Ok(TriMesh { vertices, triangles })
    }

    /// Orients an unoriented face list consistently by propagation across
    /// shared edges, then flips everything if the enclosed volume is negative.
    pub fn from_unoriented(vertices: Vec<Vec3>, faces: Vec<[usize; 3]>) -> Result<Self> {
        let mut mesh = TriMesh::new(vertices, faces)?;
        let mut by_edge: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (f, t) in mesh.triangles.iter().enumerate() {
            for (a, b) in tri_edges(t) {
                by_edge.entry(undirected(a, b)).or_default().push(f);
            }
        }
        let n = mesh.triangles.len();
        let mut done = vec![false; n];
        for seed in 0..n {
            if done[seed] {
                continue;
            }
            done[seed] = true;
            let mut queue = VecDeque::from([seed]);
            while let Some(f) = queue.pop_front() {
                let t = mesh.triangles[f];
                for (a, b) in tri_edges(&t) {
                    for &g in &by_edge[&undirected(a, b)] {
                        if g == f || done[g] {
                            continue;
                        }
                        // neighbour must traverse the shared edge as b -> a
                        let u = mesh.triangles[g];
                        if tri_edges(&u).any(|e| e == (a, b)) {
                            mesh.triangles[g] = [u[0], u[2], u[1]];
                        }
                        done[g] = true;
                        queue.push_back(g);
                    }
                }
            }
        }
        if mesh.signed_volume() < 0.0 {
            for t in &mut mesh.triangles {
                t.swap(1, 2);
            }
        }
        Ok(mesh)
    }

    /// Unit cube `[0,1]³`, 8 vertices and 12 triangles.
    pub fn unit_cube() -> Self {
        let v = vec![
            [0.0, 0.0, 0.0],
            [1.0, 0.0, 0.0],
            [1.0, 1.0, 0.0],
            [0.0, 1.0, 0.0],
            [0.0, 0.0, 1.0],
            [1.0, 0.0, 1.0],
            [1.0, 1.0, 1.0],
            [0.0, 1.0, 1.0],
        ];
        let t = vec![
            [0, 2, 1],
            [0, 3, 2],
            [4, 5, 6],
            [4, 6, 7],
            [0, 1, 5],
            [0, 5, 4],
            [1, 2, 6],
            [1, 6, 5],
            [2, 3, 7],
            [2, 7, 6],
            [3, 0, 4],
            [3, 4, 7],
        ];
        TriMesh { vertices: v, triangles: t }
    }

    pub fn regular_tetrahedron() -> Self {
        let v = vec![[1.0, 1.0, 1.0], [1.0, -1.0, -1.0], [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]];
        TriMesh::from_unoriented(v, vec![[0, 1, 2], [0, 1, 3], [0, 2, 3], [1, 2, 3]])
            .expect("static tetrahedron")
    }

    pub fn edges(&self) -> BTreeSet<(usize, usize)> {
        self.triangles
            .iter()
            .flat_map(|t| tri_edges(t).map(|(a, b)| undirected(a, b)))
            .collect()
    }

    pub fn euler_characteristic(&self) -> i64 {
        self.vertices.len() as i64 - self.edges().len() as i64 + self.triangles.len() as i64
    }

    /// Every undirected edge is shared by exactly two triangles.
    pub fn is_watertight(&self) -> bool {
        let mut count: HashMap<(usize, usize), usize> = HashMap::new();
        for t in &self.triangles {
            for (a, b) in tri_edges(t) {
                *count.entry(undirected(a, b)).or_default() += 1;
            }
        }
        count.values().all(|&c| c == 2)
    }

    /// Every directed edge appears once, so shared edges run in opposite
    /// directions.
    pub fn is_consistently_oriented(&self) -> bool {
        let mut seen = BTreeSet::new();
        self.triangles
            .iter()
            .flat_map(tri_edges)
            .all(|e| seen.insert(e))
    }

    /// Full validity: watertight, consistently oriented, positive volume.
    pub fn validate(&self) -> Result<()> {
        if !self.is_watertight() {
            return Err(Error::InvalidMesh("mesh is not watertight".into()));
        }
        if !self.is_consistently_oriented() {
            return Err(Error::InvalidMesh("inconsistent triangle orientation".into()));
        }
        if self.signed_volume() <= 0.0 {
            return Err(Error::InvalidMesh("non-positive signed volume".into()));
        }
        Ok(())
    }

    pub fn triangle(&self, i: usize) -> [Vec3; 3] {
        let t = self.triangles[i];
        [self.vertices[t[0]], self.vertices[t[1]], self.vertices[t[2]]]
    }

    pub fn triangle_soup(&self) -> impl Iterator<Item = [Vec3; 3]> + '_ {
        (0..self.triangles.len()).map(|i| self.triangle(i))
    }

    pub fn signed_volume(&self) -> f64 {
        self.triangle_soup().map(|[a, b, c]| det3(a, b, c)).sum::<f64>() / 6.0
    }

    pub fn bounding_box(&self) -> (Vec3, Vec3) {
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &self.vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        (lo, hi)
    }

    /// Area of the slice `z = const`, by Green's theorem over the oriented
    /// triangle/plane intersection segments.
    pub fn cross_section_area(&self, z: f64) -> Result<f64> {
        const PLANE_TOL: f64 = 1e-12;
        let (lo, hi) = self.bounding_box();
        if !(z > lo[2] && z < hi[2]) || self.vertices.iter().any(|v| (v[2] - z).abs() <= PLANE_TOL) {
            return Err(Error::DegenerateSlice(z));
        }
        let mut twice_area = 0.0;
        for tri in self.triangle_soup() {
            let mut pts = Vec::with_capacity(2);
            for k in 0..3 {
                let (p, q) = (tri[k], tri[(k + 1) % 3]);
                if (p[2] - z) * (q[2] - z) < 0.0 {
                    let s = (z - p[2]) / (q[2] - p[2]);
                    pts.push([p[0] + s * (q[0] - p[0]), p[1] + s * (q[1] - p[1])]);
                }
            }
            if pts.len() != 2 {
                continue;
            }
            // boundary runs along e_z × n so that the section lies on its left
            let n = normal(&tri);
            let dir = [-n[1], n[0]];
            let (mut a, mut b) = (pts[0], pts[1]);
            if (b[0] - a[0]) * dir[0] + (b[1] - a[1]) * dir[1] < 0.0 {
                std::mem::swap(&mut a, &mut b);
            }
            twice_area += a[0] * b[1] - b[0] * a[1];
        }
        Ok(twice_area / 2.0)
    }

    pub fn translate(&self, d: Vec3) -> TriMesh {
        self.map_vertices(|v| [v[0] + d[0], v[1] + d[1], v[2] + d[2]])
    }

    pub fn scale(&self, a: f64, b: f64, c: f64) -> Result<TriMesh> {
        if !(a > 0.0 && b > 0.0 && c > 0.0) {
            return Err(Error::InvalidArgument(format!(
                "scale factors must be positive, got ({a}, {b}, {c})"
            )));
        }
        Ok(self.map_vertices(|v| [a * v[0], b * v[1], c * v[2]]))
    }

    /// Applies a vertex map that must preserve orientation.
    pub fn map_vertices(&self, f: impl Fn(Vec3) -> Vec3) -> TriMesh {
        TriMesh {
            vertices: self.vertices.iter().map(|&v| f(v)).collect(),
            triangles: self.triangles.clone(),
        }
    }

    /// Ray-parity point-in-mesh test. Rays are cast along pseudo-random
    /// directions and recast whenever they graze an edge or vertex.
    pub fn contains_point(&self, p: Vec3) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(0x5eed_1234);
        'retry: for _ in 0..64 {
            let dir = loop {
                let d: Vec3 = [rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0)];
                let n = dot(d, d).sqrt();
                if n > 0.1 && n <= 1.0 {
                    break [d[0] / n, d[1] / n, d[2] / n];
                }
            };
            let mut hits = 0usize;
            for tri in self.triangle_soup() {
                match ray_triangle(p, dir, &tri) {
                    RayHit::Miss => {}
                    RayHit::Hit => hits += 1,
                    RayHit::Ambiguous => continue 'retry,
                }
            }
            return hits % 2 == 1;
        }
        false
    }

    /// Volume of the intersection of the two enclosed solids.
    ///
    /// Each solid is the signed sum of the tetrahedra spanned by a reference
    /// point and its triangles, so the intersection volume is the signed sum
    /// of pairwise convex tetrahedron intersections.
    pub fn intersection_volume(&self, other: &TriMesh) -> f64 {
        let (alo, ahi) = self.bounding_box();
        let (blo, bhi) = other.bounding_box();
        if (0..3).any(|k| ahi[k] <= blo[k] || bhi[k] <= alo[k]) {
            return 0.0;
        }
        let ta = clip::signed_tets(self);
        let tb = clip::signed_tets(other);
        let mut total = 0.0;
        for a in &ta {
            for b in &tb {
                total += a.sign * b.sign * clip::tet_intersection_volume(a, b);
            }
        }
        total
    }

    /// `true` iff the interiors overlap by more than `tol` (intersection
    /// volume). Surface contact alone is not overlap.
    pub fn overlaps(&self, other: &TriMesh, tol: f64) -> bool {
        self.intersection_volume(other) > tol
    }

    /// Minimum Euclidean distance between the two surfaces, assuming they do
    /// not intersect.
    pub fn surface_distance(&self, other: &TriMesh) -> f64 {
        let mut best = f64::INFINITY;
        for a in self.triangle_soup() {
            for b in other.triangle_soup() {
                best = best.min(triangle_distance(&a, &b));
            }
        }
        best
    }

    /// Welds an STL-style triangle soup back into an indexed mesh, merging
    /// bit-identical vertices.
    pub fn from_soup(soup: &[[[f32; 3]; 3]]) -> TriMesh {
        let mut index: HashMap<[u32; 3], usize> = HashMap::new();
        let mut vertices = Vec::new();
        let mut triangles = Vec::with_capacity(soup.len());
        for tri in soup {
            let mut t = [0usize; 3];
            for (k, v) in tri.iter().enumerate() {
                let key = [v[0].to_bits(), v[1].to_bits(), v[2].to_bits()];
                t[k] = *index.entry(key).or_insert_with(|| {
                    vertices.push([v[0] as f64, v[1] as f64, v[2] as f64]);
                    vertices.len() - 1
                });
            }
            triangles.push(t);
        }
        TriMesh { vertices, triangles }
    }
}

pub fn euler_characteristic(m: &TriMesh) -> i64 {
    m.euler_characteristic()
}

pub fn signed_volume(m: &TriMesh) -> f64 {
    m.signed_volume()
}

pub fn cross_section_area(m: &TriMesh, z: f64) -> Result<f64> {
    m.cross_section_area(z)
}

pub fn overlap(a: &TriMesh, b: &TriMesh, tol: f64) -> bool {
    a.overlaps(b, tol)
}

fn tri_edges(t: &[usize; 3]) -> impl Iterator<Item = (usize, usize)> + '_ {
    (0..3).map(move |k| (t[k], t[(k + 1) % 3]))
}

fn undirected(a: usize, b: usize) -> (usize, usize) {
    (a.min(b), a.max(b))
}

pub(crate) fn sub(a: Vec3, b: Vec3) -> Vec3 {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

pub(crate) fn dot(a: Vec3, b: Vec3) -> f64 {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross(a: Vec3, b: Vec3) -> Vec3 {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

pub(crate) fn det3(a: Vec3, b: Vec3, c: Vec3) -> f64 {
    dot(a, cross(b, c))
}

/// Unnormalised outward normal of a counter-clockwise triangle.
pub fn normal(t: &[Vec3; 3]) -> Vec3 {
    cross(sub(t[1], t[0]), sub(t[2], t[0]))
}

enum RayHit {
    Miss,
    Hit,
    Ambiguous,
}

fn ray_triangle(origin: Vec3, dir: Vec3, t: &[Vec3; 3]) -> RayHit {
    const GRAZE: f64 = 1e-9;
    let e1 = sub(t[1], t[0]);
    let e2 = sub(t[2], t[0]);
    let p = cross(dir, e2);
    let det = dot(e1, p);
    let scale = dot(e1, e1).sqrt() * dot(e2, e2).sqrt();
    if det.abs() <= 1e-12 * scale {
        return RayHit::Miss;
    }
    let inv = 1.0 / det;
    let s = sub(origin, t[0]);
    let u = dot(s, p) * inv;
    let q = cross(s, e1);
    let v = dot(dir, q) * inv;
    let dist = dot(e2, q) * inv;
    if u < -GRAZE || v < -GRAZE || u + v > 1.0 + GRAZE || dist < -GRAZE {
        return RayHit::Miss;
    }
    if u < GRAZE || v < GRAZE || u + v > 1.0 - GRAZE || dist < GRAZE {
        return RayHit::Ambiguous;
    }
    RayHit::Hit
}

fn point_segment_distance(p: Vec3, a: Vec3, b: Vec3) -> f64 {
    let ab = sub(b, a);
    let len2 = dot(ab, ab);
    let s = if len2 > 0.0 { (dot(sub(p, a), ab) / len2).clamp(0.0, 1.0) } else { 0.0 };
    let c = [a[0] + s * ab[0], a[1] + s * ab[1], a[2] + s * ab[2]];
    let d = sub(p, c);
    dot(d, d).sqrt()
}

fn point_triangle_distance(p: Vec3, t: &[Vec3; 3]) -> f64 {
    let n = normal(t);
    let nn = dot(n, n);
    if nn > 0.0 {
        let h = dot(sub(p, t[0]), n) / nn;
        let q = [p[0] - h * n[0], p[1] - h * n[1], p[2] - h * n[2]];
        let inside = (0..3).all(|k| dot(cross(sub(t[(k + 1) % 3], t[k]), sub(q, t[k])), n) >= 0.0);
        if inside {
            return h.abs() * nn.sqrt();
        }
    }
    (0..3)
        .map(|k| point_segment_distance(p, t[k], t[(k + 1) % 3]))
        .fold(f64::INFINITY, f64::min)
}

fn segment_segment_distance(p1: Vec3, q1: Vec3, p2: Vec3, q2: Vec3) -> f64 {
    let d1 = sub(q1, p1);
    let d2 = sub(q2, p2);
    let r = sub(p1, p2);
    let a = dot(d1, d1);
    let e = dot(d2, d2);
    let f = dot(d2, r);
    let (s, t);
    if a <= 1e-30 && e <= 1e-30 {
        let d = sub(p1, p2);
        return dot(d, d).sqrt();
    }
    if a <= 1e-30 {
        s = 0.0;
        t = (f / e).clamp(0.0, 1.0);
    } else {
        let c = dot(d1, r);
        if e <= 1e-30 {
            t = 0.0;
            s = (-c / a).clamp(0.0, 1.0);
        } else {
            let b = dot(d1, d2);
            let denom = a * e - b * b;
            let mut s0 = if denom > 1e-30 { ((b * f - c * e) / denom).clamp(0.0, 1.0) } else { 0.0 };
            let mut t0 = (b * s0 + f) / e;
            if t0 < 0.0 {
                t0 = 0.0;
                s0 = (-c / a).clamp(0.0, 1.0);
            } else if t0 > 1.0 {
                t0 = 1.0;
                s0 = ((b - c) / a).clamp(0.0, 1.0);
            }
            s = s0;
            t = t0;
        }
    }
    let c1 = [p1[0] + s * d1[0], p1[1] + s * d1[1], p1[2] + s * d1[2]];
    let c2 = [p2[0] + t * d2[0], p2[1] + t * d2[1], p2[2] + t * d2[2]];
    let d = sub(c1, c2);
    dot(d, d).sqrt()
}

/// Distance between two non-intersecting triangles.
fn triangle_distance(a: &[Vec3; 3], b: &[Vec3; 3]) -> f64 {
    let mut best = f64::INFINITY;
    for k in 0..3 {
        best = best.min(point_triangle_distance(a[k], b));
        best = best.min(point_triangle_distance(b[k], a));
        for l in 0..3 {
            best = best.min(segment_segment_distance(a[k], a[(k + 1) % 3], b[l], b[(l + 1) % 3]));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cube_and_tetrahedron_basics() {
        let c = TriMesh::unit_cube();
        c.validate().unwrap();
        assert_eq!(c.edges().len(), 18);
        assert_eq!(c.euler_characteristic(), 2);
        assert!((c.signed_volume() - 1.0).abs() < 1e-15);
        assert!((c.cross_section_area(0.5).unwrap() - 1.0).abs() < 1e-15);

        let t = TriMesh::regular_tetrahedron();
        t.validate().unwrap();
        assert_eq!(t.euler_characteristic(), 2);
        assert!((t.signed_volume() - 8.0 / 3.0).abs() < 1e-12);
    }

    #[test]
    fn degenerate_slices_rejected() {
        let c = TriMesh::unit_cube();
        assert!(matches!(c.cross_section_area(0.0), Err(Error::DegenerateSlice(_))));
        assert!(matches!(c.cross_section_area(1.0), Err(Error::DegenerateSlice(_))));
        assert!(matches!(c.cross_section_area(1.5), Err(Error::DegenerateSlice(_))));
    }

    #[test]
    fn scale_and_translate() {
        let c = TriMesh::unit_cube();
        assert_eq!(c.scale(1.0, 1.0, 1.0).unwrap(), c);
        assert!(c.scale(0.0, 1.0, 1.0).is_err());
        assert!(c.scale(1.0, -2.0, 1.0).is_err());
        let s = c.scale(2.0, 3.0, 0.5).unwrap();
        assert!((s.signed_volume() - 3.0).abs() < 1e-12);
        s.validate().unwrap();
        let eps = 1e-3;
        let back = c.translate([0.0, 0.0, -eps]).translate([0.0, 0.0, eps]);
        for (a, b) in back.vertices.iter().zip(&c.vertices) {
            for k in 0..3 {
                assert!((a[k] - b[k]).abs() <= 1e-15);
            }
        }
    }

    #[test]
    fn touching_cubes_do_not_overlap() {
        let a = TriMesh::unit_cube();
        let b = a.translate([1.0, 0.0, 0.0]);
        assert!(!overlap(&a, &b, 1e-6));
        assert!(!overlap(&b, &a, 1e-6));
        assert!(a.intersection_volume(&b).abs() < 1e-12);
    }

    #[test]
    fn shifted_cubes_overlap() {
        let a = TriMesh::unit_cube();
        let b = a.translate([0.5, 0.0, 0.0]);
        assert!(overlap(&a, &b, 1e-9));
        assert!((a.intersection_volume(&b) - 0.5).abs() < 1e-12);
        let c = a.translate([0.3, 0.2, -0.1]);
        assert!((a.intersection_volume(&c) - 0.7 * 0.8 * 0.9).abs() < 1e-12);
    }

    #[test]
    fn far_meshes_do_not_overlap() {
        let a = TriMesh::unit_cube();
        assert_eq!(a.intersection_volume(&a.translate([5.0, 0.0, 0.0])), 0.0);
    }

    #[test]
    fn point_in_cube() {
        let c = TriMesh::unit_cube();
        assert!(c.contains_point([0.5, 0.5, 0.5]));
        assert!(c.contains_point([0.01, 0.99, 0.5]));
        assert!(!c.contains_point([1.5, 0.5, 0.5]));
        assert!(!c.contains_point([0.5, 0.5, -0.01]));
    }

    #[test]
    fn surface_distance_of_separated_cubes() {
        let a = TriMesh::unit_cube();
        let b = a.translate([1.25, 0.0, 0.0]);
        assert!((a.surface_distance(&b) - 0.25).abs() < 1e-12);
        let c = a.translate([2.0, 2.0, 0.0]);
        assert!((a.surface_distance(&c) - 2f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn orientation_repair_from_scrambled_faces() {
        let mut c = TriMesh::unit_cube();
        for t in c.triangles.iter_mut().step_by(3) {
            t.swap(0, 1);
        }
        let fixed = TriMesh::from_unoriented(c.vertices.clone(), c.triangles.clone()).unwrap();
        fixed.validate().unwrap();
    }

    #[test]
    fn out_of_range_index_rejected() {
        assert!(TriMesh::new(vec![[0.0; 3]], vec![[0, 0, 1]]).is_err());
    }
}
