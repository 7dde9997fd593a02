//! Convex clipping of tetrahedra, used for exact intersection volumes.

use super::{cross, det3, dot, sub, TriMesh, Vec3};

pub(super) struct Tet {
    pub sign: f64,
    /// Half-spaces `n·x <= c` whose intersection is the tetrahedron.
    planes: [(Vec3, f64); 4],
    lo: Vec3,
    hi: Vec3,
}

/// Signed decomposition of the solid: tetrahedra from the vertex centroid to
/// every triangle. Degenerate ones are dropped.
pub(super) fn signed_tets(mesh: &TriMesh) -> Vec<Tet> {
    let n = mesh.vertices.len() as f64;
    let mut apex = [0.0; 3];
    for v in &mesh.vertices {
        for k in 0..3 {
            apex[k] += v[k] / n;
        }
    }
    let mut out = Vec::with_capacity(mesh.triangles.len());
    for [a, b, c] in mesh.triangle_soup() {
        let vol6 = det3(sub(a, apex), sub(b, apex), sub(c, apex));
        let scale = dot(sub(a, apex), sub(a, apex)).max(1e-300).powf(1.5);
        if vol6.abs() <= 1e-14 * scale {
            continue;
        }
        let vertices = [apex, a, b, c];
        let mut planes = [([0.0; 3], 0.0); 4];
        for (k, plane) in planes.iter_mut().enumerate() {
            let f: Vec<Vec3> = (0..4).filter(|&i| i != k).map(|i| vertices[i]).collect();
            let mut nrm = cross(sub(f[1], f[0]), sub(f[2], f[0]));
            let mut off = dot(nrm, f[0]);
            if dot(nrm, vertices[k]) > off {
                nrm = [-nrm[0], -nrm[1], -nrm[2]];
                off = -off;
            }
            *plane = (nrm, off);
        }
        let mut lo = [f64::INFINITY; 3];
        let mut hi = [f64::NEG_INFINITY; 3];
        for v in &vertices {
            for k in 0..3 {
                lo[k] = lo[k].min(v[k]);
                hi[k] = hi[k].max(v[k]);
            }
        }
        out.push(Tet {
            sign: vol6.signum(),
            planes,
            lo,
            hi,
        });
    }
    out
}

/// Volume of `a ∩ b`, both convex.
///
/// The intersection is the polytope cut out by the eight half-spaces. Its
/// vertices are the feasible triple-plane intersections, and each face is the
/// set of vertices on one plane, so no topology is tracked and degenerate
/// contacts cannot corrupt the result.
pub(super) fn tet_intersection_volume(a: &Tet, b: &Tet) -> f64 {
    if (0..3).any(|k| a.hi[k] <= b.lo[k] || b.hi[k] <= a.lo[k]) {
        return 0.0;
    }
    let size = (0..3).map(|k| a.hi[k] - a.lo[k]).fold(0.0, f64::max);
    let eps = 1e-10 * size.max(1e-300);
    let mut planes: Vec<(Vec3, f64)> = Vec::with_capacity(8);
    for &(n, c) in a.planes.iter().chain(b.planes.iter()) {
        let l = dot(n, n).sqrt();
        let p = ([n[0] / l, n[1] / l, n[2] / l], c / l);
        let same = |q: &(Vec3, f64)| (0..3).all(|k| (q.0[k] - p.0[k]).abs() <= 1e-12) && (q.1 - p.1).abs() <= eps;
        if !planes.iter().any(same) {
            planes.push(p);
        }
    }

    let mut pts: Vec<Vec3> = Vec::new();
    for i in 0..planes.len() {
        for j in i + 1..planes.len() {
            for k in j + 1..planes.len() {
                let Some(p) = solve3(planes[i], planes[j], planes[k]) else { continue };
                let feasible = planes.iter().all(|&(n, c)| dot(n, p) - c <= eps);
                if feasible && !pts.iter().any(|q| (0..3).all(|t| (q[t] - p[t]).abs() <= eps)) {
                    pts.push(p);
                }
            }
        }
    }
    if pts.len() < 4 {
        return 0.0;
    }
    let m = pts.len() as f64;
    let mut ctr = [0.0; 3];
    for p in &pts {
        for k in 0..3 {
            ctr[k] += p[k] / m;
        }
    }
    let mut vol = 0.0;
    for &(n, c) in &planes {
        let face: Vec<Vec3> = pts.iter().copied().filter(|&p| (dot(n, p) - c).abs() <= eps).collect();
        if face.len() < 3 {
            continue;
        }
        let height = c - dot(n, ctr);
        if height <= eps {
            continue;
        }
        vol += polygon_area(&order_planar(face, n), n) * height / 3.0;
    }
    vol
}

/// Intersection point of three planes, if they meet in one point.
fn solve3(a: (Vec3, f64), b: (Vec3, f64), c: (Vec3, f64)) -> Option<Vec3> {
    let d = det3(a.0, b.0, c.0);
    if d.abs() < 1e-12 {
        return None;
    }
    let bc = cross(b.0, c.0);
    let ca = cross(c.0, a.0);
    let ab = cross(a.0, b.0);
    Some([0, 1, 2].map(|k| (a.1 * bc[k] + b.1 * ca[k] + c.1 * ab[k]) / d))
}

fn polygon_area(poly: &[Vec3], n: Vec3) -> f64 {
    let mut s = [0.0; 3];
    for i in 0..poly.len() {
        let c = cross(poly[i], poly[(i + 1) % poly.len()]);
        for k in 0..3 {
            s[k] += c[k];
        }
    }
    dot(s, n).abs() / 2.0
}

/// Orders coplanar points of a convex polygon by angle about their centroid.
fn order_planar(mut pts: Vec<Vec3>, n: Vec3) -> Vec<Vec3> {
    let m = pts.len() as f64;
    let mut ctr = [0.0; 3];
    for p in &pts {
        for k in 0..3 {
            ctr[k] += p[k] / m;
        }
    }
    let helper = if n[0].abs() < 0.9 { [1.0, 0.0, 0.0] } else { [0.0, 1.0, 0.0] };
    let u = cross(n, helper);
    let w = cross(n, u);
    pts.sort_by(|a, b| {
        let da = sub(*a, ctr);
        let db = sub(*b, ctr);
        let ta = dot(da, w).atan2(dot(da, u));
        let tb = dot(db, w).atan2(dot(db, u));
        ta.total_cmp(&tb)
    });
    pts
}

