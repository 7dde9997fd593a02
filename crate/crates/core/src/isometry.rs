//! Planar isometries, their z-preserving extension to 3-space, and the three
//! wallpaper groups used to generate assemblies.

use std::collections::{HashSet, VecDeque};

use serde::{Deserialize, Serialize};

pub type Vec2 = [f64; 2];
pub type Mat2 = [[f64; 2]; 2];

const ORTHO_TOL: f64 = 1e-12;
const KEY_SCALE: f64 = 1e9;

/// A rigid motion `x ↦ M·x + v` of the plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isometry2 {
    pub matrix: Mat2,
    pub offset: Vec2,
}

impl Isometry2 {
    pub const IDENTITY: Isometry2 = Isometry2 {
        matrix: [[1.0, 0.0], [0.0, 1.0]],
        offset: [0.0, 0.0],
    };

    /// Builds an isometry, rejecting matrices that are not orthogonal.
    pub fn new(matrix: Mat2, offset: Vec2) -> crate::Result<Self> {
        let iso = Isometry2 { matrix, offset };
        if !iso.is_valid() {
            return Err(crate::Error::InvalidArgument(format!(
                "matrix {matrix:?} is not orthogonal"
            )));
        }
        Ok(iso)
    }

    pub fn translation(offset: Vec2) -> Self {
        Isometry2 {
            matrix: Self::IDENTITY.matrix,
            offset,
        }
    }

    /// Rotation by `quarter_turns · 90°` clockwise (seen from +z) about `center`.
    pub fn rotation_cw(quarter_turns: u8, center: Vec2) -> Self {
        let matrix = match quarter_turns % 4 {
            0 => [[1.0, 0.0], [0.0, 1.0]],
            1 => [[0.0, 1.0], [-1.0, 0.0]],
            2 => [[-1.0, 0.0], [0.0, -1.0]],
            _ => [[0.0, -1.0], [1.0, 0.0]],
        };
        let mc = mat_vec(&matrix, center);
        Isometry2 {
            matrix,
            offset: [center[0] - mc[0], center[1] - mc[1]],
        }
    }

    pub fn is_valid(&self) -> bool {
        let m = &self.matrix;
        let mtm = [
            [
                m[0][0] * m[0][0] + m[1][0] * m[1][0],
                m[0][0] * m[0][1] + m[1][0] * m[1][1],
            ],
            [
                m[0][1] * m[0][0] + m[1][1] * m[1][0],
                m[0][1] * m[0][1] + m[1][1] * m[1][1],
            ],
        ];
        let ortho = (mtm[0][0] - 1.0).abs() <= ORTHO_TOL
            && (mtm[1][1] - 1.0).abs() <= ORTHO_TOL
            && mtm[0][1].abs() <= ORTHO_TOL
            && mtm[1][0].abs() <= ORTHO_TOL;
        ortho && (self.det().abs() - 1.0).abs() <= ORTHO_TOL && self.offset.iter().all(|v| v.is_finite())
    }

    pub fn det(&self) -> f64 {
        let m = &self.matrix;
        m[0][0] * m[1][1] - m[0][1] * m[1][0]
    }

    pub fn is_reflection(&self) -> bool {
        self.det() < 0.0
    }

    /// `self ∘ first`: apply `first`, then `self`.
    pub fn compose(&self, first: &Isometry2) -> Isometry2 {
        let matrix = mat_mul(&self.matrix, &first.matrix);
        let mv = mat_vec(&self.matrix, first.offset);
        Isometry2 {
            matrix,
            offset: [mv[0] + self.offset[0], mv[1] + self.offset[1]],
        }
    }

    pub fn inverse(&self) -> Isometry2 {
        let m = &self.matrix;
        let mt = [[m[0][0], m[1][0]], [m[0][1], m[1][1]]];
        let v = mat_vec(&mt, self.offset);
        Isometry2 {
            matrix: mt,
            offset: [-v[0], -v[1]],
        }
    }

    pub fn apply(&self, p: Vec2) -> Vec2 {
        let mp = mat_vec(&self.matrix, p);
        [mp[0] + self.offset[0], mp[1] + self.offset[1]]
    }

    /// Applies only the linear part (directions, not points).
    pub fn apply_linear(&self, d: Vec2) -> Vec2 {
        mat_vec(&self.matrix, d)
    }

    pub fn extend3(&self) -> Isometry3 {
        Isometry3 { planar: *self }
    }

    /// Signed angle in degrees: rotation angle for proper rotations, mirror
    /// parameter `θ` of `(cos θ, sin θ; sin θ, −cos θ)` for reflections.
    pub fn angle_degrees(&self) -> f64 {
        self.matrix[1][0].atan2(self.matrix[0][0]).to_degrees()
    }

    fn key(&self) -> [i64; 6] {
        let r = |x: f64| (x * KEY_SCALE).round() as i64;
        [
            r(self.matrix[0][0]),
            r(self.matrix[0][1]),
            r(self.matrix[1][0]),
            r(self.matrix[1][1]),
            r(self.offset[0]),
            r(self.offset[1]),
        ]
    }

    pub fn approx_eq(&self, other: &Isometry2, tol: f64) -> bool {
        self.matrix
            .iter()
            .flatten()
            .zip(other.matrix.iter().flatten())
            .chain(self.offset.iter().zip(other.offset.iter()))
            .all(|(a, b)| (a - b).abs() <= tol)
    }
}

/// Free function form of [`Isometry2::compose`]: returns `second ∘ first`.
pub fn compose(second: &Isometry2, first: &Isometry2) -> Isometry2 {
    second.compose(first)
}

pub fn apply2(iso: &Isometry2, p: Vec2) -> Vec2 {
    iso.apply(p)
}

pub fn extend3(iso: &Isometry2) -> Isometry3 {
    iso.extend3()
}

/// Extension of a planar isometry to 3-space that keeps the z-coordinate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Isometry3 {
    pub planar: Isometry2,
}

impl Isometry3 {
    pub fn apply(&self, p: [f64; 3]) -> [f64; 3] {
        let q = self.planar.apply([p[0], p[1]]);
        [q[0], q[1], p[2]]
    }

    pub fn compose(&self, first: &Isometry3) -> Isometry3 {
        Isometry3 {
            planar: self.planar.compose(&first.planar),
        }
    }

    /// 3×3 matrix part (block diagonal, z row is `e3`).
    pub fn matrix3(&self) -> [[f64; 3]; 3] {
        let m = self.planar.matrix;
        [[m[0][0], m[0][1], 0.0], [m[1][0], m[1][1], 0.0], [0.0, 0.0, 1.0]]
    }

    pub fn offset3(&self) -> [f64; 3] {
        [self.planar.offset[0], self.planar.offset[1], 0.0]
    }
}

fn mat_mul(a: &Mat2, b: &Mat2) -> Mat2 {
    [
        [
            a[0][0] * b[0][0] + a[0][1] * b[1][0],
            a[0][0] * b[0][1] + a[0][1] * b[1][1],
        ],
        [
            a[1][0] * b[0][0] + a[1][1] * b[1][0],
            a[1][0] * b[0][1] + a[1][1] * b[1][1],
        ],
    ]
}

fn mat_vec(a: &Mat2, v: Vec2) -> Vec2 {
    [a[0][0] * v[0] + a[0][1] * v[1], a[1][0] * v[0] + a[1][1] * v[1]]
}

/// Closed axis-aligned box `[lo.0, hi.0] × [lo.1, hi.1]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Window {
    pub lo: Vec2,
    pub hi: Vec2,
}

impl Window {
    pub fn new(lo: Vec2, hi: Vec2) -> Self {
        Window { lo, hi }
    }

    pub fn square(half_width: f64) -> Self {
        Window {
            lo: [-half_width, -half_width],
            hi: [half_width, half_width],
        }
    }

    pub fn is_empty(&self) -> bool {
        !(self.hi[0] > self.lo[0] && self.hi[1] > self.lo[1])
    }

    pub fn contains(&self, p: Vec2) -> bool {
        const SLACK: f64 = 1e-9;
        p[0] >= self.lo[0] - SLACK
            && p[0] <= self.hi[0] + SLACK
            && p[1] >= self.lo[1] - SLACK
            && p[1] <= self.hi[1] + SLACK
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum GroupName {
    P1,
    Pg,
    P4,
}

impl GroupName {
    pub fn as_str(self) -> &'static str {
        match self {
            GroupName::P1 => "p1",
            GroupName::Pg => "pg",
            GroupName::P4 => "p4",
        }
    }
}

impl std::str::FromStr for GroupName {
    type Err = crate::Error;

    fn from_str(s: &str) -> crate::Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "p1" => Ok(GroupName::P1),
            "pg" => Ok(GroupName::Pg),
            "p4" => Ok(GroupName::P4),
            other => Err(crate::Error::InvalidArgument(format!(
                "unknown wallpaper group {other:?} (expected p1, pg or p4)"
            ))),
        }
    }
}

impl std::fmt::Display for GroupName {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// A wallpaper group given by a finite list of generators.
#[derive(Debug, Clone, PartialEq)]
pub struct WallpaperGroup {
    pub name: GroupName,
    pub generators: Vec<Isometry2>,
}

impl WallpaperGroup {
    pub fn p1() -> Self {
        WallpaperGroup {
            name: GroupName::P1,
            generators: vec![
                Isometry2::translation([1.0, -1.0]),
                Isometry2::translation([1.0, 1.0]),
            ],
        }
    }

    pub fn pg() -> Self {
        WallpaperGroup {
            name: GroupName::Pg,
            generators: vec![
                Isometry2 {
                    matrix: [[0.0, -1.0], [-1.0, 0.0]],
                    offset: [2.0, 0.0],
                },
                Isometry2::translation([1.0, 1.0]),
            ],
        }
    }

    pub fn p4() -> Self {
        WallpaperGroup {
            name: GroupName::P4,
            generators: vec![
                Isometry2 {
                    matrix: [[0.0, 1.0], [-1.0, 0.0]],
                    offset: [0.0, 2.0],
                },
                Isometry2 {
                    matrix: [[0.0, -1.0], [1.0, 0.0]],
                    offset: [0.0, -2.0],
                },
                Isometry2 {
                    matrix: [[-1.0, 0.0], [0.0, -1.0]],
                    offset: [0.0, 0.0],
                },
            ],
        }
    }

    pub fn by_name(name: GroupName) -> Self {
        match name {
            GroupName::P1 => Self::p1(),
            GroupName::Pg => Self::pg(),
            GroupName::P4 => Self::p4(),
        }
    }

    /// The group `c ∘ G ∘ c⁻¹`.
    pub fn conjugated(&self, c: &Isometry2) -> Self {
        let inv = c.inverse();
        WallpaperGroup {
            name: self.name,
            generators: self
                .generators
                .iter()
                .map(|g| c.compose(g).compose(&inv))
                .collect(),
        }
    }

    /// The translations in the group span the plane. Generator offsets alone
    /// need not (the p4 rotations share an axis), so pure translations are
    /// collected from the elements near the origin.
    pub fn has_independent_offsets(&self) -> bool {
        let offs: Vec<Vec2> = self
            .group_elements(&Window::square(8.0))
            .into_iter()
            .filter(|g| g.matrix == Isometry2::IDENTITY.matrix)
            .map(|g| g.offset)
            .collect();
        offs.iter().enumerate().any(|(i, a)| {
            offs[i + 1..]
                .iter()
                .any(|b| (a[0] * b[1] - a[1] * b[0]).abs() > 1e-12)
        })
    }

    /// Closure of the generator matrices under multiplication, or `None` if it
    /// exceeds `limit` elements.
    pub fn point_group(&self, limit: usize) -> Option<Vec<Mat2>> {
        let key = |m: &Mat2| {
            let r = |x: f64| (x * KEY_SCALE).round() as i64;
            [r(m[0][0]), r(m[0][1]), r(m[1][0]), r(m[1][1])]
        };
        let identity = Isometry2::IDENTITY.matrix;
        let mut seen = HashSet::from([key(&identity)]);
        let mut out = vec![identity];
        let mut queue = VecDeque::from([identity]);
        while let Some(m) = queue.pop_front() {
            for g in &self.generators {
                let p = mat_mul(&g.matrix, &m);
                if seen.insert(key(&p)) {
                    if out.len() >= limit {
                        return None;
                    }
                    out.push(p);
                    queue.push_back(p);
                }
            }
        }
        out.sort_by(|a, b| cmp_f64_slices(a.as_flattened(), b.as_flattened()));
        Some(out)
    }

    /// All group elements whose offset lies in `window`, found by
    /// breadth-first closure over generators and their inverses without
    /// leaving the window. Sorted lexicographically on matrix entries, then
    /// offset.
    pub fn group_elements(&self, window: &Window) -> Vec<Isometry2> {
        if window.is_empty() {
            return Vec::new();
        }
        let mut steps = self.generators.clone();
        steps.extend(self.generators.iter().map(Isometry2::inverse));

        let start = Isometry2::IDENTITY;
        if !window.contains(start.offset) {
            return Vec::new();
        }
        let mut seen = HashSet::from([start.key()]);
        let mut out = vec![start];
        let mut queue = VecDeque::from([start]);
        while let Some(e) = queue.pop_front() {
            for s in &steps {
                let next = s.compose(&e);
                if window.contains(next.offset) && seen.insert(next.key()) {
                    out.push(next);
                    queue.push_back(next);
                }
            }
        }
        out.sort_by(|a, b| {
            cmp_f64_slices(a.matrix.as_flattened(), b.matrix.as_flattened())
                .then_with(|| cmp_f64_slices(&a.offset, &b.offset))
        });
        out
    }
}

fn cmp_f64_slices(a: &[f64], b: &[f64]) -> std::cmp::Ordering {
    a.iter()
        .zip(b)
        .map(|(x, y)| x.total_cmp(y))
        .find(|o| o.is_ne())
        .unwrap_or(std::cmp::Ordering::Equal)
}
