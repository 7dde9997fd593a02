//! Truchet-tiling encodings of planar assemblies and placement of oriented
//! blocks on the diamond lattice.
//!
//! Grid cell `(r, c)` (1-based) sits at lattice position `r·(1,−1) + c·(1,1)`.
//! Compass sides of a cell are named by grid direction: north is `r − 1`,
//! east is `c + 1`, south is `r + 1`, west is `c − 1`. In the plane these are
//! the offsets `(−1,1)`, `(1,1)`, `(1,−1)`, `(−1,−1)`.
//!
//! Each tile shows white on two adjacent sides. Orientation 0 is white on
//! north and west, and orientation `k` is orientation 0 turned `k` quarter
//! turns clockwise. The white sides are exactly the sides over which the
//! block's slanted faces overhang its neighbours, so a block pressed
//! downwards rests on the neighbours across its white sides.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::block::{self, orientation_from_direction, BOTTOM_CENTER};
use crate::isometry::{GroupName, Isometry2, Isometry3, WallpaperGroup, Window};
use crate::mesh::TriMesh;
use crate::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum Side {
    North = 0,
    East = 1,
    South = 2,
    West = 3,
}

impl Side {
    pub const ALL: [Side; 4] = [Side::North, Side::East, Side::South, Side::West];

    pub fn from_index(i: u8) -> Side {
        Side::ALL[(i % 4) as usize]
    }

    pub fn opposite(self) -> Side {
        Side::from_index(self as u8 + 2)
    }

    /// Grid step `(dr, dc)` towards this side.
    pub fn step(self) -> (isize, isize) {
        match self {
            Side::North => (-1, 0),
            Side::East => (0, 1),
            Side::South => (1, 0),
            Side::West => (0, -1),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Color {
    Black,
    White,
}

/// Colour shown by a tile of orientation `k` on `side`.
pub fn side_color(k: u8, side: Side) -> Color {
    let s = side as u8;
    if s == k % 4 || s == (k + 3) % 4 {
        Color::White
    } else {
        Color::Black
    }
}

/// The two white sides of orientation `k`, in clockwise order.
pub fn white_sides(k: u8) -> [Side; 2] {
    [Side::from_index(k + 3), Side::from_index(k)]
}

/// An `rows × cols` grid of orientations `0..=3`, row-major.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TruchetTiling {
    pub rows: usize,
    pub cols: usize,
    pub orientations: Vec<u8>,
}

impl TruchetTiling {
    pub fn new(rows: usize, cols: usize, orientations: Vec<u8>) -> Result<Self> {
        if rows == 0 || cols == 0 {
            return Err(Error::InvalidTiling("grid must have at least one row and column".into()));
        }
        if orientations.len() != rows * cols {
            return Err(Error::InvalidTiling(format!(
                "{} orientations for a {rows}×{cols} grid",
                orientations.len()
            )));
        }
        if let Some(o) = orientations.iter().find(|&&o| o > 3) {
            return Err(Error::InvalidTiling(format!("orientation {o} out of range 0..=3")));
        }
        Ok(TruchetTiling { rows, cols, orientations })
    }

    pub fn uniform(rows: usize, cols: usize, k: u8) -> Result<Self> {
        Self::new(rows, cols, vec![k; rows * cols])
    }

    /// Orientation of 1-based cell `(r, c)`.
    pub fn get(&self, r: usize, c: usize) -> u8 {
        self.orientations[(r - 1) * self.cols + (c - 1)]
    }

    pub fn len(&self) -> usize {
        self.orientations.len()
    }

    pub fn is_empty(&self) -> bool {
        self.orientations.is_empty()
    }

    /// 1-based linear index `(r−1)·cols + c`.
    pub fn linear_index(&self, r: usize, c: usize) -> usize {
        (r - 1) * self.cols + c
    }

    /// Inverse of [`Self::linear_index`].
    pub fn cell(&self, index: usize) -> (usize, usize) {
        ((index - 1) / self.cols + 1, (index - 1) % self.cols + 1)
    }

    pub fn is_frame(&self, r: usize, c: usize) -> bool {
        r == 1 || c == 1 || r == self.rows || c == self.cols
    }

    /// Neighbour of `(r, c)` across `side`, if inside the grid.
    pub fn neighbor(&self, r: usize, c: usize, side: Side) -> Option<(usize, usize)> {
        let (dr, dc) = side.step();
        let nr = r as isize + dr;
        let nc = c as isize + dc;
        (nr >= 1 && nc >= 1 && nr <= self.rows as isize && nc <= self.cols as isize).then_some((nr as usize, nc as usize))
    }

    pub fn frame_indices(&self) -> BTreeSet<usize> {
        self.cells().filter(|&(r, c)| self.is_frame(r, c)).map(|(r, c)| self.linear_index(r, c)).collect()
    }

    pub fn core_indices(&self) -> BTreeSet<usize> {
        self.cells().filter(|&(r, c)| !self.is_frame(r, c)).map(|(r, c)| self.linear_index(r, c)).collect()
    }

    pub fn cells(&self) -> impl Iterator<Item = (usize, usize)> {
        let cols = self.cols;
        (1..=self.rows).flat_map(move |r| (1..=cols).map(move |c| (r, c)))
    }

    /// Every interior edge joins a white side to a black side.
    pub fn is_valid(&self) -> bool {
        for (r, c) in self.cells() {
            let k = self.get(r, c);
            if c < self.cols && side_color(k, Side::East) == side_color(self.get(r, c + 1), Side::West) {
                return false;
            }
            if r < self.rows && side_color(k, Side::South) == side_color(self.get(r + 1, c), Side::North) {
                return false;
            }
        }
        true
    }

    pub fn ensure_valid(&self) -> Result<()> {
        if self.is_valid() {
            Ok(())
        } else {
            Err(Error::InvalidTiling("adjacent tiles do not alternate colours".into()))
        }
    }

    fn remap(&self, rows: usize, cols: usize, place: impl Fn(usize, usize) -> (usize, usize), turn: impl Fn(u8) -> u8) -> TruchetTiling {
        let mut out = vec![0u8; rows * cols];
        for (r, c) in self.cells() {
            let (nr, nc) = place(r, c);
            out[(nr - 1) * cols + (nc - 1)] = turn(self.get(r, c));
        }
        TruchetTiling { rows, cols, orientations: out }
    }

    /// Quarter turn clockwise: `(r, c) ↦ (c, rows + 1 − r)`, orientation `+1`.
    pub fn rotate90(&self) -> TruchetTiling {
        let m = self.rows;
        self.remap(self.cols, self.rows, |r, c| (c, m + 1 - r), |k| (k + 1) % 4)
    }

    pub fn rotate180(&self) -> TruchetTiling {
        let (m, n) = (self.rows, self.cols);
        self.remap(m, n, |r, c| (m + 1 - r, n + 1 - c), |k| (k + 2) % 4)
    }

    /// Mirror swapping north and south.
    pub fn flip_rows(&self) -> TruchetTiling {
        let m = self.rows;
        self.remap(m, self.cols, |r, c| (m + 1 - r, c), |k| 3 - k)
    }

    /// Mirror swapping east and west.
    pub fn flip_cols(&self) -> TruchetTiling {
        let n = self.cols;
        self.remap(self.rows, n, |r, c| (r, n + 1 - c), |k| k ^ 1)
    }

    /// Mirror across the main diagonal (north ↔ west, south ↔ east).
    pub fn transpose(&self) -> TruchetTiling {
        self.remap(self.cols, self.rows, |r, c| (c, r), |k| (4 - k) % 4)
    }

    /// Row-major digits with `/` between rows, e.g. `"000/000/000"`.
    pub fn encode(&self) -> String {
        self.orientations
            .chunks(self.cols)
            .map(|row| row.iter().map(|k| char::from(b'0' + k)).collect::<String>())
            .collect::<Vec<_>>()
            .join("/")
    }

    pub fn decode(s: &str) -> Result<Self> {
        let rows: Vec<&str> = s.split('/').collect();
        let cols = rows.first().map_or(0, |r| r.len());
        if rows.iter().any(|r| r.len() != cols) {
            return Err(Error::InvalidTiling(format!("ragged tiling string {s:?}")));
        }
        let mut orientations = Vec::with_capacity(rows.len() * cols);
        for ch in rows.iter().flat_map(|r| r.chars()) {
            let d = ch.to_digit(10).ok_or_else(|| Error::InvalidTiling(format!("bad digit {ch:?}")))?;
            orientations.push(d as u8);
        }
        Self::new(rows.len(), cols, orientations)
    }

    pub fn from_json(text: &str) -> Result<Self> {
        let raw: TruchetTiling = serde_json::from_str(text)?;
        Self::new(raw.rows, raw.cols, raw.orientations)
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }
}

pub fn validate_tiling(t: &TruchetTiling) -> bool {
    t.is_valid()
}

/// Cell where the generating block sits when a group pattern is laid out.
const SEED_CELL: (usize, usize) = (1, 2);

/// Conjugation applied to a group before its orbit is laid on the grid.
///
/// `pg` is reflected across the lattice diagonal `y = 0`, which maps the base
/// block onto itself; this puts the glide axis along the grid columns.
fn layout_conjugation(name: GroupName) -> Isometry2 {
    match name {
        GroupName::Pg => Isometry2 {
            matrix: [[1.0, 0.0], [0.0, -1.0]],
            offset: [0.0, 0.0],
        },
        GroupName::P1 | GroupName::P4 => Isometry2::IDENTITY,
    }
}

/// Lays the orbit of the base block under `g` onto an `m × n` grid.
pub fn tiling_from_group(g: &WallpaperGroup, m: usize, n: usize) -> Result<TruchetTiling> {
    if m < 3 || n < 3 {
        return Err(Error::InvalidArgument(format!(
            "grid {m}×{n} has no core; need at least 3×3"
        )));
    }
    let group = g.conjugated(&layout_conjugation(g.name));
    let reach = (2 * (m + n) + 6) as f64;
    let elements = group.group_elements(&Window::square(reach));

    let mut grid: Vec<Option<u8>> = vec![None; m * n];
    for e in &elements {
        let center = e.apply(BOTTOM_CENTER);
        let dx = center[0] - BOTTOM_CENTER[0];
        let dy = center[1] - BOTTOM_CENTER[1];
        // dx = dr + dc, dy = dc − dr
        let dr = ((dx - dy) / 2.0).round() as isize;
        let dc = ((dx + dy) / 2.0).round() as isize;
        let r = SEED_CELL.0 as isize + dr;
        let c = SEED_CELL.1 as isize + dc;
        if r < 1 || c < 1 || r > m as isize || c > n as isize {
            continue;
        }
        let k = orientation_from_direction(e.apply_linear([-1.0, 0.0])).ok_or_else(|| {
            Error::Consistency(format!("group element {e:?} does not map the block onto the lattice"))
        })?;
        let slot = &mut grid[(r as usize - 1) * n + (c as usize - 1)];
        match slot {
            Some(prev) if *prev != k => {
                return Err(Error::Consistency(format!("cell ({r}, {c}) receives orientations {prev} and {k}")));
            }
            _ => *slot = Some(k),
        }
    }
    let orientations = grid
        .into_iter()
        .collect::<Option<Vec<u8>>>()
        .ok_or_else(|| Error::Consistency("group orbit does not cover the grid".into()))?;
    let t = TruchetTiling::new(m, n, orientations)?;
    if !t.is_valid() {
        return Err(Error::Consistency(format!("{} pattern violates the colour rule", g.name)));
    }
    Ok(t)
}

/// Number of assemblies of an `m × n` grid up to rotation and mirroring, by
/// the closed formula `2^(m+n−3)`.
pub fn count_assemblies(m: usize, n: usize) -> Result<u128> {
    if m < 2 || n < 2 {
        return Err(Error::InvalidArgument(format!("grid {m}×{n} too small")));
    }
    let e = m + n - 3;
    if e >= 128 {
        return Err(Error::InvalidArgument(format!("2^{e} overflows")));
    }
    Ok(1u128 << e)
}

/// One placed block.
#[derive(Debug, Clone, PartialEq)]
pub struct PlacedBlock {
    /// 1-based linear index.
    pub index: usize,
    pub row: usize,
    pub col: usize,
    pub orientation: u8,
    pub frame: bool,
    /// Rigid placement of the base block (before scaling).
    pub placement: Isometry3,
    pub mesh: TriMesh,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Assembly {
    pub tiling: TruchetTiling,
    pub blocks: Vec<PlacedBlock>,
    pub frame: BTreeSet<usize>,
    pub core: BTreeSet<usize>,
    pub gap: f64,
    pub scale: [f64; 3],
}

/// Places `oriented_block(k)` at every cell. With `gap > 0` lattice positions
/// are spread by the factor `1 + gap`, so neighbouring blocks move apart by
/// `gap` along each lattice step; the block shape is unchanged. The result is
/// scaled by `diag(a, b, c)`.
pub fn build_assembly(t: &TruchetTiling, gap: f64, scale: [f64; 3]) -> Result<Assembly> {
    t.ensure_valid()?;
    if !(gap >= 0.0 && gap.is_finite()) {
        return Err(Error::InvalidArgument(format!("gap must be non-negative, got {gap}")));
    }
    if !scale.iter().all(|&s| s > 0.0 && s.is_finite()) {
        return Err(Error::InvalidArgument(format!("scale factors must be positive, got {scale:?}")));
    }
    let base = block::versatile_block().mesh;
    let spread = 1.0 + gap;
    let blocks = t
        .cells()
        .map(|(r, c)| {
            let k = t.get(r, c);
            let (rf, cf) = (r as f64, c as f64);
            let shift = [spread * (rf + cf), spread * (cf - rf)];
            let placement = Isometry2::translation(shift)
                .compose(&block::orientation_isometry(k)?)
                .extend3();
            let mesh = base
                .map_vertices(|v| placement.apply(v))
                .scale(scale[0], scale[1], scale[2])?;
            Ok(PlacedBlock {
                index: t.linear_index(r, c),
                row: r,
                col: c,
                orientation: k,
                frame: t.is_frame(r, c),
                placement,
                mesh,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(Assembly {
        frame: t.frame_indices(),
        core: t.core_indices(),
        tiling: t.clone(),
        blocks,
        gap,
        scale,
    })
}

impl Assembly {
    pub fn block(&self, index: usize) -> &PlacedBlock {
        &self.blocks[index - 1]
    }

    /// Extent of the bottom-plane footprint along the row and column lattice
    /// directions.
    pub fn footprint(&self) -> [f64; 2] {
        let dirs = [[1.0, -1.0], [1.0, 1.0]].map(|d: [f64; 2]| {
            let l = (d[0] * d[0] + d[1] * d[1]).sqrt();
            [d[0] / l, d[1] / l]
        });
        let mut out = [0.0; 2];
        for (slot, d) in out.iter_mut().zip(dirs) {
            let (mut lo, mut hi) = (f64::INFINITY, f64::NEG_INFINITY);
            for b in &self.blocks {
                for v in b.mesh.vertices.iter().filter(|v| v[2] == 0.0) {
                    let p = v[0] * d[0] + v[1] * d[1];
                    lo = lo.min(p);
                    hi = hi.max(p);
                }
            }
            *slot = hi - lo;
        }
        out
    }

    /// Height of one block after scaling.
    pub fn block_height(&self) -> f64 {
        block::HEIGHT * self.scale[2]
    }

    /// All blocks merged into one (non-welded) mesh.
    pub fn combined_mesh(&self) -> TriMesh {
        let mut vertices = Vec::new();
        let mut triangles = Vec::new();
        for b in &self.blocks {
            let off = vertices.len();
            vertices.extend_from_slice(&b.mesh.vertices);
            triangles.extend(b.mesh.triangles.iter().map(|t| [t[0] + off, t[1] + off, t[2] + off]));
        }
        TriMesh { vertices, triangles }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn distinct(t: &TruchetTiling) -> BTreeSet<u8> {
        t.orientations.iter().copied().collect()
    }

    #[test]
    fn colour_convention() {
        assert_eq!(white_sides(0), [Side::West, Side::North]);
        assert_eq!(side_color(0, Side::North), Color::White);
        assert_eq!(side_color(0, Side::East), Color::Black);
        assert_eq!(side_color(1, Side::East), Color::White);
        for k in 0..4 {
            for s in Side::ALL {
                assert_ne!(side_color(k, s), side_color(k, s.opposite()));
            }
        }
    }

    #[test]
    fn wallpaper_patterns() {
        let p1 = tiling_from_group(&WallpaperGroup::p1(), 10, 10).unwrap();
        assert!(p1.orientations.iter().all(|&k| k == 0));
        let pg = tiling_from_group(&WallpaperGroup::pg(), 10, 10).unwrap();
        assert_eq!(distinct(&pg).len(), 2);
        let p4 = tiling_from_group(&WallpaperGroup::p4(), 10, 10).unwrap();
        assert_eq!(distinct(&p4), BTreeSet::from([0, 1, 2, 3]));
        for t in [&p1, &pg, &p4] {
            assert!(t.is_valid());
        }
        // pg alternates by column, p4 is 2×2 periodic
        for (r, c) in pg.cells() {
            assert_eq!(pg.get(r, c), pg.get(1, c));
            if c > 2 {
                assert_eq!(pg.get(r, c), pg.get(r, c - 2));
            }
        }
        for (r, c) in p4.cells().filter(|&(r, c)| r > 2 && c > 2) {
            assert_eq!(p4.get(r, c), p4.get(r - 2, c));
            assert_eq!(p4.get(r, c), p4.get(r, c - 2));
        }
    }

    #[test]
    fn group_patterns_for_many_sizes() {
        for m in 3..9 {
            for n in 3..9 {
                for g in [WallpaperGroup::p1(), WallpaperGroup::pg(), WallpaperGroup::p4()] {
                    assert!(tiling_from_group(&g, m, n).unwrap().is_valid());
                }
            }
        }
    }

    #[test]
    fn small_grids_rejected() {
        assert!(tiling_from_group(&WallpaperGroup::p1(), 2, 10).is_err());
    }

    /// Brute force over all 16 vertical pairs: the pair is valid exactly when
    /// the two tiles agree on whether north or south is white.
    #[test]
    fn vertical_pairs_brute_force() {
        let mut valid = 0;
        for a in 0..4u8 {
            for b in 0..4u8 {
                let t = TruchetTiling::new(2, 1, vec![a, b]).unwrap();
                let north_white = |k| side_color(k, Side::North) == Color::White;
                assert_eq!(t.is_valid(), north_white(a) == north_white(b));
                valid += usize::from(t.is_valid());
            }
        }
        assert_eq!(valid, 8);
        assert!(!validate_tiling(&TruchetTiling::new(2, 1, vec![0, 2]).unwrap()));
        assert!(validate_tiling(&TruchetTiling::new(2, 1, vec![0, 0]).unwrap()));
        for k in 0..4 {
            assert!(validate_tiling(&TruchetTiling::uniform(1, 1, k).unwrap()));
        }
    }

    #[test]
    fn symmetries_preserve_validity() {
        let p4 = tiling_from_group(&WallpaperGroup::p4(), 4, 6).unwrap();
        for t in [p4.rotate90(), p4.rotate180(), p4.flip_rows(), p4.flip_cols(), p4.transpose()] {
            assert!(t.is_valid());
        }
        assert_eq!(p4.rotate90().rotate90(), p4.rotate180());
        assert_eq!(p4.rotate90().rotate90().rotate90().rotate90(), p4);
        assert_eq!(p4.flip_rows().flip_cols(), p4.rotate180());
        assert_eq!(p4.transpose().transpose(), p4);
    }

    #[test]
    fn p4_pattern_is_rotation_invariant() {
        let p4 = tiling_from_group(&WallpaperGroup::p4(), 10, 10).unwrap();
        assert_eq!(p4.rotate90(), p4);
    }

    #[test]
    fn indexing_and_frame() {
        let t = TruchetTiling::uniform(3, 3, 0).unwrap();
        assert_eq!(t.linear_index(2, 2), 5);
        assert_eq!(t.cell(5), (2, 2));
        assert_eq!(t.frame_indices().len(), 8);
        assert_eq!(t.core_indices(), BTreeSet::from([5]));
    }

    #[test]
    fn encode_decode() {
        let t = tiling_from_group(&WallpaperGroup::p4(), 3, 4).unwrap();
        assert_eq!(TruchetTiling::decode(&t.encode()).unwrap(), t);
        assert!(TruchetTiling::decode("01/2").is_err());
        assert!(TruchetTiling::decode("05").is_err());
        let json = t.to_json().unwrap();
        assert_eq!(TruchetTiling::from_json(&json).unwrap(), t);
        assert!(TruchetTiling::from_json(r#"{"rows":2,"cols":2,"orientations":[0,0,0]}"#).is_err());
    }

    #[test]
    fn count_formula() {
        assert_eq!(count_assemblies(8, 8).unwrap(), 8192);
        assert_eq!(count_assemblies(2, 2).unwrap(), 2);
        assert_eq!(count_assemblies(3, 3).unwrap(), 8);
        assert!(count_assemblies(1, 5).is_err());
    }

    #[test]
    fn placement_geometry() {
        let t = tiling_from_group(&WallpaperGroup::p1(), 10, 10).unwrap();
        let a = build_assembly(&t, 0.0, [0.2, 0.2, 0.2]).unwrap();
        assert_eq!(a.blocks.len(), 100);
        assert_eq!(a.frame.len(), 36);
        assert_eq!(a.core.len(), 64);
        let [w, h] = a.footprint();
        assert!((w - 2.83).abs() < 0.01 && (h - 2.83).abs() < 0.01, "{w} {h}");
        for b in &a.blocks {
            b.mesh.validate().unwrap();
        }
        let s = std::f64::consts::SQRT_2;
        let appendix = build_assembly(&t, 0.0, [0.4 / s, 0.4 / s, 0.2]).unwrap();
        assert!((appendix.block_height() - 0.2).abs() < 1e-15);
    }

    #[test]
    fn placement_rejects_bad_input() {
        let bad = TruchetTiling::new(2, 1, vec![0, 2]).unwrap();
        assert!(matches!(build_assembly(&bad, 0.0, [1.0; 3]), Err(Error::InvalidTiling(_))));
        let ok = TruchetTiling::uniform(3, 3, 0).unwrap();
        assert!(build_assembly(&ok, -0.1, [1.0; 3]).is_err());
        assert!(build_assembly(&ok, 0.0, [1.0, 0.0, 1.0]).is_err());
    }
}
