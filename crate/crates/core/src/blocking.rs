//! Directional blocking graphs: which blocks restrain which when one block is
//! pushed a small distance in a direction `d`.

use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use crate::assembly::{white_sides, Assembly, TruchetTiling};
use crate::mesh::TriMesh;
use crate::par::{self, Parallelism};
use crate::{Error, Result};

/// Default push distance as a fraction of block height.
pub const DEFAULT_EPS_SCALE: f64 = 0.01;

/// Overlap threshold relative to the volume of one block.
const RELATIVE_OVERLAP_TOL: f64 = 1e-9;

/// Nodes are the 1-based block indices `1..=n`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BlockingGraph {
    pub n: usize,
    pub arcs: BTreeSet<(usize, usize)>,
    pub direction: [f64; 3],
    pub frame: BTreeSet<usize>,
}

impl BlockingGraph {
    pub fn out_neighbors(&self, i: usize) -> impl Iterator<Item = usize> + '_ {
        self.arcs.range((i, 0)..(i + 1, 0)).map(|&(_, j)| j)
    }

    pub fn out_degree(&self, i: usize) -> usize {
        self.out_neighbors(i).count()
    }

    pub fn is_frame(&self, i: usize) -> bool {
        self.frame.contains(&i)
    }

    pub fn core(&self) -> impl Iterator<Item = usize> + '_ {
        (1..=self.n).filter(|i| !self.frame.contains(i))
    }

    /// One `i j` line per arc, 1-based.
    pub fn to_edge_list(&self) -> String {
        self.arcs.iter().map(|(i, j)| format!("{i} {j}\n")).collect()
    }

    pub fn to_json(&self) -> Result<String> {
        Ok(serde_json::to_string_pretty(self)?)
    }

    /// Relabels nodes by `f` (a permutation of `1..=n`).
    pub fn relabel(&self, f: impl Fn(usize) -> usize) -> BlockingGraph {
        BlockingGraph {
            n: self.n,
            arcs: self.arcs.iter().map(|&(i, j)| (f(i), f(j))).collect(),
            direction: self.direction,
            frame: self.frame.iter().map(|&i| f(i)).collect(),
        }
    }
}

fn with_frame_loops(t: &TruchetTiling, direction: [f64; 3], mut arcs: BTreeSet<(usize, usize)>) -> BlockingGraph {
    let frame = t.frame_indices();
    arcs.extend(frame.iter().map(|&j| (j, j)));
    BlockingGraph {
        n: t.len(),
        arcs,
        direction,
        frame,
    }
}

/// Graph read off the tile colours for a small downward push: every core
/// block rests on the two neighbours across its white sides.
pub fn dbg_combinatorial(t: &TruchetTiling) -> Result<BlockingGraph> {
    t.ensure_valid()?;
    let mut arcs = BTreeSet::new();
    for (r, c) in t.cells().filter(|&(r, c)| !t.is_frame(r, c)) {
        let i = t.linear_index(r, c);
        for side in white_sides(t.get(r, c)) {
            let (nr, nc) = t.neighbor(r, c, side).expect("core cells have four neighbours");
            arcs.insert((i, t.linear_index(nr, nc)));
        }
    }
    Ok(with_frame_loops(t, [0.0, 0.0, -DEFAULT_EPS_SCALE], arcs))
}

fn boxes_overlap(a: &([f64; 3], [f64; 3]), b: &([f64; 3], [f64; 3])) -> bool {
    (0..3).all(|k| a.0[k] < b.1[k] && b.0[k] < a.1[k])
}

/// Graph from mesh overlap: core block `i` is restrained by `j` when `i`,
/// moved by `eps_scale · h` along `d`, overlaps `j` in volume.
pub fn dbg_geometric(a: &Assembly, d: [f64; 3], eps_scale: f64) -> Result<BlockingGraph> {
    dbg_geometric_with(a, d, eps_scale, Parallelism::default())
}

pub fn dbg_geometric_with(a: &Assembly, d: [f64; 3], eps_scale: f64, mode: Parallelism) -> Result<BlockingGraph> {
    if a.gap != 0.0 {
        return Err(Error::InvalidArgument(format!(
            "blocking needs a gap-free assembly, got gap {}",
            a.gap
        )));
    }
    let norm = (d[0] * d[0] + d[1] * d[1] + d[2] * d[2]).sqrt();
    if !(norm > 0.0 && norm.is_finite()) {
        return Err(Error::InvalidArgument("direction must be a non-zero vector".into()));
    }
    if !(eps_scale > 0.0 && eps_scale <= 0.25) {
        return Err(Error::InvalidArgument(format!("eps_scale must lie in (0, 0.25], got {eps_scale}")));
    }
    let step = eps_scale * a.block_height() / norm;
    let shift = d.map(|x| x * step);
    let tol = RELATIVE_OVERLAP_TOL * a.blocks[0].mesh.signed_volume().abs();
    let boxes: Vec<_> = a.blocks.iter().map(|b| b.mesh.bounding_box()).collect();

    let core: Vec<usize> = a.core.iter().copied().collect();
    let rows = par::map(&core, mode, |&i| {
        let moved: TriMesh = a.block(i).mesh.translate(shift);
        let mb = moved.bounding_box();
        a.blocks
            .iter()
            .zip(&boxes)
            .filter(|(b, bb)| b.index != i && boxes_overlap(&mb, bb))
            .filter(|(b, _)| moved.overlaps(&b.mesh, tol))
            .map(|(b, _)| (i, b.index))
            .collect::<Vec<_>>()
    });
    let arcs = rows.into_iter().flatten().collect();
    Ok(with_frame_loops(&a.tiling, shift, arcs))
}
