//! Exhaustive enumeration of valid tilings up to rotation and mirroring, and
//! flow-based screening of the candidates.

use std::cmp::Ordering;
use std::collections::BTreeSet;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::assembly::{side_color, Side, TruchetTiling};
use crate::flows::{self, flow_metrics, FlowMetrics, FlowResult};
use crate::par::{self, Parallelism};
use crate::{Error, Result};

/// Grids up to this many cells are cross-checked against brute force.
const BRUTE_FORCE_CELLS: usize = 9;
/// Refuse enumerations with more raw tilings than this.
pub const MAX_RAW_TILINGS: u64 = 1 << 24;

/// Symmetries identified during deduplication.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SymmetryGroup {
    /// Quarter turns and the four mirrors of a square grid.
    D4,
    /// Half turn and the row and column mirrors of a rectangular grid.
    D2,
}

impl SymmetryGroup {
    pub fn for_grid(m: usize, n: usize) -> Self {
        if m == n {
            SymmetryGroup::D4
        } else {
            SymmetryGroup::D2
        }
    }

    pub fn as_str(self) -> &'static str {
        match self {
            SymmetryGroup::D4 => "d4",
            SymmetryGroup::D2 => "d2",
        }
    }

    pub fn order(self) -> usize {
        match self {
            SymmetryGroup::D4 => 8,
            SymmetryGroup::D2 => 4,
        }
    }

    pub fn description(self) -> &'static str {
        match self {
            SymmetryGroup::D4 => "rotations by 90, 180, 270 degrees, row and column mirrors, both diagonal mirrors",
            SymmetryGroup::D2 => "rotation by 180 degrees, row and column mirrors",
        }
    }

    /// Every image of `t` under the group, identity first.
    pub fn orbit(self, t: &TruchetTiling) -> Vec<TruchetTiling> {
        let mut out = vec![t.clone(), t.rotate180(), t.flip_rows(), t.flip_cols()];
        if self == SymmetryGroup::D4 {
            let q = t.rotate90();
            out.extend([q.rotate180(), t.transpose(), t.rotate180().transpose()]);
            out.insert(1, q);
        }
        out
    }
}

/// Smallest row-major orientation grid in the orbit of `t`.
pub fn canonicalize(t: &TruchetTiling) -> TruchetTiling {
    SymmetryGroup::for_grid(t.rows, t.cols)
        .orbit(t)
        .into_iter()
        .min_by(|a, b| a.orientations.cmp(&b.orientations))
        .expect("orbit contains the identity")
}

/// Orientations compatible with the tiles already placed to the west and
/// north of a cell.
fn compatible(west: Option<u8>, north: Option<u8>) -> impl Iterator<Item = u8> {
    (0..4u8).filter(move |&k| {
        west.is_none_or(|w| side_color(w, Side::East) != side_color(k, Side::West))
            && north.is_none_or(|n| side_color(n, Side::South) != side_color(k, Side::North))
    })
}

/// All valid tilings, by choosing the first row and column and propagating.
pub fn all_valid_tilings(m: usize, n: usize) -> Result<Vec<TruchetTiling>> {
    if m == 0 || n == 0 {
        return Err(Error::InvalidArgument(format!("grid {m}×{n} is empty")));
    }
    let raw = 1u64.checked_shl((m + n) as u32).filter(|&v| v <= MAX_RAW_TILINGS);
    if raw.is_none() {
        return Err(Error::InvalidArgument(format!(
            "grid {m}×{n} has more than {MAX_RAW_TILINGS} tilings"
        )));
    }
    let mut partial: Vec<Vec<u8>> = vec![Vec::with_capacity(m * n)];
    for r in 0..m {
        for c in 0..n {
            let mut next = Vec::with_capacity(partial.len() * 2);
            for g in &partial {
                let west = (c > 0).then(|| g[r * n + c - 1]);
                let north = (r > 0).then(|| g[(r - 1) * n + c]);
                for k in compatible(west, north) {
                    let mut h = g.clone();
                    h.push(k);
                    next.push(h);
                }
            }
            partial = next;
        }
    }
    partial
        .into_iter()
        .map(|o| TruchetTiling::new(m, n, o))
        .collect()
}

/// All valid tilings by testing all `4^(m·n)` grids. Only for tiny grids.
pub fn brute_force_valid_tilings(m: usize, n: usize) -> Result<Vec<TruchetTiling>> {
    let cells = m * n;
    if cells == 0 || cells > 12 {
        return Err(Error::InvalidArgument(format!("brute force limited to 12 cells, got {cells}")));
    }
    let mut out = Vec::new();
    for code in 0..(1u64 << (2 * cells)) {
        let o: Vec<u8> = (0..cells).map(|i| ((code >> (2 * (cells - 1 - i))) & 3) as u8).collect();
        let t = TruchetTiling { rows: m, cols: n, orientations: o };
        if t.is_valid() {
            out.push(t);
        }
    }
    Ok(out)
}

fn dedup(tilings: impl IntoIterator<Item = TruchetTiling>) -> Vec<TruchetTiling> {
    let set: BTreeSet<TruchetTiling> = tilings.into_iter().map(|t| canonicalize(&t)).collect();
    set.into_iter().collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Candidate {
    pub tiling: TruchetTiling,
    pub flow: Option<FlowResult>,
    pub metrics: Option<FlowMetrics>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CandidateSet {
    pub rows: usize,
    pub cols: usize,
    pub symmetry: SymmetryGroup,
    pub candidates: Vec<Candidate>,
}

impl CandidateSet {
    /// Candidates from arbitrary tilings, kept as given.
    pub fn from_tilings(tilings: Vec<TruchetTiling>) -> Result<Self> {
        let first = tilings.first().ok_or_else(|| Error::InvalidArgument("no candidates".into()))?;
        let (rows, cols) = (first.rows, first.cols);
        if let Some(t) = tilings.iter().find(|t| (t.rows, t.cols) != (rows, cols)) {
            return Err(Error::DimensionMismatch { expected: rows * cols, actual: t.len() });
        }
        Ok(CandidateSet {
            rows,
            cols,
            symmetry: SymmetryGroup::for_grid(rows, cols),
            candidates: tilings
                .into_iter()
                .map(|tiling| Candidate { tiling, flow: None, metrics: None })
                .collect(),
        })
    }

    pub fn len(&self) -> usize {
        self.candidates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.candidates.is_empty()
    }

    pub fn tilings(&self) -> impl Iterator<Item = &TruchetTiling> {
        self.candidates.iter().map(|c| &c.tiling)
    }
}

/// Valid `m × n` tilings up to the grid's symmetry group, in ascending
/// canonical order.
pub fn enumerate_tilings(m: usize, n: usize) -> Result<CandidateSet> {
    if m < 3 || n < 3 {
        return Err(Error::InvalidArgument(format!("grid {m}×{n} has no core; need at least 3×3")));
    }
    let all = all_valid_tilings(m, n)?;
    if all.len() as u64 != 1u64 << (m + n) {
        return Err(Error::Consistency(format!("propagation produced {} tilings", all.len())));
    }
    let canonical = dedup(all);
    if m * n <= BRUTE_FORCE_CELLS {
        let oracle = dedup(brute_force_valid_tilings(m, n)?);
        if oracle != canonical {
            return Err(Error::Consistency(format!(
                "propagation gives {} classes, brute force {}",
                canonical.len(),
                oracle.len()
            )));
        }
    }
    CandidateSet::from_tilings(canonical)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Metric {
    MaxLoad,
    Cv,
    LoadedCells,
}

impl Metric {
    pub fn as_str(self) -> &'static str {
        match self {
            Metric::MaxLoad => "max_load",
            Metric::Cv => "cv",
            Metric::LoadedCells => "loaded_cells",
        }
    }

    pub fn value(self, m: &FlowMetrics) -> f64 {
        match self {
            Metric::MaxLoad => m.max_load,
            Metric::Cv => m.cv,
            Metric::LoadedCells => m.loaded_cells as f64,
        }
    }
}

impl FromStr for Metric {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "max_load" => Ok(Metric::MaxLoad),
            "cv" => Ok(Metric::Cv),
            "loaded_cells" => Ok(Metric::LoadedCells),
            _ => Err(Error::InvalidArgument(format!("unknown metric {s:?}"))),
        }
    }
}

impl fmt::Display for Metric {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Ranked {
    /// 1-based.
    pub rank: usize,
    pub tiling: TruchetTiling,
    pub converged: bool,
    pub metrics: Option<FlowMetrics>,
    pub frame_load: Option<FlowResult>,
}

/// Flow of one tiling: closed form, falling back to iteration when the
/// core holds a closed cycle.
pub fn evaluate(t: &TruchetTiling) -> Result<FlowResult> {
    match flows::tiling_flow(t) {
        Err(Error::NonAbsorbingCycle { .. }) => flows::tiling_flow_iterated(t, flows::DEFAULT_TOL, flows::DEFAULT_MAX_ITER),
        other => other,
    }
}

/// Computes flows for every candidate and ranks ascending by `metric`.
pub fn screen(c: &CandidateSet, metric: Metric) -> Result<Vec<Ranked>> {
    screen_with(c, metric, Parallelism::default())
}

pub fn screen_with(c: &CandidateSet, metric: Metric, mode: Parallelism) -> Result<Vec<Ranked>> {
    if c.is_empty() {
        return Err(Error::InvalidArgument("no candidates to screen".into()));
    }
    let results = par::map(&c.candidates, mode, |cand| -> Result<(FlowResult, Option<FlowMetrics>)> {
        let flow = evaluate(&cand.tiling)?;
        let metrics = flow_metrics(&flow).ok();
        Ok((flow, metrics))
    });
    let mut rows: Vec<Ranked> = c
        .candidates
        .iter()
        .zip(results)
        .map(|(cand, r)| {
            let (flow, metrics) = r?;
            Ok(Ranked {
                rank: 0,
                tiling: cand.tiling.clone(),
                converged: flow.converged,
                metrics,
                frame_load: Some(flow),
            })
        })
        .collect::<Result<_>>()?;
    rows.sort_by(|a, b| {
        let key = |r: &Ranked| r.metrics.as_ref().map(|m| metric.value(m));
        match (key(a), key(b)) {
            (Some(x), Some(y)) => x.total_cmp(&y),
            (Some(_), None) => Ordering::Less,
            (None, Some(_)) => Ordering::Greater,
            (None, None) => Ordering::Equal,
        }
        .then_with(|| a.tiling.orientations.cmp(&b.tiling.orientations))
    });
    for (k, r) in rows.iter_mut().enumerate() {
        r.rank = k + 1;
    }
    Ok(rows)
}
