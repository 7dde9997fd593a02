//! Independent oracles for enumeration, overlap and flows.

use std::collections::{BTreeMap, BTreeSet};

use interlock::assembly::{build_assembly, side_color, tiling_from_group, Color, Side, TruchetTiling};
use interlock::block::{oriented_block, orientation_from_direction, rectangle_direction};
use interlock::blocking::dbg_combinatorial;
use interlock::enumeration::{canonicalize, enumerate_tilings};
use interlock::flows::{initial_load, step, tiling_flow, transfer_matrix};
use interlock::isometry::WallpaperGroup;
use interlock::mesh::TriMesh;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// The eight symmetries of the diamond lattice as planar matrices.
fn dihedral() -> Vec<[[i64; 2]; 2]> {
    let mut out = Vec::new();
    for (a, b) in [(1, 0), (0, 1)] {
        for s in [1, -1] {
            for t in [1, -1] {
                // rows of a signed permutation matrix
                out.push([[s * a, s * b], [t * b, t * a]]);
            }
        }
    }
    out
}

/// Applies a lattice symmetry geometrically: cell centres and rectangle
/// directions are mapped in the plane, about the grid centre. Returns `None`
/// if the image grid differs from the original grid.
fn act(t: &TruchetTiling, m: [[i64; 2]; 2]) -> Option<TruchetTiling> {
    let (rows, cols) = (t.rows as i64, t.cols as i64);
    // doubled coordinates keep the centre integral
    let centre = [(rows + 1) + (cols + 1), (cols + 1) - (rows + 1)];
    let mut image = BTreeMap::new();
    for (r, c) in t.cells() {
        let p = [2 * (r as i64 + c as i64) - centre[0], 2 * (c as i64 - r as i64) - centre[1]];
        let q = [m[0][0] * p[0] + m[0][1] * p[1] + centre[0], m[1][0] * p[0] + m[1][1] * p[1] + centre[1]];
        // q = 2·(r' + c', c' − r')
        if q[0] % 2 != 0 || q[1] % 2 != 0 || (q[0] / 2 - q[1] / 2) % 2 != 0 {
            return None;
        }
        let (sum, diff) = (q[0] / 2, q[1] / 2);
        let (nr, nc) = ((sum - diff) / 2, (sum + diff) / 2);
        if nr < 1 || nc < 1 || nr > rows || nc > cols {
            return None;
        }
        let d = rectangle_direction(t.get(r, c));
        let md = [m[0][0] as f64 * d[0] + m[0][1] as f64 * d[1], m[1][0] as f64 * d[0] + m[1][1] as f64 * d[1]];
        image.insert((nr as usize, nc as usize), orientation_from_direction(md).unwrap());
    }
    (image.len() == t.len()).then(|| TruchetTiling::new(t.rows, t.cols, image.into_values().collect()).unwrap())
}

fn all_grids(m: usize, n: usize) -> Vec<TruchetTiling> {
    let cells = m * n;
    let mut out = Vec::new();
    for code in 0u64..(1 << (2 * cells)) {
        let o: Vec<u8> = (0..cells).map(|i| ((code >> (2 * i)) & 3) as u8).collect();
        let t = TruchetTiling::new(m, n, o).unwrap();
        // colour rule written out independently of is_valid
        let ok = t.cells().all(|(r, c)| {
            let k = t.get(r, c);
            let h = c == n || side_color(k, Side::East) != side_color(t.get(r, c + 1), Side::West);
            let v = r == m || side_color(k, Side::South) != side_color(t.get(r + 1, c), Side::North);
            h && v
        });
        if ok {
            out.push(t);
        }
    }
    out
}

fn orbit_classes(tilings: &[TruchetTiling]) -> BTreeSet<BTreeSet<Vec<u8>>> {
    let ops = dihedral();
    tilings
        .iter()
        .map(|t| ops.iter().filter_map(|&m| act(t, m)).map(|x| x.orientations).collect())
        .collect()
}

fn check_against_brute_force(m: usize, n: usize) {
    let valid = all_grids(m, n);
    assert_eq!(valid.len(), 1 << (m + n));
    let classes = orbit_classes(&valid);
    let set = enumerate_tilings(m, n).unwrap();
    assert_eq!(set.len(), classes.len(), "{m}×{n}");
    let mut hit = BTreeSet::new();
    for t in set.tilings() {
        let class = classes.iter().find(|c| c.contains(&t.orientations)).expect("candidate is valid");
        assert!(hit.insert(class.clone()), "two candidates in one class");
    }
}

#[test]
fn enumeration_3x3_matches_brute_force() {
    check_against_brute_force(3, 3);
}

#[test]
fn enumeration_3x4_matches_brute_force() {
    check_against_brute_force(3, 4);
}

#[test]
fn geometric_action_matches_tiling_transforms() {
    let t = tiling_from_group(&WallpaperGroup::pg(), 5, 5).unwrap();
    let images: BTreeSet<Vec<u8>> = dihedral().into_iter().filter_map(|m| act(&t, m)).map(|x| x.orientations).collect();
    let library: BTreeSet<Vec<u8>> = [
        t.clone(),
        t.rotate90(),
        t.rotate180(),
        t.rotate180().rotate90(),
        t.flip_rows(),
        t.flip_cols(),
        t.transpose(),
        t.rotate180().transpose(),
    ]
    .into_iter()
    .map(|x| x.orientations)
    .collect();
    assert_eq!(images, library);
    assert_eq!(canonicalize(&t).orientations, images.iter().min().unwrap().clone());
}

#[test]
fn eight_by_eight_orbit_count() {
    // Burnside: identity 2^16, both quarter turns 2^4, half turn 2^8, both
    // diagonal mirrors 2^8, row and column mirrors 0
    let expected = (65536 + 16 + 16 + 256 + 256 + 256) / 8;
    assert_eq!(expected, 8292);
    assert_eq!(enumerate_tilings(8, 8).unwrap().len(), expected);
}

/// Monte-Carlo volume of `a ∩ b` using point-in-solid tests.
fn sampled_intersection(a: &TriMesh, b: &TriMesh, samples: usize, rng: &mut ChaCha8Rng) -> (f64, f64) {
    let (alo, ahi) = a.bounding_box();
    let (blo, bhi) = b.bounding_box();
    let lo: Vec<f64> = (0..3).map(|k| alo[k].max(blo[k])).collect();
    let hi: Vec<f64> = (0..3).map(|k| ahi[k].min(bhi[k])).collect();
    if (0..3).any(|k| hi[k] <= lo[k]) {
        return (0.0, 0.0);
    }
    let box_vol: f64 = (0..3).map(|k| hi[k] - lo[k]).product();
    let mut hits = 0usize;
    for _ in 0..samples {
        let p = [0, 1, 2].map(|k| rng.gen_range(lo[k]..hi[k]));
        if a.contains_point(p) && b.contains_point(p) {
            hits += 1;
        }
    }
    let f = hits as f64 / samples as f64;
    (box_vol * f, box_vol * (f * (1.0 - f) / samples as f64).sqrt())
}

#[test]
fn intersection_volume_matches_sampling() {
    let mut rng = ChaCha8Rng::seed_from_u64(7);
    let base = oriented_block(0).unwrap();
    for trial in 0..12 {
        let k = (trial % 4) as u8;
        let other = oriented_block(k)
            .unwrap()
            .translate([rng.gen_range(-1.0..1.0), rng.gen_range(-1.0..1.0), rng.gen_range(-0.5..0.5)]);
        let exact = base.intersection_volume(&other);
        let (estimate, sigma) = sampled_intersection(&base, &other, 20_000, &mut rng);
        assert!((exact - estimate).abs() <= 5.0 * sigma + 1e-6, "trial {trial}: {exact} vs {estimate} ± {sigma}");
    }
}

#[test]
fn pushed_block_overlaps_exactly_its_supporters() {
    let t = tiling_from_group(&WallpaperGroup::p4(), 4, 4).unwrap();
    let a = build_assembly(&t, 0.0, [1.0; 3]).unwrap();
    let dbg = dbg_combinatorial(&t).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(11);
    for &i in &a.core {
        let moved = a.block(i).mesh.translate([0.0, 0.0, -0.05]);
        for b in &a.blocks {
            if b.index == i {
                continue;
            }
            let (est, sigma) = sampled_intersection(&moved, &b.mesh, 4000, &mut rng);
            let supporter = dbg.arcs.contains(&(i, b.index));
            assert_eq!(moved.overlaps(&b.mesh, 1e-9), supporter, "{i} → {}", b.index);
            if !supporter {
                assert!(est <= 3.0 * sigma + 1e-9);
            }
        }
    }
}

/// The box procedure: each core box hands half its value to each neighbour
/// touching its white part.
fn box_step(t: &TruchetTiling, x: &BTreeMap<(usize, usize), f64>) -> BTreeMap<(usize, usize), f64> {
    let mut out: BTreeMap<(usize, usize), f64> = t.cells().map(|c| (c, 0.0)).collect();
    for (r, c) in t.cells() {
        let v = x[&(r, c)];
        if t.is_frame(r, c) {
            *out.get_mut(&(r, c)).unwrap() += v;
            continue;
        }
        for s in Side::ALL {
            if side_color(t.get(r, c), s) == Color::White {
                let n = t.neighbor(r, c, s).unwrap();
                *out.get_mut(&n).unwrap() += v / 2.0;
            }
        }
    }
    out
}

#[test]
fn matrix_step_matches_box_procedure() {
    for g in [WallpaperGroup::p1(), WallpaperGroup::pg(), WallpaperGroup::p4()] {
        let t = tiling_from_group(&g, 10, 10).unwrap();
        let a = transfer_matrix(&dbg_combinatorial(&t).unwrap()).unwrap();
        let mut x = initial_load(&t, 1.0).unwrap();
        let mut boxes: BTreeMap<_, _> = t.cells().map(|(r, c)| ((r, c), x[t.linear_index(r, c) - 1])).collect();
        for _ in 0..5 {
            x = step(&a, &x).unwrap();
            boxes = box_step(&t, &boxes);
            for (&(r, c), &v) in &boxes {
                assert_eq!(x[t.linear_index(r, c) - 1], v);
            }
        }
    }
}

#[test]
fn golden_pg_and_p4_grids() {
    let pg = tiling_flow(&tiling_from_group(&WallpaperGroup::pg(), 10, 10).unwrap()).unwrap();
    let left = [4.44, 5.52, 6.10, 6.27, 6.05, 5.42, 4.30, 2.55];
    for (r, e) in (2..=9).zip(left) {
        assert!((pg.at(r, 1) - e).abs() < 0.005);
    }
    for (c, e) in [2, 4, 6, 8].into_iter().zip([4.44, 3.71, 2.82, 1.66]) {
        assert!((pg.at(1, c) - e).abs() < 0.005);
    }
    for (c, e) in [3, 5, 7, 9].into_iter().zip([4.10, 3.31, 2.31, 1.00]) {
        assert!((pg.at(10, c) - e).abs() < 0.005);
    }
    let p4 = tiling_flow(&tiling_from_group(&WallpaperGroup::p4(), 10, 10).unwrap()).unwrap();
    for (c, e) in [2, 4, 6, 8].into_iter().zip([2.58, 4.38, 4.88, 4.16]) {
        assert!((p4.at(1, c) - e).abs() < 0.005);
        assert_eq!(p4.at(1, c + 1), 0.0);
    }
}
