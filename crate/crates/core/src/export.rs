//! Text and mesh exporters. Every float is printed with six decimals so
//! repeated runs are byte-identical.

use std::fmt::Write as _;
use std::fs::{self, File};
use std::io::BufWriter;
use std::path::{Path, PathBuf};

use serde_json::{json, Value};

use crate::assembly::Assembly;
use crate::enumeration::{Metric, Ranked, SymmetryGroup};
use crate::flows::FlowResult;
use crate::mesh::stl;
use crate::Result;

pub fn fixed(v: f64) -> String {
    // avoid "-0.000000"
    let s = format!("{v:.6}");
    if s.trim_start_matches('-').chars().all(|c| c == '0' || c == '.') {
        s.trim_start_matches('-').to_string()
    } else {
        s
    }
}

/// Rounds to six decimals for JSON so it matches the CSV text.
fn round6(v: f64) -> Value {
    let s = fixed(v);
    serde_json::from_str(&s).unwrap_or(Value::Null)
}

/// `rows` lines of `cols` comma-separated loads; core cells read 0.
pub fn flow_csv(r: &FlowResult) -> String {
    let mut out = String::new();
    for row in r.grid() {
        let line: Vec<String> = row.iter().map(|&v| fixed(v)).collect();
        out.push_str(&line.join(","));
        out.push('\n');
    }
    out
}

pub fn flow_json(r: &FlowResult, initial_mass: f64) -> String {
    let grid: Vec<Vec<Value>> = r.grid().iter().map(|row| row.iter().map(|&v| round6(v)).collect()).collect();
    let frame: serde_json::Map<String, Value> = r.frame_load.iter().map(|(k, &v)| (k.to_string(), round6(v))).collect();
    let doc = json!({
        "rows": r.rows,
        "cols": r.cols,
        "grid": grid,
        "frame_load": frame,
        "diagnostics": diagnostics_value(r, initial_mass),
    });
    serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n"
}

fn diagnostics_value(r: &FlowResult, initial_mass: f64) -> Value {
    let total = r.total_frame_mass();
    json!({
        "converged": r.converged,
        "iterations": r.iterations,
        "residual_core_mass": round6(r.residual_core_mass),
        "initial_mass": round6(initial_mass),
        "total_frame_mass": round6(total),
        "conservation_error": format!("{:.3e}", (total + r.residual_core_mass - initial_mass).abs()),
    })
}

/// Human-readable diagnostics, one `key=value` per line.
pub fn flow_diagnostics(r: &FlowResult, initial_mass: f64) -> String {
    let total = r.total_frame_mass();
    format!(
        "converged={}\niterations={}\nresidual={}\ntotal={}\nconservation_error={:.3e}\n",
        r.converged,
        r.iterations,
        fixed(r.residual_core_mass),
        fixed(total),
        (total + r.residual_core_mass - initial_mass).abs()
    )
}

/// Grid heatmap: core cells grey, frame cells shaded by load with the value
/// printed to two decimals.
pub fn flow_svg(r: &FlowResult) -> String {
    const CELL: usize = 40;
    let max = r.frame_load.values().copied().fold(0.0, f64::max);
    let (w, h) = (r.cols * CELL, r.rows * CELL);
    let mut s = String::new();
    let _ = writeln!(s, r#"<svg xmlns="http://www.w3.org/2000/svg" width="{w}" height="{h}" viewBox="0 0 {w} {h}">"#);
    for row in 1..=r.rows {
        for col in 1..=r.cols {
            let (x, y) = ((col - 1) * CELL, (row - 1) * CELL);
            let idx = (row - 1) * r.cols + col;
            let (fill, label) = match r.frame_load.get(&idx) {
                None => ("#d0d0d0".to_string(), String::new()),
                Some(&v) => {
                    let t = if max > 0.0 { v / max } else { 0.0 };
                    let g = (255.0 * (1.0 - t)).round() as u8;
                    (format!("#ff{g:02x}{g:02x}"), format!("{v:.2}"))
                }
            };
            let _ = writeln!(
                s,
                r##"<rect x="{x}" y="{y}" width="{CELL}" height="{CELL}" fill="{fill}" stroke="#404040"/>"##
            );
            if !label.is_empty() {
                let _ = writeln!(
                    s,
                    r#"<text x="{}" y="{}" font-size="11" text-anchor="middle" dominant-baseline="middle">{label}</text>"#,
                    x + CELL / 2,
                    y + CELL / 2
                );
            }
        }
    }
    s.push_str("</svg>\n");
    s
}

pub fn manifest_json(a: &Assembly) -> String {
    let blocks: Vec<Value> = a
        .blocks
        .iter()
        .map(|b| {
            let m = b.placement.matrix3();
            json!({
                "index": b.index,
                "row": b.row,
                "col": b.col,
                "orientation": b.orientation,
                "role": if b.frame { "frame" } else { "core" },
                "file": block_file_name(b.index),
                "placement": {
                    "matrix": m.iter().map(|r| r.iter().map(|&v| round6(v)).collect::<Vec<_>>()).collect::<Vec<_>>(),
                    "offset": b.placement.offset3().iter().map(|&v| round6(v)).collect::<Vec<_>>(),
                },
            })
        })
        .collect();
    let [fw, fh] = a.footprint();
    let doc = json!({
        "rows": a.tiling.rows,
        "cols": a.tiling.cols,
        "orientations": a.tiling.encode(),
        "gap": round6(a.gap),
        "scale": a.scale.iter().map(|&v| round6(v)).collect::<Vec<_>>(),
        "footprint": [round6(fw), round6(fh)],
        "frame": a.frame,
        "core": a.core,
        "combined": COMBINED_FILE,
        "blocks": blocks,
    });
    serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n"
}

pub const COMBINED_FILE: &str = "assembly.stl";
pub const MANIFEST_FILE: &str = "manifest.json";

pub fn block_file_name(index: usize) -> String {
    format!("block_{index:03}.stl")
}

/// Writes one binary STL per block, the combined STL and the manifest.
/// Returns the paths written.
pub fn write_assembly(dir: &Path, a: &Assembly) -> Result<Vec<PathBuf>> {
    fs::create_dir_all(dir)?;
    let mut written = Vec::with_capacity(a.blocks.len() + 2);
    for b in &a.blocks {
        let p = dir.join(block_file_name(b.index));
        stl::write_mesh(BufWriter::new(File::create(&p)?), &b.mesh)?;
        written.push(p);
    }
    let p = dir.join(COMBINED_FILE);
    stl::write_mesh(BufWriter::new(File::create(&p)?), &a.combined_mesh())?;
    written.push(p);
    let p = dir.join(MANIFEST_FILE);
    fs::write(&p, manifest_json(a))?;
    written.push(p);
    Ok(written)
}

pub fn ranked_csv(rows: &[Ranked]) -> String {
    let mut s = String::from("rank,tiling,converged,max_load,loaded_cells,cv,iterations\n");
    for r in rows {
        let _ = match &r.metrics {
            Some(m) => writeln!(
                s,
                "{},{},{},{},{},{},{}",
                r.rank,
                r.tiling.encode(),
                r.converged,
                fixed(m.max_load),
                m.loaded_cells,
                fixed(m.cv),
                m.iterations
            ),
            None => writeln!(s, "{},{},{},,,,", r.rank, r.tiling.encode(), r.converged),
        };
    }
    s
}

pub fn ranked_json(rows: &[Ranked], metric: Metric, symmetry: SymmetryGroup) -> String {
    let list: Vec<Value> = rows
        .iter()
        .map(|r| {
            json!({
                "rank": r.rank,
                "tiling": r.tiling.encode(),
                "converged": r.converged,
                "max_load": r.metrics.map(|m| round6(m.max_load)),
                "loaded_cells": r.metrics.map(|m| m.loaded_cells),
                "cv": r.metrics.map(|m| round6(m.cv)),
                "iterations": r.metrics.map(|m| m.iterations),
            })
        })
        .collect();
    let doc = json!({
        "metric": metric.as_str(),
        "symmetry_group": {
            "name": symmetry,
            "order": symmetry.order(),
            "elements": symmetry.description(),
        },
        "count": rows.len(),
        "candidates": list,
    });
    serde_json::to_string_pretty(&doc).expect("json values serialize") + "\n"
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::assembly::{build_assembly, tiling_from_group, TruchetTiling};
    use crate::enumeration::{enumerate_tilings, screen};
    use crate::flows::tiling_flow;
    use crate::isometry::WallpaperGroup;

    #[test]
    fn fixed_formatting() {
        assert_eq!(fixed(1.0), "1.000000");
        assert_eq!(fixed(-0.0), "0.000000");
        assert_eq!(fixed(-1e-9), "0.000000");
        assert_eq!(fixed(-2.5), "-2.500000");
    }

    #[test]
    fn flow_csv_layout() {
        let t = tiling_from_group(&WallpaperGroup::p1(), 10, 10).unwrap();
        let r = tiling_flow(&t).unwrap();
        let csv = flow_csv(&r);
        let lines: Vec<&str> = csv.lines().collect();
        assert_eq!(lines.len(), 10);
        let top: Vec<f64> = lines[0].split(',').map(|v| v.parse().unwrap()).collect();
        assert_eq!(top.len(), 10);
        assert_eq!(top[0], 0.0);
        assert!((top[1] - 6.43).abs() < 0.005);
        assert!((top[8] - 1.0).abs() < 0.005);
        assert!(flow_diagnostics(&r, 64.0).contains("total=64.000000"));
        let j: Value = serde_json::from_str(&flow_json(&r, 64.0)).unwrap();
        assert_eq!(j["grid"][0][8].as_f64().unwrap(), top[8]);
        assert!(flow_svg(&r).starts_with("<svg"));
    }

    #[test]
    fn manifest_fields() {
        let t = TruchetTiling::uniform(3, 3, 0).unwrap();
        let a = build_assembly(&t, 0.0, [1.0; 3]).unwrap();
        let j: Value = serde_json::from_str(&manifest_json(&a)).unwrap();
        assert_eq!(j["blocks"].as_array().unwrap().len(), 9);
        assert_eq!(j["frame"].as_array().unwrap().len(), 8);
        assert_eq!(j["core"], json!([5]));
        assert_eq!(j["blocks"][4]["role"], "core");
        assert_eq!(j["blocks"][4]["row"], 2);
    }

    #[test]
    fn ranked_outputs() {
        let set = enumerate_tilings(3, 3).unwrap();
        let ranked = screen(&set, Metric::MaxLoad).unwrap();
        let csv = ranked_csv(&ranked);
        assert_eq!(csv.lines().count(), 1 + set.len());
        let j: Value = serde_json::from_str(&ranked_json(&ranked, Metric::MaxLoad, set.symmetry)).unwrap();
        assert_eq!(j["symmetry_group"]["order"], 8);
        assert_eq!(j["count"], set.len());
    }
}
