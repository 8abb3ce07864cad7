//! Plain-text geometry files.
//!
//! ```text
//! [degree]
//! 2 2
//! [knots_u]
//! 0 0 0 0.5 0.5 1 1 1
//! [knots_v]
//! 0 0 0 1 1 1
//! [weights]
//! ...            (row-major, one row of the net per line)
//! [control_points]
//! x y z          (row-major, one point per line)
//! ```

use std::collections::HashMap;
use std::fmt::Write as _;
use std::path::Path;

use super::surface::NurbsSurface;
use crate::error::{Error, Result};
use crate::splinecore::KnotVector;

fn join(v: impl IntoIterator<Item = f64>) -> String {
    v.into_iter().map(|x| format!("{x:.17e}")).collect::<Vec<_>>().join(" ")
}

pub fn geometry_to_string(surf: &NurbsSurface) -> String {
    let mut out = String::new();
    let nv = surf.n_v();
    let _ = writeln!(out, "[degree]\n{} {}", surf.kv_u().degree(), surf.kv_v().degree());
    let _ = writeln!(out, "[knots_u]\n{}", join(surf.kv_u().knots().iter().copied()));
    let _ = writeln!(out, "[knots_v]\n{}", join(surf.kv_v().knots().iter().copied()));
    out.push_str("[weights]\n");
    for row in surf.weights().chunks(nv) {
        let _ = writeln!(out, "{}", join(row.iter().copied()));
    }
    out.push_str("[control_points]\n");
    for p in surf.ctrl() {
        let _ = writeln!(out, "{}", join(p.iter().copied()));
    }
    out
}

pub fn geometry_from_str(text: &str) -> Result<NurbsSurface> {
    let mut sections: HashMap<String, Vec<f64>> = HashMap::new();
    let mut current: Option<String> = None;
    for (lineno, raw) in text.lines().enumerate() {
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        if line.starts_with('[') && line.ends_with(']') {
            let name = line[1..line.len() - 1].trim().to_string();
            sections.insert(name.clone(), Vec::new());
            current = Some(name);
            continue;
        }
        let name = current
            .as_ref()
            .ok_or_else(|| Error::Parse(format!("line {}: data before any section", lineno + 1)))?;
        let entry = sections.get_mut(name).expect("section inserted");
        for tok in line.split_whitespace() {
            entry.push(
                tok.parse()
                    .map_err(|_| Error::Parse(format!("line {}: bad number '{tok}'", lineno + 1)))?,
            );
        }
    }
    let take = |name: &str| {
        sections
            .get(name)
            .cloned()
            .ok_or_else(|| Error::Parse(format!("missing section [{name}]")))
    };
    let deg = take("degree")?;
    if deg.len() != 2 || deg.iter().any(|d| *d < 0.0 || d.fract() != 0.0) {
        return Err(Error::Parse("[degree] needs two non-negative integers".into()));
    }
    let kv_u = KnotVector::new(take("knots_u")?, deg[0] as usize)?;
    let kv_v = KnotVector::new(take("knots_v")?, deg[1] as usize)?;
    let pts = take("control_points")?;
    if pts.len() % 3 != 0 {
        return Err(Error::Parse("control points need three coordinates".into()));
    }
    let ctrl = pts.chunks(3).map(|c| [c[0], c[1], c[2]]).collect();
    NurbsSurface::new(kv_u, kv_v, take("weights")?, ctrl)
}

pub fn write_geometry(surf: &NurbsSurface, path: impl AsRef<Path>) -> Result<()> {
    std::fs::write(path, geometry_to_string(surf))?;
    Ok(())
}

pub fn read_geometry(path: impl AsRef<Path>) -> Result<NurbsSurface> {
    geometry_from_str(&std::fs::read_to_string(path)?)
}
