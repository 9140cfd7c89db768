//! Text file formats: meshes, legacy VTK, convergence history, estimator
//! indicators and matrices.
//!
//! Floats are written with Rust's shortest round-trip formatting, so files
//! are byte-identical across runs and parse back to the same `f64`.

use std::io::{self, BufRead, Write};
use std::path::Path;

use adaptive_dg_core::adapt::{ConvergenceHistory, ConvergenceRecord};
use adaptive_dg_core::dg::DgFunction;
use adaptive_dg_core::estimate::EstimatorBreakdown;
use adaptive_dg_core::sparse::SparseSymMatrix;
use adaptive_dg_core::{Mesh, Point2};

use crate::error::{CliError, CliResult};

/// Writes the node/element format: `NV NT`, then `x y` per vertex, then
/// `v0 v1 v2` per triangle (0-based).
pub fn write_mesh<W: Write>(w: &mut W, mesh: &Mesh) -> io::Result<()> {
    writeln!(w, "{} {}", mesh.n_vertices(), mesh.n_triangles())?;
    for p in mesh.vertices() {
        writeln!(w, "{} {}", p.x, p.y)?;
    }
    for t in mesh.triangles() {
        let [a, b, c] = t.vertices;
        writeln!(w, "{a} {b} {c}")?;
    }
    Ok(())
}

pub fn read_mesh<R: BufRead>(r: R, path: &Path) -> CliResult<Mesh> {
    let fail = |line: usize, message: String| CliError::Format {
        path: path.to_path_buf(),
        line,
        message,
    };
    let mut lines = r
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l))
        .filter(|(_, l)| !matches!(l, Ok(s) if s.trim().is_empty()));
    let mut next = |what: &str| -> CliResult<(usize, Vec<String>)> {
        match lines.next() {
            Some((n, Ok(s))) => Ok((n, s.split_whitespace().map(str::to_owned).collect())),
            Some((_, Err(e))) => Err(CliError::io(format!("reading {}", path.display()), e)),
            None => Err(fail(0, format!("unexpected end of file, expected {what}"))),
        }
    };
    fn parse<T: std::str::FromStr>(s: &str) -> Option<T> {
        s.parse().ok()
    }

    let (n, head) = next("header `NV NT`")?;
    let [nv, nt] = head.as_slice() else {
        return Err(fail(n, "header must be `NV NT`".into()));
    };
    let (Some(nv), Some(nt)) = (parse::<usize>(nv), parse::<usize>(nt)) else {
        return Err(fail(n, "header must hold two non-negative integers".into()));
    };
    let mut vertices = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (n, f) = next("a vertex line `x y`")?;
        match f.as_slice() {
            [x, y] => match (parse::<f64>(x), parse::<f64>(y)) {
                (Some(x), Some(y)) => vertices.push(Point2::new(x, y)),
                _ => return Err(fail(n, "vertex coordinates must be numbers".into())),
            },
            _ => return Err(fail(n, "vertex line must be `x y`".into())),
        }
    }
    let mut triples = Vec::with_capacity(nt);
    for _ in 0..nt {
        let (n, f) = next("a triangle line `v0 v1 v2`")?;
        let ids: Option<Vec<usize>> = f.iter().map(|s| parse(s)).collect();
        match ids.as_deref() {
            Some(&[a, b, c]) => triples.push([a, b, c]),
            _ => return Err(fail(n, "triangle line must be three vertex indices".into())),
        }
    }
    if let Some((n, _)) = lines.next() {
        return Err(fail(n, "trailing content after the last triangle".into()));
    }
    Ok(Mesh::new(vertices, &triples)?)
}

/// Legacy VTK unstructured grid. Each triangle gets its own three points so
/// the discontinuous solution is shown as it is.
pub fn write_vtk<W: Write>(
    w: &mut W,
    mesh: &Mesh,
    solution: Option<&DgFunction>,
    estimate: Option<&EstimatorBreakdown>,
) -> io::Result<()> {
    let nt = mesh.n_triangles();
    writeln!(w, "# vtk DataFile Version 3.0")?;
    writeln!(w, "adaptive-dg mesh")?;
    writeln!(w, "ASCII")?;
    writeln!(w, "DATASET UNSTRUCTURED_GRID")?;
    writeln!(w, "POINTS {} double", 3 * nt)?;
    for t in 0..nt {
        for p in mesh.triangle_points(t) {
            writeln!(w, "{} {} 0", p.x, p.y)?;
        }
    }
    writeln!(w, "CELLS {} {}", nt, 4 * nt)?;
    for t in 0..nt {
        writeln!(w, "3 {} {} {}", 3 * t, 3 * t + 1, 3 * t + 2)?;
    }
    writeln!(w, "CELL_TYPES {nt}")?;
    for _ in 0..nt {
        writeln!(w, "5")?;
    }
    writeln!(w, "CELL_DATA {nt}")?;
    writeln!(w, "SCALARS generation int 1")?;
    writeln!(w, "LOOKUP_TABLE default")?;
    for t in mesh.triangles() {
        writeln!(w, "{}", t.generation)?;
    }
    if let Some(est) = estimate {
        writeln!(w, "SCALARS volume_indicator double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for v in &est.per_element_volume {
            writeln!(w, "{v}")?;
        }
    }
    if let Some(u) = solution {
        writeln!(w, "POINT_DATA {}", 3 * nt)?;
        writeln!(w, "SCALARS u_h double 1")?;
        writeln!(w, "LOOKUP_TABLE default")?;
        for c in u.coeffs() {
            writeln!(w, "{c}")?;
        }
    }
    Ok(())
}

/// Column order of `history.csv`.
pub const HISTORY_COLUMNS: [&str; 19] = [
    "iteration",
    "ndof",
    "ntriangles",
    "energy_error",
    "cr_error",
    "eta_sq_total",
    "jump_total",
    "volume_total",
    "diff_norm_sq",
    "contraction_quantity",
    "ratio",
    "volume_ratio",
    "error_source",
    "alpha",
    "solver_iterations",
    "solver_residual",
    "marked_edges",
    "marked_triangles",
    "branch",
];

fn opt(v: Option<f64>) -> String {
    v.map(|x| x.to_string()).unwrap_or_default()
}

fn history_row(r: &ConvergenceRecord) -> String {
    let fields = [
        r.iteration.to_string(),
        r.ndof.to_string(),
        r.ntriangles.to_string(),
        opt(r.energy_error),
        opt(r.cr_error),
        r.eta_sq_total.to_string(),
        r.jump_total.to_string(),
        r.volume_total.to_string(),
        r.diff_norm_sq.to_string(),
        r.contraction_quantity.to_string(),
        opt(r.ratio),
        opt(r.volume_ratio),
        if r.uses_proxy() { "estimator" } else { "exact" }.to_string(),
        r.alpha.to_string(),
        r.solver_iterations.to_string(),
        r.solver_residual.to_string(),
        r.marked_edges.to_string(),
        r.marked_triangles.to_string(),
        r.branch.map(|b| b.name()).unwrap_or_default().to_string(),
    ];
    fields.join(",")
}

/// One row per record. Wall-clock times are left out so the file only
/// depends on the configuration; see [`write_timings`].
pub fn write_history<W: Write>(w: &mut W, history: &ConvergenceHistory) -> io::Result<()> {
    writeln!(w, "{}", HISTORY_COLUMNS.join(","))?;
    for r in &history.records {
        writeln!(w, "{}", history_row(r))?;
    }
    Ok(())
}

pub fn write_timings<W: Write>(w: &mut W, history: &ConvergenceHistory) -> io::Result<()> {
    writeln!(w, "iteration,wall_time")?;
    for r in &history.records {
        writeln!(w, "{},{}", r.iteration, r.wall_time)?;
    }
    Ok(())
}

/// `kind,id,indicator` rows: interior edges first, then triangles.
pub fn write_estimator<W: Write>(w: &mut W, mesh: &Mesh, est: &EstimatorBreakdown) -> io::Result<()> {
    writeln!(w, "kind,id,indicator")?;
    for (e, v) in est.per_edge_jump.iter().enumerate() {
        if !mesh.is_boundary_edge(e) {
            writeln!(w, "edge,{e},{v}")?;
        }
    }
    for (t, v) in est.per_element_volume.iter().enumerate() {
        writeln!(w, "element,{t},{v}")?;
    }
    Ok(())
}

/// Coordinate format, `row col value` per stored entry, 0-based.
pub fn write_matrix<W: Write>(w: &mut W, a: &SparseSymMatrix) -> io::Result<()> {
    for (i, j, v) in a.triplets() {
        writeln!(w, "{i} {j} {v}")?;
    }
    Ok(())
}
