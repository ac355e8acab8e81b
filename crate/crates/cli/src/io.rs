//! Input loading and deterministic output writers.

use std::fs;
use std::path::{Path, PathBuf};

use hessmooth_core::domain::{grid_from_mask, mesh_format_for_path, parse_mesh, read_scattered_csv};
use hessmooth_core::{GridDomain, TriMesh};

use crate::{CliError, DomainArgs};

/// Either kind of domain, loaded from disk.
pub enum Domain {
    Grid(GridDomain<f64>),
    Mesh(TriMesh<f64>),
}

impl Domain {
    pub fn num_dofs(&self) -> usize {
        match self {
            Domain::Grid(g) => g.num_dofs(),
            Domain::Mesh(m) => m.num_vertices(),
        }
    }
}

fn read_file(role: &str, path: &str) -> Result<Vec<u8>, CliError> {
    if !Path::new(path).exists() {
        return Err(CliError::Config(format!("{role}: file not found")));
    }
    fs::read(path).map_err(|err| CliError::Config(format!("{role}: {err}")))
}

pub fn load_domain(args: &DomainArgs) -> Result<Domain, CliError> {
    match (&args.mesh, &args.grid) {
        (Some(path), None) => {
            let format = mesh_format_for_path(path).ok_or_else(|| {
                CliError::Config(format!("mesh: unsupported extension on '{path}' (expected .off or .obj)"))
            })?;
            let bytes = read_file("mesh", path)?;
            let mesh = parse_mesh(&bytes, format)
                .map_err(|err| CliError::Config(format!("mesh: {err}")))?;
            Ok(Domain::Mesh(mesh))
        }
        (None, Some(path)) => {
            let h = args
                .h
                .ok_or_else(|| CliError::Config("grid: --h is required with --grid".into()))?;
            if !(h > 0.0) {
                return Err(CliError::Config("grid: --h must be positive".into()));
            }
            let bytes = read_file("grid", path)?;
            let grid = grid_from_mask(&bytes, h, args.threshold)
                .map_err(|err| CliError::Config(format!("grid: {err}")))?;
            Ok(Domain::Grid(grid))
        }
        _ => Err(CliError::Config("exactly one of --mesh or --grid is required".into())),
    }
}

/// Scattered points CSV (`x,y[,z],value`).
pub fn load_scattered(role: &str, path: &str) -> Result<(Vec<[f64; 3]>, Vec<f64>), CliError> {
    let bytes = read_file(role, path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Config(format!("{role}: not valid UTF-8")))?;
    read_scattered_csv(&text).map_err(|err| CliError::Config(format!("{role}: {err}")))
}

/// Dense field CSV (`index,value`), one row per node.
pub fn load_field(role: &str, path: &str, n: usize) -> Result<Vec<f64>, CliError> {
    let bytes = read_file(role, path)?;
    let text = String::from_utf8(bytes)
        .map_err(|_| CliError::Config(format!("{role}: not valid UTF-8")))?;
    let mut lines = text.lines();
    match lines.next() {
        Some(header) if header.trim() == "index,value" => {}
        other => {
            return Err(CliError::Config(format!(
                "{role}: expected header 'index,value', got {other:?}"
            )));
        }
    }
    let mut field = vec![None; n];
    for (lineno, line) in lines.enumerate() {
        let line = line.trim();
        if line.is_empty() {
            continue;
        }
        let mut parts = line.split(',');
        let parse = || CliError::Config(format!("{role}: bad row at line {}", lineno + 2));
        let index: usize = parts.next().ok_or_else(parse)?.trim().parse().map_err(|_| parse())?;
        let value: f64 = parts.next().ok_or_else(parse)?.trim().parse().map_err(|_| parse())?;
        if index >= n {
            return Err(CliError::Config(format!(
                "{role}: index {index} out of range for {n} nodes"
            )));
        }
        field[index] = Some(value);
    }
    field
        .into_iter()
        .enumerate()
        .map(|(i, v)| v.ok_or_else(|| CliError::Config(format!("{role}: missing value for node {i}"))))
        .collect()
}

pub struct OutDir {
    root: PathBuf,
}

impl OutDir {
    pub fn create(path: &str) -> Result<Self, CliError> {
        fs::create_dir_all(path)
            .map_err(|err| CliError::Output(format!("out: cannot create '{path}': {err}")))?;
        Ok(Self { root: PathBuf::from(path) })
    }

    pub fn write(&self, name: &str, contents: &str) -> Result<(), CliError> {
        let path = self.root.join(name);
        fs::write(&path, contents)
            .map_err(|err| CliError::Output(format!("out: cannot write '{}': {err}", path.display())))
    }
}

/// `index,value` CSV with shortest round-trip decimals.
pub fn field_csv(values: &[f64]) -> String {
    let mut out = String::from("index,value\n");
    for (i, v) in values.iter().enumerate() {
        out.push_str(&format!("{i},{v}\n"));
    }
    out
}

fn byte_level(value: f64, lo: f64, hi: f64) -> u8 {
    if !(hi > lo) {
        return 128;
    }
    let t = ((value - lo) / (hi - lo)).clamp(0.0, 1.0);
    (t * 255.0).round() as u8
}

pub fn value_range(values: &[f64], range: &Option<Vec<f64>>) -> (f64, f64) {
    match range.as_deref() {
        Some([lo, hi]) => (*lo, *hi),
        _ => {
            let lo = values.iter().copied().fold(f64::INFINITY, f64::min);
            let hi = values.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            (lo, hi)
        }
    }
}

/// P2 heatmap over the full grid; nodes outside the mask render black.
pub fn field_pgm(grid: &GridDomain<f64>, values: &[f64], lo: f64, hi: f64) -> String {
    let mut out = format!("P2\n{} {}\n255\n", grid.nx(), grid.ny());
    for j in 0..grid.ny() {
        let mut row = Vec::with_capacity(grid.nx());
        for i in 0..grid.nx() {
            let level = match grid.dof_at_node(i, j) {
                Some(dof) => byte_level(values[dof], lo, hi),
                None => 0,
            };
            row.push(level.to_string());
        }
        out.push_str(&row.join(" "));
        out.push('\n');
    }
    out
}

/// ASCII PLY with per-vertex grayscale colors.
pub fn field_ply(mesh: &TriMesh<f64>, values: &[f64], lo: f64, hi: f64) -> String {
    let mut out = String::from("ply\nformat ascii 1.0\n");
    out.push_str(&format!("element vertex {}\n", mesh.num_vertices()));
    out.push_str("property float x\nproperty float y\nproperty float z\n");
    out.push_str("property uchar red\nproperty uchar green\nproperty uchar blue\n");
    out.push_str(&format!("element face {}\n", mesh.num_faces()));
    out.push_str("property list uchar int vertex_indices\nend_header\n");
    for v in 0..mesh.num_vertices() {
        let p = mesh.position(v);
        let level = byte_level(values[v], lo, hi);
        out.push_str(&format!("{} {} {} {level} {level} {level}\n", p[0], p[1], p[2]));
    }
    for tri in mesh.triangles() {
        out.push_str(&format!("3 {} {} {}\n", tri[0], tri[1], tri[2]));
    }
    out
}

/// Writes `<stem>.csv` plus the visual companion (`.pgm` for grids,
/// `.ply` for meshes).
pub fn write_field(
    dir: &OutDir,
    domain: &Domain,
    stem: &str,
    values: &[f64],
    range: &Option<Vec<f64>>,
) -> Result<(), CliError> {
    dir.write(&format!("{stem}.csv"), &field_csv(values))?;
    let (lo, hi) = value_range(values, range);
    match domain {
        Domain::Grid(grid) => dir.write(&format!("{stem}.pgm"), &field_pgm(grid, values, lo, hi)),
        Domain::Mesh(mesh) => dir.write(&format!("{stem}.ply"), &field_ply(mesh, values, lo, hi)),
    }
}
