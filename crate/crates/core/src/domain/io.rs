//! File parsing and serialization: OFF/OBJ meshes, PGM grid masks, CSV
//! scattered-data lists.

use thiserror::Error;

use crate::domain::grid::{GridDomain, GridError};
use crate::domain::mesh::{MeshError, TriMesh};
use crate::scalar::{real, Real};

#[derive(Debug, Error)]
pub enum IoError {
    #[error("{format} parse error at line {line}: {message}")]
    Malformed { format: &'static str, line: usize, message: String },
    #[error("mesh validation failed: {0}")]
    Mesh(#[from] MeshError),
    #[error("grid construction failed: {0}")]
    Grid(#[from] GridError),
    #[error("input is not valid UTF-8")]
    NotUtf8,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MeshFormat {
    Off,
    Obj,
}

/// Parses an ASCII OFF or OBJ file with triangular faces into a validated
/// mesh. Meshes whose vertices all have `z = 0` are treated as flat 2D.
pub fn parse_mesh<T: Real>(bytes: &[u8], format: MeshFormat) -> Result<TriMesh<T>, IoError> {
    let text = std::str::from_utf8(bytes).map_err(|_| IoError::NotUtf8)?;
    let (positions, triangles) = match format {
        MeshFormat::Off => parse_off_ascii(text)?,
        MeshFormat::Obj => parse_obj_ascii(text)?,
    };
    let dim = if positions.iter().all(|p| p[2] == 0.0) { 2 } else { 3 };
    let positions = positions
        .into_iter()
        .map(|p| [real(p[0]), real(p[1]), real(p[2])])
        .collect();
    Ok(TriMesh::new(dim, positions, triangles)?)
}

/// Guesses the format from a file name extension (`.off` / `.obj`).
pub fn mesh_format_for_path(path: &str) -> Option<MeshFormat> {
    let lower = path.to_ascii_lowercase();
    if lower.ends_with(".off") {
        Some(MeshFormat::Off)
    } else if lower.ends_with(".obj") {
        Some(MeshFormat::Obj)
    } else {
        None
    }
}

fn parse_off_ascii(text: &str) -> Result<(Vec<[f64; 3]>, Vec<[usize; 3]>), IoError> {
    let err = |line: usize, message: String| IoError::Malformed { format: "OFF", line, message };
    let mut lines = text
        .lines()
        .enumerate()
        .map(|(i, l)| (i + 1, l.split('#').next().unwrap_or("").trim()))
        .filter(|(_, l)| !l.is_empty());

    let (line_no, header) = lines.next().ok_or_else(|| err(0, "empty file".into()))?;
    let mut counts: Vec<&str>;
    if header == "OFF" {
        let (line_no, counts_line) =
            lines.next().ok_or_else(|| err(line_no, "missing counts line".into()))?;
        counts = counts_line.split_whitespace().collect();
        if counts.len() < 2 {
            return Err(err(line_no, format!("expected 'nv nf ne', got '{counts_line}'")));
        }
    } else if let Some(rest) = header.strip_prefix("OFF") {
        counts = rest.split_whitespace().collect();
        if counts.len() < 2 {
            return Err(err(line_no, format!("expected 'OFF nv nf ne', got '{header}'")));
        }
    } else {
        return Err(err(line_no, format!("missing OFF header, got '{header}'")));
    }
    counts.truncate(3);
    let nv: usize = counts[0]
        .parse()
        .map_err(|_| err(line_no, format!("bad vertex count '{}'", counts[0])))?;
    let nf: usize = counts[1]
        .parse()
        .map_err(|_| err(line_no, format!("bad face count '{}'", counts[1])))?;

    let mut positions = Vec::with_capacity(nv);
    for _ in 0..nv {
        let (line_no, line) = lines.next().ok_or_else(|| err(0, "unexpected end of vertex list".into()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() < 3 {
            return Err(err(line_no, format!("vertex needs 3 coordinates, got '{line}'")));
        }
        let mut p = [0.0f64; 3];
        for (c, field) in fields.iter().take(3).enumerate() {
            p[c] = field
                .parse()
                .map_err(|_| err(line_no, format!("bad coordinate '{field}'")))?;
        }
        positions.push(p);
    }
    let mut triangles = Vec::with_capacity(nf);
    for _ in 0..nf {
        let (line_no, line) = lines.next().ok_or_else(|| err(0, "unexpected end of face list".into()))?;
        let fields: Vec<&str> = line.split_whitespace().collect();
        let arity: usize = fields
            .first()
            .and_then(|f| f.parse().ok())
            .ok_or_else(|| err(line_no, format!("bad face line '{line}'")))?;
        if arity != 3 || fields.len() < 4 {
            return Err(err(line_no, format!("only triangular faces are supported, got '{line}'")));
        }
        let mut tri = [0usize; 3];
        for (c, field) in fields[1..4].iter().enumerate() {
            tri[c] = field
                .parse()
                .map_err(|_| err(line_no, format!("bad vertex index '{field}'")))?;
        }
        triangles.push(tri);
    }
    Ok((positions, triangles))
}

fn parse_obj_ascii(text: &str) -> Result<(Vec<[f64; 3]>, Vec<[usize; 3]>), IoError> {
    let err = |line: usize, message: String| IoError::Malformed { format: "OBJ", line, message };
    let mut positions = Vec::new();
    let mut triangles: Vec<[usize; 3]> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line_no = idx + 1;
        let line = raw.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let mut fields = line.split_whitespace();
        match fields.next() {
            Some("v") => {
                let coords: Vec<&str> = fields.collect();
                if coords.len() < 2 {
                    return Err(err(line_no, format!("vertex needs at least x y, got '{line}'")));
                }
                let mut p = [0.0f64; 3];
                for (c, field) in coords.iter().take(3).enumerate() {
                    p[c] = field
                        .parse()
                        .map_err(|_| err(line_no, format!("bad coordinate '{field}'")))?;
                }
                positions.push(p);
            }
            Some("f") => {
                let corners: Vec<&str> = fields.collect();
                if corners.len() != 3 {
                    return Err(err(
                        line_no,
                        format!("only triangular faces are supported, got {} corners", corners.len()),
                    ));
                }
                let mut tri = [0usize; 3];
                for (c, corner) in corners.iter().enumerate() {
                    let index_part = corner.split('/').next().unwrap_or("");
                    let one_based: i64 = index_part
                        .parse()
                        .map_err(|_| err(line_no, format!("bad vertex index '{corner}'")))?;
                    if one_based < 1 {
                        return Err(err(line_no, format!("vertex index must be >= 1, got {one_based}")));
                    }
                    tri[c] = (one_based - 1) as usize;
                }
                triangles.push(tri);
            }
            _ => {} // normals, texcoords, groups, materials: ignored
        }
    }
    Ok((positions, triangles))
}

/// Serializes a mesh to ASCII OFF. Coordinates use shortest round-trip
/// formatting, so `parse_mesh(write_off(m))` reproduces positions bit-exactly.
pub fn write_off<T: Real>(mesh: &TriMesh<T>) -> String {
    let mut out = String::from("OFF\n");
    out.push_str(&format!("{} {} 0\n", mesh.num_vertices(), mesh.num_faces()));
    for v in 0..mesh.num_vertices() {
        let p = mesh.position(v);
        out.push_str(&format!("{} {} {}\n", p[0], p[1], p[2]));
    }
    for tri in mesh.triangles() {
        out.push_str(&format!("3 {} {} {}\n", tri[0], tri[1], tri[2]));
    }
    out
}

/// A grayscale PGM image (P2 or P5, maxval up to 255).
pub struct PgmImage {
    pub width: usize,
    pub height: usize,
    pub pixels: Vec<u8>,
}

pub fn parse_pgm(bytes: &[u8]) -> Result<PgmImage, IoError> {
    let err = |message: String| IoError::Malformed { format: "PGM", line: 0, message };
    // header tokens (magic, width, height, maxval) with '#' comments
    let mut pos = 0usize;
    let mut tokens: Vec<String> = Vec::new();
    while tokens.len() < 4 && pos < bytes.len() {
        let b = bytes[pos];
        if b == b'#' {
            while pos < bytes.len() && bytes[pos] != b'\n' {
                pos += 1;
            }
        } else if b.is_ascii_whitespace() {
            pos += 1;
        } else {
            let start = pos;
            while pos < bytes.len() && !bytes[pos].is_ascii_whitespace() && bytes[pos] != b'#' {
                pos += 1;
            }
            tokens.push(String::from_utf8_lossy(&bytes[start..pos]).into_owned());
        }
    }
    if tokens.len() < 4 {
        return Err(err("truncated header".into()));
    }
    let magic = tokens[0].as_str();
    if magic != "P2" && magic != "P5" {
        return Err(err(format!("expected P2 or P5 magic, got '{magic}'")));
    }
    let width: usize = tokens[1].parse().map_err(|_| err(format!("bad width '{}'", tokens[1])))?;
    let height: usize = tokens[2].parse().map_err(|_| err(format!("bad height '{}'", tokens[2])))?;
    let maxval: usize = tokens[3].parse().map_err(|_| err(format!("bad maxval '{}'", tokens[3])))?;
    if maxval == 0 || maxval > 255 {
        return Err(err(format!("unsupported maxval {maxval} (expected 1..=255)")));
    }
    let count = width * height;
    let pixels = if magic == "P5" {
        pos += 1; // single whitespace after maxval
        if bytes.len() < pos + count {
            return Err(err("truncated P5 pixel data".into()));
        }
        bytes[pos..pos + count].to_vec()
    } else {
        let text = std::str::from_utf8(&bytes[pos..]).map_err(|_| IoError::NotUtf8)?;
        let values: Result<Vec<u8>, _> = text
            .split_whitespace()
            .take(count)
            .map(|t| t.parse::<u8>())
            .collect();
        let values = values.map_err(|_| err("bad P2 pixel value".into()))?;
        if values.len() < count {
            return Err(err("truncated P2 pixel data".into()));
        }
        values
    };
    Ok(PgmImage { width, height, pixels })
}

/// Builds a masked grid from a PGM image: pixels with value `>= threshold`
/// belong to the domain. Pixel `(column, row)` becomes node `(i=column,
/// j=row)` at `(i·h, j·h)`.
pub fn grid_from_mask<T: Real>(bytes: &[u8], h: T, threshold: u8) -> Result<GridDomain<T>, IoError> {
    let image = parse_pgm(bytes)?;
    let mask: Vec<bool> = image.pixels.iter().map(|&p| p >= threshold).collect();
    let grid = GridDomain::from_mask(image.width, image.height, h, mask)?;
    if grid.num_interior() == 0 {
        return Err(IoError::Grid(GridError::EmptyInterior));
    }
    Ok(grid)
}

/// Scattered-data CSV: header `x,y,value` or `x,y,z,value`, one point per
/// row, `.` as the decimal separator. Returns points (z = 0 for 2D input)
/// and values.
pub fn read_scattered_csv<T: Real>(text: &str) -> Result<(Vec<[T; 3]>, Vec<T>), IoError> {
    let err = |line: usize, message: String| IoError::Malformed { format: "CSV", line, message };
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| err(0, "empty file".into()))?;
    let columns: Vec<&str> = header.split(',').map(str::trim).collect();
    let has_z = match columns.as_slice() {
        ["x", "y", "value"] => false,
        ["x", "y", "z", "value"] => true,
        _ => {
            return Err(err(1, format!("expected header 'x,y[,z],value', got '{header}'")));
        }
    };
    let mut points = Vec::new();
    let mut values = Vec::new();
    for (idx, raw) in lines {
        let line_no = idx + 1;
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        let fields: Vec<&str> = line.split(',').map(str::trim).collect();
        let expected = if has_z { 4 } else { 3 };
        if fields.len() != expected {
            return Err(err(line_no, format!("expected {expected} fields, got {}", fields.len())));
        }
        let parse = |field: &str| -> Result<f64, IoError> {
            field.parse().map_err(|_| err(line_no, format!("bad number '{field}'")))
        };
        let x = parse(fields[0])?;
        let y = parse(fields[1])?;
        let z = if has_z { parse(fields[2])? } else { 0.0 };
        let value = parse(fields[expected - 1])?;
        points.push([real(x), real(y), real(z)]);
        values.push(real(value));
    }
    Ok((points, values))
}
