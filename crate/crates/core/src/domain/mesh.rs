//! Indexed triangle meshes (flat 2D or embedded in 3D) with derived edge
//! connectivity, boundary classification and face areas, plus structured
//! generators used by tests and the CLI demos.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::scalar::{real, to_f64, Real};

#[derive(Debug, Error)]
pub enum MeshError {
    #[error("triangle {face} references vertex {vertex} out of range ({vertices} vertices)")]
    IndexOutOfRange { face: usize, vertex: usize, vertices: usize },
    #[error("triangle {face} is degenerate (area {area:e})")]
    DegenerateFace { face: usize, area: f64 },
    #[error("edge ({a}, {b}) is shared by more than two triangles")]
    NonManifoldEdge { a: usize, b: usize },
    #[error("vertex {0} is not referenced by any triangle")]
    IsolatedVertex(usize),
    #[error("mesh has no triangles")]
    Empty,
    #[error("{0}")]
    BadParameters(String),
}

/// Unique undirected edge with its incident faces and the vertex opposite
/// the edge within each face.
#[derive(Clone, Debug)]
pub struct Edge {
    pub vertices: [usize; 2],
    pub faces: Vec<usize>,
    pub opposite: Vec<usize>,
}

impl Edge {
    pub fn is_boundary(&self) -> bool {
        self.faces.len() == 1
    }
}

#[derive(Clone, Debug)]
pub struct TriMesh<T> {
    dim: usize,
    positions: Vec<[T; 3]>,
    triangles: Vec<[usize; 3]>,
    edges: Vec<Edge>,
    /// per face, the edge opposite each local vertex
    face_edges: Vec<[usize; 3]>,
    face_areas: Vec<T>,
    is_boundary_vertex: Vec<bool>,
    boundary_vertices: Vec<usize>,
    interior_vertices: Vec<usize>,
}

impl<T: Real> TriMesh<T> {
    /// Builds and validates a mesh. 2D triangles with negative signed area
    /// are reoriented counter-clockwise so downstream operator signs are
    /// deterministic.
    pub fn new(
        dim: usize,
        positions: Vec<[T; 3]>,
        mut triangles: Vec<[usize; 3]>,
    ) -> Result<Self, MeshError> {
        assert!(dim == 2 || dim == 3, "mesh dimension must be 2 or 3");
        if triangles.is_empty() {
            return Err(MeshError::Empty);
        }
        let n = positions.len();
        for (face, tri) in triangles.iter().enumerate() {
            for &v in tri {
                if v >= n {
                    return Err(MeshError::IndexOutOfRange { face, vertex: v, vertices: n });
                }
            }
        }
        let mut referenced = vec![false; n];
        for tri in &triangles {
            for &v in tri {
                referenced[v] = true;
            }
        }
        if let Some(v) = referenced.iter().position(|&r| !r) {
            return Err(MeshError::IsolatedVertex(v));
        }

        let mut lo = [T::infinity(); 3];
        let mut hi = [T::neg_infinity(); 3];
        for p in &positions {
            for c in 0..3 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        let diag_sq = (0..3).fold(T::zero(), |acc, c| {
            let d = hi[c] - lo[c];
            acc + d * d
        });
        let area_tol = real::<T>(1e-14) * diag_sq;

        let mut face_areas = Vec::with_capacity(triangles.len());
        for (face, tri) in triangles.iter_mut().enumerate() {
            if dim == 2 {
                let signed = signed_area_2d(&positions, tri);
                if signed < T::zero() {
                    tri.swap(1, 2);
                }
            }
            let area = triangle_area(&positions, tri);
            if !(area > area_tol) {
                return Err(MeshError::DegenerateFace { face, area: to_f64(area) });
            }
            face_areas.push(area);
        }

        // canonical edge list, sorted by vertex pair
        let mut edge_map: BTreeMap<(usize, usize), Vec<(usize, usize)>> = BTreeMap::new();
        for (face, tri) in triangles.iter().enumerate() {
            for corner in 0..3 {
                let a = tri[(corner + 1) % 3];
                let b = tri[(corner + 2) % 3];
                let key = (a.min(b), a.max(b));
                let incidences = edge_map.entry(key).or_default();
                incidences.push((face, tri[corner]));
                if incidences.len() > 2 {
                    return Err(MeshError::NonManifoldEdge { a: key.0, b: key.1 });
                }
            }
        }
        let mut edges = Vec::with_capacity(edge_map.len());
        let mut edge_index: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        for (key, incidences) in edge_map {
            edge_index.insert(key, edges.len());
            edges.push(Edge {
                vertices: [key.0, key.1],
                faces: incidences.iter().map(|&(f, _)| f).collect(),
                opposite: incidences.iter().map(|&(_, o)| o).collect(),
            });
        }
        let mut face_edges = vec![[0usize; 3]; triangles.len()];
        for (face, tri) in triangles.iter().enumerate() {
            for corner in 0..3 {
                let a = tri[(corner + 1) % 3];
                let b = tri[(corner + 2) % 3];
                face_edges[face][corner] = edge_index[&(a.min(b), a.max(b))];
            }
        }

        let mut is_boundary_vertex = vec![false; n];
        for edge in &edges {
            if edge.is_boundary() {
                is_boundary_vertex[edge.vertices[0]] = true;
                is_boundary_vertex[edge.vertices[1]] = true;
            }
        }
        let boundary_vertices: Vec<usize> =
            (0..n).filter(|&v| is_boundary_vertex[v]).collect();
        let interior_vertices: Vec<usize> =
            (0..n).filter(|&v| !is_boundary_vertex[v]).collect();

        Ok(Self {
            dim,
            positions,
            triangles,
            edges,
            face_edges,
            face_areas,
            is_boundary_vertex,
            boundary_vertices,
            interior_vertices,
        })
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn num_vertices(&self) -> usize {
        self.positions.len()
    }

    pub fn num_faces(&self) -> usize {
        self.triangles.len()
    }

    pub fn num_edges(&self) -> usize {
        self.edges.len()
    }

    pub fn position(&self, v: usize) -> [T; 3] {
        self.positions[v]
    }

    pub fn positions(&self) -> &[[T; 3]] {
        &self.positions
    }

    pub fn triangles(&self) -> &[[usize; 3]] {
        &self.triangles
    }

    pub fn triangle(&self, f: usize) -> [usize; 3] {
        self.triangles[f]
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn face_edges(&self, f: usize) -> [usize; 3] {
        self.face_edges[f]
    }

    pub fn face_area(&self, f: usize) -> T {
        self.face_areas[f]
    }

    pub fn total_area(&self) -> T {
        self.face_areas.iter().fold(T::zero(), |acc, &a| acc + a)
    }

    pub fn is_boundary_vertex(&self, v: usize) -> bool {
        self.is_boundary_vertex[v]
    }

    pub fn boundary_vertices(&self) -> &[usize] {
        &self.boundary_vertices
    }

    pub fn interior_vertices(&self) -> &[usize] {
        &self.interior_vertices
    }

    pub fn edge_length(&self, e: usize) -> T {
        let [a, b] = self.edges[e].vertices;
        distance(self.positions[a], self.positions[b])
    }

    pub fn mean_edge_length(&self) -> T {
        let total = (0..self.edges.len())
            .fold(T::zero(), |acc, e| acc + self.edge_length(e));
        total / real(self.edges.len() as f64)
    }

    pub fn bbox_diagonal(&self) -> T {
        let mut lo = [T::infinity(); 3];
        let mut hi = [T::neg_infinity(); 3];
        for p in &self.positions {
            for c in 0..3 {
                lo[c] = lo[c].min(p[c]);
                hi[c] = hi[c].max(p[c]);
            }
        }
        (0..3)
            .fold(T::zero(), |acc, c| {
                let d = hi[c] - lo[c];
                acc + d * d
            })
            .sqrt()
    }

    /// Same connectivity with new vertex positions (used by geometric flows).
    pub fn with_positions(&self, positions: Vec<[T; 3]>) -> Result<Self, MeshError> {
        assert_eq!(positions.len(), self.positions.len());
        Self::new(self.dim, positions, self.triangles.clone())
    }

    /// Interior angle at `tri[corner]`.
    pub fn corner_angle(&self, face: usize, corner: usize) -> T {
        let tri = self.triangles[face];
        let p = self.positions[tri[corner]];
        let a = self.positions[tri[(corner + 1) % 3]];
        let b = self.positions[tri[(corner + 2) % 3]];
        let u = sub(a, p);
        let v = sub(b, p);
        let cosang = dot(u, v) / (norm(u) * norm(v));
        cosang.min(T::one()).max(-T::one()).acos()
    }
}

fn sub<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [a[0] - b[0], a[1] - b[1], a[2] - b[2]]
}

fn dot<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    a[0] * b[0] + a[1] * b[1] + a[2] * b[2]
}

pub(crate) fn cross<T: Real>(a: [T; 3], b: [T; 3]) -> [T; 3] {
    [
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ]
}

fn norm<T: Real>(a: [T; 3]) -> T {
    dot(a, a).sqrt()
}

fn distance<T: Real>(a: [T; 3], b: [T; 3]) -> T {
    norm(sub(a, b))
}

fn signed_area_2d<T: Real>(positions: &[[T; 3]], tri: &[usize; 3]) -> T {
    let [a, b, c] = [positions[tri[0]], positions[tri[1]], positions[tri[2]]];
    ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])) * real(0.5)
}

fn triangle_area<T: Real>(positions: &[[T; 3]], tri: &[usize; 3]) -> T {
    let [a, b, c] = [positions[tri[0]], positions[tri[1]], positions[tri[2]]];
    norm(cross(sub(b, a), sub(c, a))) * real(0.5)
}

/// Structured triangulated annulus: `nr+1` concentric rings of `ntheta`
/// vertices between radii `r0 < r1`. Inner and outer rings are boundary.
pub fn annulus_mesh<T: Real>(
    r0: T,
    r1: T,
    nr: usize,
    ntheta: usize,
) -> Result<TriMesh<T>, MeshError> {
    if !(r0 > T::zero() && r1 > r0) {
        return Err(MeshError::BadParameters(format!(
            "annulus radii must satisfy 0 < r0 < r1, got r0={r0}, r1={r1}"
        )));
    }
    if nr < 1 || ntheta < 3 {
        return Err(MeshError::BadParameters(format!(
            "annulus resolution must have nr >= 1 and ntheta >= 3, got nr={nr}, ntheta={ntheta}"
        )));
    }
    let mut positions = Vec::with_capacity((nr + 1) * ntheta);
    for ring in 0..=nr {
        let r = r0 + (r1 - r0) * real::<T>(ring as f64 / nr as f64);
        for s in 0..ntheta {
            let theta = real::<T>(2.0 * std::f64::consts::PI * s as f64 / ntheta as f64);
            positions.push([r * theta.cos(), r * theta.sin(), T::zero()]);
        }
    }
    let vid = |ring: usize, s: usize| ring * ntheta + s % ntheta;
    let mut triangles = Vec::with_capacity(2 * nr * ntheta);
    for ring in 0..nr {
        for s in 0..ntheta {
            let v00 = vid(ring, s);
            let v01 = vid(ring, s + 1);
            let v10 = vid(ring + 1, s);
            let v11 = vid(ring + 1, s + 1);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    TriMesh::new(2, positions, triangles)
}

/// Structured triangulated disk of radius `r`: a center fan plus `nr-1`
/// annular strips, `ntheta` vertices per ring.
pub fn disk_mesh<T: Real>(r: T, nr: usize, ntheta: usize) -> Result<TriMesh<T>, MeshError> {
    if !(r > T::zero()) || nr < 1 || ntheta < 3 {
        return Err(MeshError::BadParameters(format!(
            "disk needs r > 0, nr >= 1, ntheta >= 3, got r={r}, nr={nr}, ntheta={ntheta}"
        )));
    }
    let mut positions = vec![[T::zero(); 3]];
    for ring in 1..=nr {
        let radius = r * real::<T>(ring as f64 / nr as f64);
        for s in 0..ntheta {
            let theta = real::<T>(2.0 * std::f64::consts::PI * s as f64 / ntheta as f64);
            positions.push([radius * theta.cos(), radius * theta.sin(), T::zero()]);
        }
    }
    let vid = |ring: usize, s: usize| 1 + (ring - 1) * ntheta + s % ntheta;
    let mut triangles = Vec::new();
    for s in 0..ntheta {
        triangles.push([0, vid(1, s), vid(1, s + 1)]);
    }
    for ring in 1..nr {
        for s in 0..ntheta {
            let v00 = vid(ring, s);
            let v01 = vid(ring, s + 1);
            let v10 = vid(ring + 1, s);
            let v11 = vid(ring + 1, s + 1);
            triangles.push([v00, v10, v11]);
            triangles.push([v00, v11, v01]);
        }
    }
    TriMesh::new(2, positions, triangles)
}

/// Regular triangulation of the `[0, len]²` square with `cells` cells per
/// side. Diagonals alternate direction per cell; a uniform diagonal
/// direction gives the condensed Hessian form spurious zero modes.
pub fn square_mesh<T: Real>(cells: usize, len: T) -> Result<TriMesh<T>, MeshError> {
    if cells < 1 || !(len > T::zero()) {
        return Err(MeshError::BadParameters(format!(
            "square needs cells >= 1 and positive side, got cells={cells}, len={len}"
        )));
    }
    let nv = cells + 1;
    let h = len / real(cells as f64);
    let mut positions = Vec::with_capacity(nv * nv);
    for j in 0..nv {
        for i in 0..nv {
            positions.push([real::<T>(i as f64) * h, real::<T>(j as f64) * h, T::zero()]);
        }
    }
    let vid = |i: usize, j: usize| j * nv + i;
    let mut triangles = Vec::with_capacity(2 * cells * cells);
    for j in 0..cells {
        for i in 0..cells {
            let (a, b, c, d) = (vid(i, j), vid(i + 1, j), vid(i + 1, j + 1), vid(i, j + 1));
            if (i + j) % 2 == 0 {
                triangles.push([a, b, c]);
                triangles.push([a, c, d]);
            } else {
                triangles.push([a, b, d]);
                triangles.push([b, c, d]);
            }
        }
    }
    TriMesh::new(2, positions, triangles)
}

/// Icosphere of radius 1: subdivided icosahedron projected to the unit
/// sphere. `subdivisions = 2` gives 320 faces.
pub fn sphere_mesh<T: Real>(subdivisions: usize) -> TriMesh<T> {
    let phi = (1.0 + 5.0f64.sqrt()) / 2.0;
    let base: Vec<[f64; 3]> = vec![
        [-1.0, phi, 0.0],
        [1.0, phi, 0.0],
        [-1.0, -phi, 0.0],
        [1.0, -phi, 0.0],
        [0.0, -1.0, phi],
        [0.0, 1.0, phi],
        [0.0, -1.0, -phi],
        [0.0, 1.0, -phi],
        [phi, 0.0, -1.0],
        [phi, 0.0, 1.0],
        [-phi, 0.0, -1.0],
        [-phi, 0.0, 1.0],
    ];
    let mut positions: Vec<[f64; 3]> = base
        .into_iter()
        .map(|p| {
            let n = (p[0] * p[0] + p[1] * p[1] + p[2] * p[2]).sqrt();
            [p[0] / n, p[1] / n, p[2] / n]
        })
        .collect();
    let mut triangles: Vec<[usize; 3]> = vec![
        [0, 11, 5],
        [0, 5, 1],
        [0, 1, 7],
        [0, 7, 10],
        [0, 10, 11],
        [1, 5, 9],
        [5, 11, 4],
        [11, 10, 2],
        [10, 7, 6],
        [7, 1, 8],
        [3, 9, 4],
        [3, 4, 2],
        [3, 2, 6],
        [3, 6, 8],
        [3, 8, 9],
        [4, 9, 5],
        [2, 4, 11],
        [6, 2, 10],
        [8, 6, 7],
        [9, 8, 1],
    ];
    for _ in 0..subdivisions {
        let mut midpoint: BTreeMap<(usize, usize), usize> = BTreeMap::new();
        let mut next = Vec::with_capacity(triangles.len() * 4);
        for tri in &triangles {
            let mut mids = [0usize; 3];
            for corner in 0..3 {
                let a = tri[corner];
                let b = tri[(corner + 1) % 3];
                let key = (a.min(b), a.max(b));
                mids[corner] = *midpoint.entry(key).or_insert_with(|| {
                    let pa = positions[a];
                    let pb = positions[b];
                    let mut m = [
                        (pa[0] + pb[0]) / 2.0,
                        (pa[1] + pb[1]) / 2.0,
                        (pa[2] + pb[2]) / 2.0,
                    ];
                    let n = (m[0] * m[0] + m[1] * m[1] + m[2] * m[2]).sqrt();
                    m = [m[0] / n, m[1] / n, m[2] / n];
                    positions.push(m);
                    positions.len() - 1
                });
            }
            next.push([tri[0], mids[0], mids[2]]);
            next.push([tri[1], mids[1], mids[0]]);
            next.push([tri[2], mids[2], mids[1]]);
            next.push([mids[0], mids[1], mids[2]]);
        }
        triangles = next;
    }
    let positions: Vec<[T; 3]> = positions
        .into_iter()
        .map(|p| [real(p[0]), real(p[1]), real(p[2])])
        .collect();
    TriMesh::new(3, positions, triangles).expect("icosphere construction is valid")
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_triangle_classification() {
        let mesh = TriMesh::<f64>::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap();
        assert_eq!(mesh.num_faces(), 1);
        assert!((mesh.face_area(0) - 0.5).abs() < 1e-15);
        assert_eq!(mesh.boundary_vertices(), &[0, 1, 2]);
        assert!(mesh.interior_vertices().is_empty());
    }

    #[test]
    fn split_square_edge_count() {
        let mesh = TriMesh::new(
            2,
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [1.0, 1.0, 0.0],
                [0.0, 1.0, 0.0],
            ],
            vec![[0, 1, 2], [0, 2, 3]],
        )
        .unwrap();
        assert_eq!(mesh.num_edges(), 5);
        let interior_edges = mesh.edges().iter().filter(|e| !e.is_boundary()).count();
        assert_eq!(interior_edges, 1);
        assert!(mesh.interior_vertices().is_empty());
    }

    #[test]
    fn clockwise_2d_triangle_is_reoriented() {
        let mesh = TriMesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 2, 1]],
        )
        .unwrap();
        let tri = mesh.triangle(0);
        let a = mesh.position(tri[0]);
        let b = mesh.position(tri[1]);
        let c = mesh.position(tri[2]);
        let signed = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]);
        assert!(signed > 0.0);
    }

    #[test]
    fn minimal_annulus_counts() {
        let mesh = annulus_mesh(1.0, 2.0, 1, 4).unwrap();
        assert_eq!(mesh.num_vertices(), 8);
        assert_eq!(mesh.num_faces(), 8);
        assert_eq!(mesh.interior_vertices().len(), 0);
    }

    #[test]
    fn two_ring_annulus_interior() {
        let mesh = annulus_mesh(1.0, 2.0, 2, 8).unwrap();
        assert_eq!(mesh.num_vertices(), 24);
        assert_eq!(mesh.interior_vertices().len(), 8);
    }

    #[test]
    fn annulus_area_converges_to_analytic() {
        let mesh = annulus_mesh(1.0f64, 2.0, 8, 64).unwrap();
        let analytic = std::f64::consts::PI * (4.0 - 1.0);
        let rel = (mesh.total_area() - analytic).abs() / analytic;
        assert!(rel < 2.0 / 64.0f64.powi(2) * 10.0, "relative area error {rel}");
    }

    #[test]
    fn degenerate_triangle_is_rejected_with_face_id() {
        let result = TriMesh::new(
            2,
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [2.0, 0.0, 0.0],
            ],
            vec![[0, 1, 2], [0, 1, 3]],
        );
        match result {
            Err(MeshError::DegenerateFace { face, .. }) => assert_eq!(face, 1),
            other => panic!("expected degenerate face, got {other:?}"),
        }
    }

    #[test]
    fn non_manifold_edge_is_rejected() {
        let result = TriMesh::new(
            3,
            vec![
                [0.0, 0.0, 0.0],
                [1.0, 0.0, 0.0],
                [0.0, 1.0, 0.0],
                [0.0, 0.0, 1.0],
                [0.0, -1.0, 0.0],
            ],
            vec![[0, 1, 2], [0, 1, 3], [0, 1, 4]],
        );
        assert!(matches!(result, Err(MeshError::NonManifoldEdge { a: 0, b: 1 })));
    }

    #[test]
    fn sphere_is_closed() {
        let mesh = sphere_mesh::<f64>(1);
        assert_eq!(mesh.num_faces(), 80);
        assert!(mesh.boundary_vertices().is_empty());
        // Euler characteristic of a sphere: V - E + F = 2
        let euler = mesh.num_vertices() as isize - mesh.num_edges() as isize
            + mesh.num_faces() as isize;
        assert_eq!(euler, 2);
    }

    #[test]
    fn square_mesh_boundary() {
        let mesh = square_mesh(3, 1.0f64).unwrap();
        assert_eq!(mesh.num_vertices(), 16);
        assert_eq!(mesh.interior_vertices().len(), 4);
        assert!((mesh.total_area() - 1.0).abs() < 1e-12);
    }
}
