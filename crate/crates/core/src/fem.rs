//! Mixed finite-element operators on triangle meshes: cotangent Laplacian,
//! lumped mass, per-face gradients, the condensed squared-Hessian form
//! `GᵀAD M̃⁻¹ DᵀAG`, squared-Laplacian variants, and the Crouzeix-Raviart
//! comparison energy built from edge midpoint elements.

use thiserror::Error;

use crate::domain::mesh::{cross, TriMesh};
use crate::scalar::{real, Real};
use crate::sparse::energy::{DiscreteEnergy, DomainTag, EnergyKind, SecondOrderOp};
use crate::sparse::matrix::{CooMatrix, SparseMatrix};

#[derive(Debug, Error)]
pub enum FemError {
    #[error("mesh has no interior vertex, the energy would be identically zero")]
    NoInteriorVertices,
}

/// First-order operators shared by every mesh energy. The gradient stacks
/// one `m×n` block per ambient coordinate; `laplacian = gradientᵀ·areas·gradient`
/// up to rounding, assembled directly from cotangents.
#[derive(Clone, Debug)]
pub struct FemOperators<T> {
    pub dim: usize,
    pub num_vertices: usize,
    pub num_faces: usize,
    /// `dim·m × n`, block row layout `[Gx; Gy(; Gz)]`
    pub gradient: SparseMatrix<T>,
    pub face_areas: Vec<T>,
    /// lumped vertex mass: one third of the incident face areas
    pub mass: Vec<T>,
    /// positive-semidefinite cotangent Laplacian
    pub laplacian: SparseMatrix<T>,
    pub interior: Vec<usize>,
    pub domain: DomainTag<T>,
}

fn face_gradients<T: Real>(mesh: &TriMesh<T>, face: usize) -> [[T; 3]; 3] {
    let tri = mesh.triangle(face);
    let p: Vec<[T; 3]> = tri.iter().map(|&v| mesh.position(v)).collect();
    let e0 = [p[2][0] - p[1][0], p[2][1] - p[1][1], p[2][2] - p[1][2]];
    let e1 = [p[0][0] - p[2][0], p[0][1] - p[2][1], p[0][2] - p[2][2]];
    let normal = cross(
        [p[1][0] - p[0][0], p[1][1] - p[0][1], p[1][2] - p[0][2]],
        [p[2][0] - p[0][0], p[2][1] - p[0][1], p[2][2] - p[0][2]],
    );
    let norm = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
    let unit = [normal[0] / norm, normal[1] / norm, normal[2] / norm];
    let double_area = norm;
    let rot = |e: [T; 3]| -> [T; 3] {
        let c = cross(unit, e);
        [c[0] / double_area, c[1] / double_area, c[2] / double_area]
    };
    let g0 = rot(e0);
    let g1 = rot(e1);
    // hat gradients sum to zero
    let g2 = [-g0[0] - g1[0], -g0[1] - g1[1], -g0[2] - g1[2]];
    [g0, g1, g2]
}

fn mesh_tag<T: Real>(mesh: &TriMesh<T>) -> DomainTag<T> {
    DomainTag::Mesh {
        vertices: mesh.num_vertices(),
        faces: mesh.num_faces(),
        dim: mesh.dim(),
    }
}

pub fn build_fem_operators<T: Real>(mesh: &TriMesh<T>) -> FemOperators<T> {
    let n = mesh.num_vertices();
    let m = mesh.num_faces();
    let d = mesh.dim();
    let mut grad = CooMatrix::with_capacity(d * m, n, 3 * d * m);
    let mut lap = CooMatrix::with_capacity(n, n, 9 * m);
    let mut mass = vec![T::zero(); n];
    let mut face_areas = Vec::with_capacity(m);
    let third = real::<T>(1.0 / 3.0);
    for f in 0..m {
        let tri = mesh.triangle(f);
        let area = mesh.face_area(f);
        face_areas.push(area);
        let gradients = face_gradients(mesh, f);
        for corner in 0..3 {
            let v = tri[corner];
            mass[v] += area * third;
            for c in 0..d {
                grad.push(c * m + f, v, gradients[corner][c]);
            }
            for other in 0..3 {
                let mut dot = T::zero();
                for c in 0..3 {
                    dot += gradients[corner][c] * gradients[other][c];
                }
                lap.push(v, tri[other], area * dot);
            }
        }
    }
    FemOperators {
        dim: d,
        num_vertices: n,
        num_faces: m,
        gradient: grad.to_csr(),
        face_areas,
        mass,
        laplacian: lap.to_csr(),
        interior: mesh.interior_vertices().to_vec(),
        domain: mesh_tag(mesh),
    }
}

impl<T: Real> FemOperators<T> {
    fn mass_matrix(&self) -> SparseMatrix<T> {
        SparseMatrix::from_diagonal(&self.mass)
    }

    fn gradient_block(&self, c: usize) -> SparseMatrix<T> {
        let rows: Vec<usize> = (c * self.num_faces..(c + 1) * self.num_faces).collect();
        self.gradient.select_rows(&rows)
    }
}

/// Squared-Hessian quadratic form with natural boundary conditions,
/// `Q = GᵀAD M̃⁻¹ DᵀAG`, condensed from the first-order saddle problem with
/// the Hessian multiplier clamped on the boundary. For 3D meshes the
/// Hessian is temporarily treated as a 3×3 matrix, giving `d²` row blocks.
pub fn fem_hessian_energy<T: Real>(ops: &FemOperators<T>) -> Result<DiscreteEnergy<T>, FemError> {
    if ops.interior.is_empty() {
        return Err(FemError::NoInteriorVertices);
    }
    let d = ops.dim;
    let n = ops.num_vertices;
    let ni = ops.interior.len();
    let blocks: Vec<SparseMatrix<T>> = (0..d).map(|c| ops.gradient_block(c)).collect();
    let weighted: Vec<SparseMatrix<T>> =
        blocks.iter().map(|b| b.scale_rows(&ops.face_areas)).collect();
    let selected: Vec<SparseMatrix<T>> = blocks
        .iter()
        .map(|b| b.transpose().select_rows(&ops.interior))
        .collect();
    let mut stacked = CooMatrix::new(d * d * ni, n);
    let mut row_mass = Vec::with_capacity(d * d * ni);
    for left in 0..d {
        for right in 0..d {
            let block = selected[left].matmul(&weighted[right]);
            let offset = (left * d + right) * ni;
            for i in 0..ni {
                for (j, v) in block.row(i) {
                    stacked.push(offset + i, j, v);
                }
            }
        }
    }
    for _ in 0..d * d {
        for &v in &ops.interior {
            row_mass.push(ops.mass[v]);
        }
    }
    // pointwise Hessian rows: divide the integrated rows by the vertex mass
    let inv_mass: Vec<T> = row_mass.iter().map(|&m| T::one() / m).collect();
    let rows = stacked.to_csr().scale_rows(&inv_mass);
    Ok(DiscreteEnergy::from_operator(
        SecondOrderOp::new(rows, row_mass),
        ops.mass_matrix(),
        EnergyKind::HessianNatural,
        ops.domain,
    ))
}

/// Boundary handling for the squared-Laplacian mesh energies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplacianBc {
    /// `Q = LᵀM⁻¹L`: squaring the cotangent Laplacian bakes in `∂u/∂n = 0`.
    ZeroNeumann,
    /// `Q = L(i,·)ᵀM(i,i)⁻¹L(i,·)`: rows restricted to interior vertices,
    /// so any discrete harmonic measures zero energy.
    Natural,
}

pub fn fem_laplacian_energy<T: Real>(
    ops: &FemOperators<T>,
    bc: LaplacianBc,
) -> Result<DiscreteEnergy<T>, FemError> {
    let (rows, row_mass, kind) = match bc {
        LaplacianBc::ZeroNeumann => {
            let inv: Vec<T> = ops.mass.iter().map(|&m| T::one() / m).collect();
            (ops.laplacian.scale_rows(&inv), ops.mass.clone(), EnergyKind::LaplacianZeroNeumann)
        }
        LaplacianBc::Natural => {
            if ops.interior.is_empty() {
                return Err(FemError::NoInteriorVertices);
            }
            let restricted = ops.laplacian.select_rows(&ops.interior);
            let mass: Vec<T> = ops.interior.iter().map(|&v| ops.mass[v]).collect();
            let inv: Vec<T> = mass.iter().map(|&m| T::one() / m).collect();
            (restricted.scale_rows(&inv), mass, EnergyKind::LaplacianNatural)
        }
    };
    Ok(DiscreteEnergy::from_operator(
        SecondOrderOp::new(rows, row_mass),
        ops.mass_matrix(),
        kind,
        ops.domain,
    ))
}

/// Crouzeix-Raviart comparison energy `EᵀKᵀM_cr⁻¹KE` with `K = L_cr + N_cr`:
/// the nonconforming edge-midpoint Laplacian plus normal-derivative rows at
/// boundary edges, pulled back to vertices by endpoint averaging.
///
/// `N_cr` is scaled so that the affine null space survives: for a boundary
/// edge `e` in face `T`, the row evaluates `−|e|·n_eᵀ∇(CR interpolant on T)`,
/// cancelling the boundary flux the stiffness rows pick up.
pub fn cr_energy<T: Real>(mesh: &TriMesh<T>) -> DiscreteEnergy<T> {
    let n = mesh.num_vertices();
    let k = mesh.num_edges();
    let m = mesh.num_faces();
    let mut stiffness = CooMatrix::with_capacity(k, k, 9 * m);
    let mut edge_mass = vec![T::zero(); k];
    let third = real::<T>(1.0 / 3.0);
    for f in 0..m {
        let area = mesh.face_area(f);
        let gradients = face_gradients(mesh, f);
        let edges = mesh.face_edges(f);
        // CR basis opposite corner c: ψ = 1 − 2φ_c, so ∇ψ = −2∇φ_c
        for a in 0..3 {
            edge_mass[edges[a]] += area * third;
            for b in 0..3 {
                let mut dot = T::zero();
                for c in 0..3 {
                    dot += gradients[a][c] * gradients[b][c];
                }
                stiffness.push(edges[a], edges[b], real::<T>(4.0) * area * dot);
            }
        }
    }
    let mut normal_rows = CooMatrix::new(k, k);
    for (e, edge) in mesh.edges().iter().enumerate() {
        if !edge.is_boundary() {
            continue;
        }
        let f = edge.faces[0];
        let tri = mesh.triangle(f);
        let [a, b] = edge.vertices;
        let pa = mesh.position(a);
        let pb = mesh.position(b);
        let tangent = [pb[0] - pa[0], pb[1] - pa[1], pb[2] - pa[2]];
        let len = (tangent[0] * tangent[0] + tangent[1] * tangent[1] + tangent[2] * tangent[2]).sqrt();
        let gradients = face_gradients(mesh, f);
        // in-plane unit normal, oriented away from the opposite vertex
        let opp = edge.opposite[0];
        let popp = mesh.position(opp);
        let fnormal = cross(
            [
                mesh.position(tri[1])[0] - mesh.position(tri[0])[0],
                mesh.position(tri[1])[1] - mesh.position(tri[0])[1],
                mesh.position(tri[1])[2] - mesh.position(tri[0])[2],
            ],
            [
                mesh.position(tri[2])[0] - mesh.position(tri[0])[0],
                mesh.position(tri[2])[1] - mesh.position(tri[0])[1],
                mesh.position(tri[2])[2] - mesh.position(tri[0])[2],
            ],
        );
        let mut normal = cross(tangent, fnormal);
        let nn = (normal[0] * normal[0] + normal[1] * normal[1] + normal[2] * normal[2]).sqrt();
        for c in &mut normal {
            *c = *c / nn;
        }
        let mid = [
            (pa[0] + pb[0]) * real::<T>(0.5),
            (pa[1] + pb[1]) * real::<T>(0.5),
            (pa[2] + pb[2]) * real::<T>(0.5),
        ];
        let outward = (popp[0] - mid[0]) * normal[0]
            + (popp[1] - mid[1]) * normal[1]
            + (popp[2] - mid[2]) * normal[2];
        if outward > T::zero() {
            for c in &mut normal {
                *c = -*c;
            }
        }
        for corner in 0..3 {
            let target = mesh.face_edges(f)[corner];
            let mut ndotg = T::zero();
            for c in 0..3 {
                ndotg += normal[c] * (-real::<T>(2.0) * gradients[corner][c]);
            }
            normal_rows.push(e, target, -len * ndotg);
        }
    }
    let combined = stiffness.to_csr().add_scaled(T::one(), &normal_rows.to_csr(), T::one());

    let mut averaging = CooMatrix::with_capacity(k, n, 2 * k);
    for (e, edge) in mesh.edges().iter().enumerate() {
        averaging.push(e, edge.vertices[0], real(0.5));
        averaging.push(e, edge.vertices[1], real(0.5));
    }
    let ke = combined.matmul(&averaging.to_csr());
    let inv_edge_mass: Vec<T> = edge_mass.iter().map(|&m| T::one() / m).collect();
    let rows = ke.scale_rows(&inv_edge_mass);

    let ops_mass = {
        let mut mass = vec![T::zero(); n];
        for f in 0..m {
            let area = mesh.face_area(f) * third;
            for &v in &mesh.triangle(f) {
                mass[v] += area;
            }
        }
        SparseMatrix::from_diagonal(&mass)
    };
    DiscreteEnergy::from_operator(
        SecondOrderOp::new(rows, edge_mass),
        ops_mass,
        EnergyKind::CrouzeixRaviart,
        mesh_tag(mesh),
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::mesh::{annulus_mesh, disk_mesh, sphere_mesh, square_mesh};

    fn unit_right_triangle() -> TriMesh<f64> {
        TriMesh::new(
            2,
            vec![[0.0, 0.0, 0.0], [1.0, 0.0, 0.0], [0.0, 1.0, 0.0]],
            vec![[0, 1, 2]],
        )
        .unwrap()
    }

    fn vertex_field(mesh: &TriMesh<f64>, f: impl Fn([f64; 3]) -> f64) -> Vec<f64> {
        (0..mesh.num_vertices()).map(|v| f(mesh.position(v))).collect()
    }

    #[test]
    fn lumped_mass_of_unit_right_triangle() {
        let ops = build_fem_operators(&unit_right_triangle());
        for &m in &ops.mass {
            assert!((m - 1.0 / 6.0).abs() < 1e-15);
        }
    }

    #[test]
    fn cotangent_entries_of_unit_right_triangle() {
        let ops = build_fem_operators(&unit_right_triangle());
        // legs see the opposite 45° angle: |L| = cot(45°)/2 = 0.5;
        // hypotenuse sees the right angle: cot(90°)/2 = 0
        assert!((ops.laplacian.get(0, 1).abs() - 0.5).abs() < 1e-14);
        assert!((ops.laplacian.get(0, 2).abs() - 0.5).abs() < 1e-14);
        assert!(ops.laplacian.get(1, 2).abs() < 1e-14);
        // PSD convention: positive diagonal, zero row sums
        assert!(ops.laplacian.get(0, 0) > 0.0);
        for i in 0..3 {
            let row_sum: f64 = ops.laplacian.row(i).map(|(_, v)| v).sum();
            assert!(row_sum.abs() < 1e-14);
        }
    }

    #[test]
    fn gradient_reproduces_linear_functions() {
        let mesh = disk_mesh(1.0, 3, 12).unwrap();
        let ops = build_fem_operators(&mesh);
        let u = vertex_field(&mesh, |p| 2.0 * p[0] - 0.5 * p[1] + 3.0);
        let gu = ops.gradient.mul_vec(&u);
        let m = ops.num_faces;
        for f in 0..m {
            assert!((gu[f] - 2.0).abs() < 1e-12, "x-gradient on face {f}");
            assert!((gu[m + f] + 0.5).abs() < 1e-12, "y-gradient on face {f}");
        }
    }

    #[test]
    fn laplacian_matches_weighted_gradient_product() {
        for mesh in [disk_mesh(1.0, 3, 12).unwrap(), sphere_mesh::<f64>(1)] {
            let ops = build_fem_operators(&mesh);
            let d = ops.dim;
            let areas_repeated: Vec<f64> = (0..d)
                .flat_map(|_| ops.face_areas.iter().copied())
                .collect();
            let product = ops.gradient.normal_product(&areas_repeated);
            let scale = ops.laplacian.infinity_norm();
            for i in 0..ops.num_vertices {
                for (j, v) in product.row(i) {
                    assert!(
                        (v - ops.laplacian.get(i, j)).abs() <= 1e-12 * scale,
                        "L != GᵀAG at ({i},{j})"
                    );
                }
            }
        }
    }

    #[test]
    fn mass_sums_to_total_area() {
        let mesh = annulus_mesh(1.0, 2.0, 3, 16).unwrap();
        let ops = build_fem_operators(&mesh);
        let total: f64 = ops.mass.iter().sum();
        assert!((total - mesh.total_area()).abs() < 1e-12 * mesh.total_area());
    }

    #[test]
    fn hessian_energy_annihilates_affine() {
        let mesh = disk_mesh(1.0, 4, 16).unwrap();
        let ops = build_fem_operators(&mesh);
        let energy = fem_hessian_energy(&ops).unwrap();
        let scale = energy.q.infinity_norm();
        for u in [
            vertex_field(&mesh, |_| 1.0),
            vertex_field(&mesh, |p| p[0]),
            vertex_field(&mesh, |p| p[1]),
            vertex_field(&mesh, |p| 1.0 - 2.0 * p[0] + 0.25 * p[1]),
        ] {
            let value = energy.q.quadratic_form(&u);
            let norm_sq: f64 = u.iter().map(|x| x * x).sum();
            assert!(value.abs() <= 1e-12 * scale * norm_sq, "affine energy {value}");
        }
    }

    #[test]
    fn hessian_energy_rejects_meshes_without_interior() {
        let mesh = annulus_mesh(1.0, 2.0, 1, 8).unwrap();
        let ops = build_fem_operators(&mesh);
        assert!(matches!(fem_hessian_energy(&ops), Err(FemError::NoInteriorVertices)));
    }

    #[test]
    fn planar_patch_in_3d_annihilates_coordinates() {
        // square mesh lifted to a tilted plane in 3D
        let flat = square_mesh(6, 2.0).unwrap();
        let positions: Vec<[f64; 3]> = flat
            .positions()
            .iter()
            .map(|p| [p[0], p[1], 0.3 * p[0] - 0.7 * p[1] + 1.0])
            .collect();
        let mesh = TriMesh::new(3, positions, flat.triangles().to_vec()).unwrap();
        let ops = build_fem_operators(&mesh);
        let energy = fem_hessian_energy(&ops).unwrap();
        let scale = energy.q.infinity_norm();
        for c in 0..3 {
            let u = vertex_field(&mesh, |p| p[c]);
            let norm_sq: f64 = u.iter().map(|x| x * x).sum();
            let value = energy.q.quadratic_form(&u);
            assert!(value.abs() <= 1e-12 * scale * norm_sq, "coordinate {c}: {value}");
        }
    }

    #[test]
    fn laplacian_energies_contrast_on_linear_field() {
        let mesh = square_mesh(8, 1.0).unwrap();
        let ops = build_fem_operators(&mesh);
        let natural = fem_laplacian_energy(&ops, LaplacianBc::Natural).unwrap();
        let neumann = fem_laplacian_energy(&ops, LaplacianBc::ZeroNeumann).unwrap();
        let u = vertex_field(&mesh, |p| p[0]);
        assert!(natural.quadratic(&u).abs() <= 1e-18);
        assert!(neumann.quadratic(&u) > 1e-6);
        let ones = vec![1.0; mesh.num_vertices()];
        assert!(natural.quadratic(&ones).abs() <= 1e-18);
        assert!(neumann.quadratic(&ones).abs() <= 1e-18);
    }

    #[test]
    fn cr_energy_annihilates_constants_and_affine() {
        let mesh = disk_mesh(1.0, 3, 14).unwrap();
        let energy = cr_energy(&mesh);
        let scale = energy.q.infinity_norm();
        for u in [
            vertex_field(&mesh, |_| 1.0),
            vertex_field(&mesh, |p| p[0]),
            vertex_field(&mesh, |p| 0.5 * p[0] - 3.0 * p[1] + 2.0),
        ] {
            let norm_sq: f64 = u.iter().map(|x| x * x).sum();
            let value = energy.q.quadratic_form(&u);
            assert!(value.abs() <= 1e-12 * scale * norm_sq, "CR affine energy {value}");
        }
    }

    #[test]
    fn cr_energy_positive_on_curved_field() {
        let mesh = disk_mesh(1.0, 3, 14).unwrap();
        let energy = cr_energy(&mesh);
        let u = vertex_field(&mesh, |p| p[0] * p[0]);
        assert!(energy.q.quadratic_form(&u) > 1e-6);
    }
}
