//! L1 geometric flow: repeated implicit L1 smoothing of the coordinate
//! functions, where the data-versus-smoothness weight acts as the time
//! step. Operators are rebuilt from the current geometry every step.

use thiserror::Error;

use crate::domain::mesh::{MeshError, TriMesh};
use crate::fem::{build_fem_operators, fem_hessian_energy, fem_laplacian_energy, LaplacianBc};
use crate::scalar::Real;
use crate::solve::l1::{l1_smooth, L1Error, L1Problem};

#[derive(Debug, Error)]
pub enum FlowError {
    #[error("flow needs a mesh embedded in 3D")]
    Needs3d,
    #[error("flow needs at least one step")]
    NoSteps,
    #[error("step {step} produced a degenerate mesh: {source}")]
    DegenerateGeometry { step: usize, source: MeshError },
    #[error("step {step}: the Hessian flow needs interior vertices")]
    NoInteriorVertices { step: usize },
    #[error("step {step}: L1 solve failed: {source}")]
    Smoothing { step: usize, source: L1Error },
}

/// Which second-order operator drives the flow.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum FlowOperator {
    /// Creases form along 1D curves, leaving near-developable patches.
    Hessian,
    /// Energy concentrates at isolated points.
    Laplacian,
}

/// Runs `steps` implicit L1 smoothing steps on the coordinate functions.
/// Returns the mesh sequence, input first, one entry per step after it.
pub fn l1_flow<T: Real>(
    mesh: &TriMesh<T>,
    lambda: T,
    steps: usize,
    operator: FlowOperator,
) -> Result<Vec<TriMesh<T>>, FlowError> {
    if mesh.dim() != 3 {
        return Err(FlowError::Needs3d);
    }
    if steps == 0 {
        return Err(FlowError::NoSteps);
    }
    let mut sequence = vec![mesh.clone()];
    let mut current = mesh.clone();
    for step in 0..steps {
        let ops = build_fem_operators(&current);
        let energy = match operator {
            FlowOperator::Hessian => fem_hessian_energy(&ops)
                .map_err(|_| FlowError::NoInteriorVertices { step })?,
            FlowOperator::Laplacian => fem_laplacian_energy(&ops, LaplacianBc::ZeroNeumann)
                .expect("zero-Neumann Laplacian exists on any mesh"),
        };
        let n = current.num_vertices();
        let mut new_positions = vec![[T::zero(); 3]; n];
        for c in 0..3 {
            let coord: Vec<T> = (0..n).map(|v| current.position(v)[c]).collect();
            let problem = L1Problem::from_energy(&energy, coord, lambda)
                .map_err(|source| FlowError::Smoothing { step, source })?;
            let solution =
                l1_smooth(&problem).map_err(|source| FlowError::Smoothing { step, source })?;
            for (v, pos) in new_positions.iter_mut().enumerate() {
                pos[c] = solution.u[v];
            }
        }
        current = current
            .with_positions(new_positions)
            .map_err(|source| FlowError::DegenerateGeometry { step, source })?;
        sequence.push(current.clone());
    }
    Ok(sequence)
}

/// Total absolute angle defect (Gaussian-curvature proxy) per vertex.
pub fn angle_defects<T: Real>(mesh: &TriMesh<T>) -> Vec<T> {
    let n = mesh.num_vertices();
    let mut angles = vec![T::zero(); n];
    for f in 0..mesh.num_faces() {
        let tri = mesh.triangle(f);
        for corner in 0..3 {
            angles[tri[corner]] += mesh.corner_angle(f, corner);
        }
    }
    let two_pi = crate::scalar::real::<T>(2.0 * std::f64::consts::PI);
    let pi = crate::scalar::real::<T>(std::f64::consts::PI);
    (0..n)
        .map(|v| {
            let flat = if mesh.is_boundary_vertex(v) { pi } else { two_pi };
            flat - angles[v]
        })
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::domain::mesh::{sphere_mesh, square_mesh};
    use crate::scalar::real;

    #[test]
    fn vanishing_weight_leaves_positions_unchanged() {
        let mesh = sphere_mesh::<f64>(1);
        let sequence = l1_flow(&mesh, 1e-12, 1, FlowOperator::Hessian).unwrap();
        let bbox = mesh.bbox_diagonal();
        for v in 0..mesh.num_vertices() {
            let a = mesh.position(v);
            let b = sequence[1].position(v);
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() <= 1e-8 * bbox, "vertex {v}");
            }
        }
    }

    #[test]
    fn planar_patch_is_a_fixed_point() {
        let flat = square_mesh(6, 1.0).unwrap();
        let positions: Vec<[f64; 3]> = flat.positions().to_vec();
        let mesh = crate::domain::mesh::TriMesh::new(3, positions, flat.triangles().to_vec()).unwrap();
        let sequence = l1_flow(&mesh, real(0.05), 1, FlowOperator::Hessian).unwrap();
        let bbox = mesh.bbox_diagonal();
        for v in 0..mesh.num_vertices() {
            let a = mesh.position(v);
            let b = sequence[1].position(v);
            for c in 0..3 {
                assert!((a[c] - b[c]).abs() <= 1e-8 * bbox, "vertex {v} moved");
            }
        }
    }

    #[test]
    fn rejects_flat_2d_meshes() {
        let mesh = square_mesh(4, 1.0f64).unwrap();
        assert!(matches!(l1_flow(&mesh, 0.1, 1, FlowOperator::Hessian), Err(FlowError::Needs3d)));
    }

    #[test]
    fn angle_defect_of_sphere_sums_to_four_pi() {
        let mesh = sphere_mesh::<f64>(2);
        let total: f64 = angle_defects(&mesh).iter().sum();
        assert!((total - 4.0 * std::f64::consts::PI).abs() < 1e-10);
    }
}
