//! Finite-difference operators on masked grids: the stacked Hessian
//! (second-order central stencils at interior nodes), squared-Laplacian
//! variants, blended forms, and the 1D bending-bar analog.

use thiserror::Error;

use crate::domain::grid::GridDomain;
use crate::scalar::{real, Real};
use crate::sparse::energy::{DiscreteEnergy, DomainTag, EnergyKind, SecondOrderOp};
use crate::sparse::matrix::{CooMatrix, SparseMatrix};

#[derive(Debug, Error)]
pub enum FdError {
    #[error("grid has no interior node")]
    EmptyInterior,
    #[error("1D bar needs at least 5 nodes, got {0}")]
    TooFewNodes(usize),
    #[error("blend weight must lie in [0, 1], got {0}")]
    BadAlpha(f64),
    #[error("blend expects a HessianNatural and a LaplacianNatural energy on the same domain")]
    BlendMismatch,
}

/// Stacked finite-difference Hessian `[H_xx; H_yy; √2·H_xy]` over the masked
/// nodes, one row triple per interior node, with `h²` row weights. The √2
/// factor accounts for the mixed entry appearing twice in the Frobenius norm.
#[derive(Clone, Debug)]
pub struct FdHessian<T> {
    pub op: SecondOrderOp<T>,
    pub domain: DomainTag<T>,
}

fn grid_tag<T: Real>(grid: &GridDomain<T>) -> DomainTag<T> {
    DomainTag::Grid { nx: grid.nx(), ny: grid.ny(), h: grid.spacing(), dofs: grid.num_dofs() }
}

fn grid_mass<T: Real>(grid: &GridDomain<T>) -> SparseMatrix<T> {
    let h = grid.spacing();
    SparseMatrix::from_diagonal(&vec![h * h; grid.num_dofs()])
}

pub fn build_fd_hessian<T: Real>(grid: &GridDomain<T>) -> Result<FdHessian<T>, FdError> {
    let interior = grid.interior();
    if interior.is_empty() {
        return Err(FdError::EmptyInterior);
    }
    let n_int = interior.len();
    let n = grid.num_dofs();
    let h = grid.spacing();
    let inv_h2 = T::one() / (h * h);
    let quarter = inv_h2 / real(4.0);
    let sqrt2 = real::<T>(2.0).sqrt();
    let mut coo = CooMatrix::with_capacity(3 * n_int, n, 10 * n_int);
    for (row, &dof) in interior.iter().enumerate() {
        let (i, j) = grid.node_ij(dof);
        let at = |di: isize, dj: isize| -> usize {
            grid.dof_at_node((i as isize + di) as usize, (j as isize + dj) as usize)
                .expect("interior nodes have all 8 neighbors masked")
        };
        // xx block
        coo.push(row, at(-1, 0), inv_h2);
        coo.push(row, dof, -(inv_h2 + inv_h2));
        coo.push(row, at(1, 0), inv_h2);
        // yy block
        coo.push(n_int + row, at(0, -1), inv_h2);
        coo.push(n_int + row, dof, -(inv_h2 + inv_h2));
        coo.push(n_int + row, at(0, 1), inv_h2);
        // xy block: (+,-,-,+)/4h² on the diagonal neighbors, √2-scaled
        coo.push(2 * n_int + row, at(-1, -1), sqrt2 * quarter);
        coo.push(2 * n_int + row, at(-1, 1), -sqrt2 * quarter);
        coo.push(2 * n_int + row, at(1, -1), -sqrt2 * quarter);
        coo.push(2 * n_int + row, at(1, 1), sqrt2 * quarter);
    }
    let rows = coo.to_csr();
    let row_mass = vec![h * h; 3 * n_int];
    Ok(FdHessian { op: SecondOrderOp::new(rows, row_mass), domain: grid_tag(grid) })
}

/// Condenses the stacked Hessian into the quadratic form `HᵀM̃H`.
pub fn fd_hessian_energy<T: Real>(fd: &FdHessian<T>) -> DiscreteEnergy<T> {
    let mass = match fd.domain {
        DomainTag::Grid { h, dofs, .. } => SparseMatrix::from_diagonal(&vec![h * h; dofs]),
        _ => unreachable!("finite-difference Hessians live on grids"),
    };
    DiscreteEnergy::from_operator(fd.op.clone(), mass, EnergyKind::HessianNatural, fd.domain)
}

/// Boundary handling for squared-Laplacian grid energies.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum LaplacianBc {
    /// Ghost nodes mirrored across the boundary: encodes `∂u/∂n = 0` and
    /// gives Laplacian rows at every masked node.
    ZeroNeumann,
    /// Laplacian rows at interior nodes only; boundary values stay free.
    Natural,
}

pub fn build_fd_laplacian_energy<T: Real>(
    grid: &GridDomain<T>,
    bc: LaplacianBc,
) -> Result<DiscreteEnergy<T>, FdError> {
    if grid.interior().is_empty() {
        return Err(FdError::EmptyInterior);
    }
    let n = grid.num_dofs();
    let h = grid.spacing();
    let inv_h2 = T::one() / (h * h);
    let op = match bc {
        LaplacianBc::Natural => {
            let interior = grid.interior();
            let mut coo = CooMatrix::with_capacity(interior.len(), n, 5 * interior.len());
            for (row, &dof) in interior.iter().enumerate() {
                let (i, j) = grid.node_ij(dof);
                let at = |di: isize, dj: isize| -> usize {
                    grid.dof_at_node((i as isize + di) as usize, (j as isize + dj) as usize)
                        .expect("interior nodes have all 8 neighbors masked")
                };
                coo.push(row, at(-1, 0), inv_h2);
                coo.push(row, at(1, 0), inv_h2);
                coo.push(row, at(0, -1), inv_h2);
                coo.push(row, at(0, 1), inv_h2);
                coo.push(row, dof, -real::<T>(4.0) * inv_h2);
            }
            SecondOrderOp::new(coo.to_csr(), vec![h * h; interior.len()])
        }
        LaplacianBc::ZeroNeumann => {
            let mut coo = CooMatrix::with_capacity(n, n, 5 * n);
            for dof in 0..n {
                let (i, j) = grid.node_ij(dof);
                let neighbor = |di: isize, dj: isize| -> Option<usize> {
                    let ni = i as isize + di;
                    let nj = j as isize + dj;
                    if ni < 0 || nj < 0 {
                        None
                    } else {
                        grid.dof_at_node(ni as usize, nj as usize)
                    }
                };
                // each missing neighbor reflects to the opposite side, or
                // folds onto the center when that side is missing too
                for (da, db) in [((-1, 0), (1, 0)), ((0, -1), (0, 1))] {
                    let a = neighbor(da.0, da.1);
                    let b = neighbor(db.0, db.1);
                    let ta = a.or(b).unwrap_or(dof);
                    let tb = b.or(a).unwrap_or(dof);
                    coo.push(dof, ta, inv_h2);
                    coo.push(dof, tb, inv_h2);
                    coo.push(dof, dof, -(inv_h2 + inv_h2));
                }
            }
            SecondOrderOp::new(coo.to_csr(), vec![h * h; n])
        }
    };
    let kind = match bc {
        LaplacianBc::ZeroNeumann => EnergyKind::LaplacianZeroNeumann,
        LaplacianBc::Natural => EnergyKind::LaplacianNatural,
    };
    Ok(DiscreteEnergy::from_operator(op, grid_mass(grid), kind, grid_tag(grid)))
}

/// `Q(α) = (1−α)·Q_laplacian + α·Q_hessian` over a shared domain.
pub fn blend_energy<T: Real>(
    hessian: &DiscreteEnergy<T>,
    laplacian: &DiscreteEnergy<T>,
    alpha: T,
) -> Result<DiscreteEnergy<T>, FdError> {
    if alpha < T::zero() || alpha > T::one() {
        return Err(FdError::BadAlpha(crate::scalar::to_f64(alpha)));
    }
    if hessian.kind != EnergyKind::HessianNatural
        || laplacian.kind != EnergyKind::LaplacianNatural
        || hessian.domain != laplacian.domain
    {
        return Err(FdError::BlendMismatch);
    }
    let q = laplacian.q.add_scaled(T::one() - alpha, &hessian.q, alpha);
    Ok(DiscreteEnergy {
        q,
        mass: hessian.mass.clone(),
        kind: EnergyKind::Blend(alpha),
        domain: hessian.domain,
        operator: None,
    })
}

/// 1D bending energy on `n` nodes with spacing `h`: second-difference rows
/// at interior nodes, `Q = h·BᵀB`, node mass `h·I`. Null space `{1, x}`.
pub fn build_fd_bar_1d<T: Real>(n: usize, h: T) -> Result<DiscreteEnergy<T>, FdError> {
    if n < 5 {
        return Err(FdError::TooFewNodes(n));
    }
    let inv_h2 = T::one() / (h * h);
    let mut coo = CooMatrix::with_capacity(n - 2, n, 3 * (n - 2));
    for row in 0..n - 2 {
        let node = row + 1;
        coo.push(row, node - 1, inv_h2);
        coo.push(row, node, -(inv_h2 + inv_h2));
        coo.push(row, node + 1, inv_h2);
    }
    let op = SecondOrderOp::new(coo.to_csr(), vec![h; n - 2]);
    let mass = SparseMatrix::from_diagonal(&vec![h; n]);
    Ok(DiscreteEnergy::from_operator(
        op,
        mass,
        EnergyKind::HessianNatural,
        DomainTag::Interval { nodes: n, h },
    ))
}
