//! Masked regular 2D grids. Degrees of freedom are the masked nodes in
//! row-major order; interior nodes are those whose full 8-neighborhood is
//! masked, since the second-derivative stencils reach all eight directions.

use thiserror::Error;

use crate::scalar::{real, Real};

#[derive(Debug, Error)]
pub enum GridError {
    #[error("grid must be at least 3x3 nodes, got {nx}x{ny}")]
    TooSmall { nx: usize, ny: usize },
    #[error("grid spacing must be positive")]
    BadSpacing,
    #[error("mask length {len} does not match {nx}x{ny} nodes")]
    MaskLength { len: usize, nx: usize, ny: usize },
    #[error("mask has no interior node (every node misses part of its 8-neighborhood)")]
    EmptyInterior,
    #[error("mask selects no node")]
    EmptyMask,
}

/// Masked regular grid with spacing `h`. Node `(i, j)` sits at
/// `(i·h, j·h)`; flat node index is `j·nx + i`.
#[derive(Clone, Debug)]
pub struct GridDomain<T> {
    nx: usize,
    ny: usize,
    h: T,
    mask: Vec<bool>,
    /// flat node index of each degree of freedom, row-major ascending
    node_of_dof: Vec<usize>,
    /// dof index per flat node, `None` outside the mask
    dof_of_node: Vec<Option<usize>>,
    /// dofs whose 8 neighbors are all masked, row-major ascending
    interior: Vec<usize>,
}

impl<T: Real> GridDomain<T> {
    pub fn from_mask(nx: usize, ny: usize, h: T, mask: Vec<bool>) -> Result<Self, GridError> {
        if nx < 3 || ny < 3 {
            return Err(GridError::TooSmall { nx, ny });
        }
        if !(h > T::zero()) {
            return Err(GridError::BadSpacing);
        }
        if mask.len() != nx * ny {
            return Err(GridError::MaskLength { len: mask.len(), nx, ny });
        }
        if !mask.iter().any(|&m| m) {
            return Err(GridError::EmptyMask);
        }
        let mut node_of_dof = Vec::new();
        let mut dof_of_node = vec![None; nx * ny];
        for node in 0..nx * ny {
            if mask[node] {
                dof_of_node[node] = Some(node_of_dof.len());
                node_of_dof.push(node);
            }
        }
        let masked = |i: isize, j: isize| -> bool {
            i >= 0 && j >= 0 && (i as usize) < nx && (j as usize) < ny && mask[j as usize * nx + i as usize]
        };
        let mut interior = Vec::new();
        for (dof, &node) in node_of_dof.iter().enumerate() {
            let (i, j) = ((node % nx) as isize, (node / nx) as isize);
            let full = (-1..=1).all(|dj| (-1..=1).all(|di| masked(i + di, j + dj)));
            if full {
                interior.push(dof);
            }
        }
        Ok(Self { nx, ny, h, mask, node_of_dof, dof_of_node, interior })
    }

    /// Fully masked rectangle.
    pub fn full(nx: usize, ny: usize, h: T) -> Result<Self, GridError> {
        Self::from_mask(nx, ny, h, vec![true; nx * ny])
    }

    /// Masks nodes where `inside(x, y)` holds, with node `(i,j)` at `(i·h, j·h)`.
    pub fn from_predicate(
        nx: usize,
        ny: usize,
        h: T,
        inside: impl Fn(T, T) -> bool,
    ) -> Result<Self, GridError> {
        let mut mask = vec![false; nx * ny];
        for j in 0..ny {
            for i in 0..nx {
                let x = real::<T>(i as f64) * h;
                let y = real::<T>(j as f64) * h;
                mask[j * nx + i] = inside(x, y);
            }
        }
        Self::from_mask(nx, ny, h, mask)
    }

    pub fn nx(&self) -> usize {
        self.nx
    }

    pub fn ny(&self) -> usize {
        self.ny
    }

    pub fn spacing(&self) -> T {
        self.h
    }

    pub fn num_nodes(&self) -> usize {
        self.nx * self.ny
    }

    /// Number of masked nodes (the unknowns of every grid operator).
    pub fn num_dofs(&self) -> usize {
        self.node_of_dof.len()
    }

    pub fn num_interior(&self) -> usize {
        self.interior.len()
    }

    /// Interior dofs, row-major ascending.
    pub fn interior(&self) -> &[usize] {
        &self.interior
    }

    pub fn is_interior(&self, dof: usize) -> bool {
        self.interior.binary_search(&dof).is_ok()
    }

    pub fn mask(&self) -> &[bool] {
        &self.mask
    }

    pub fn node_of_dof(&self, dof: usize) -> usize {
        self.node_of_dof[dof]
    }

    pub fn dof_at_node(&self, i: usize, j: usize) -> Option<usize> {
        if i < self.nx && j < self.ny {
            self.dof_of_node[j * self.nx + i]
        } else {
            None
        }
    }

    /// Grid coordinates `(i, j)` of a dof.
    pub fn node_ij(&self, dof: usize) -> (usize, usize) {
        let node = self.node_of_dof[dof];
        (node % self.nx, node / self.nx)
    }

    pub fn position(&self, dof: usize) -> [T; 2] {
        let (i, j) = self.node_ij(dof);
        [real::<T>(i as f64) * self.h, real::<T>(j as f64) * self.h]
    }

    /// Dofs that are masked but not interior: the boundary band of the mask.
    pub fn boundary_band(&self) -> Vec<usize> {
        (0..self.num_dofs()).filter(|&d| !self.is_interior(d)).collect()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn five_by_five_has_nine_interior_nodes() {
        let g = GridDomain::<f64>::full(5, 5, 1.0).unwrap();
        assert_eq!(g.num_dofs(), 25);
        assert_eq!(g.num_interior(), 9);
    }

    #[test]
    fn three_by_three_has_one_interior_node() {
        let g = GridDomain::<f64>::full(3, 3, 0.5).unwrap();
        assert_eq!(g.num_interior(), 1);
        let center = g.interior()[0];
        assert_eq!(g.node_ij(center), (1, 1));
    }

    #[test]
    fn interior_recomputation_is_idempotent() {
        let g = GridDomain::<f64>::from_predicate(9, 9, 0.25, |x, y| x + y > 0.4).unwrap();
        let again = GridDomain::from_mask(9, 9, 0.25, g.mask().to_vec()).unwrap();
        assert_eq!(g.interior(), again.interior());
    }

    #[test]
    fn too_small_grid_is_rejected() {
        assert!(matches!(GridDomain::<f64>::full(2, 5, 1.0), Err(GridError::TooSmall { .. })));
    }

    #[test]
    fn row_major_dof_order() {
        let g = GridDomain::<f64>::full(3, 3, 1.0).unwrap();
        assert_eq!(g.node_of_dof(0), 0);
        assert_eq!(g.node_ij(4), (1, 1));
        assert_eq!(g.position(4), [1.0, 1.0]);
    }
}
