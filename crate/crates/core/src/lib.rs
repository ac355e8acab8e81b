//! Discrete second-order smoothness energies on masked 2D grids and
//! triangle meshes.
//!
//! The central object is a [`DiscreteEnergy`]: a symmetric positive
//! semidefinite quadratic form `Q` with a companion mass matrix, assembled
//! either by finite differences on a [`GridDomain`] ([`fd`]) or by mixed
//! finite elements on a [`TriMesh`] ([`fem`]). The squared-Hessian form
//! carries natural boundary conditions — its null space is exactly the
//! affine functions — while the squared-Laplacian variants bake in zero
//! Neumann conditions or keep discrete harmonics at zero energy. The
//! [`solve`] module builds the applications on top: scattered-data
//! interpolation, dense smoothing, modal analysis, linear-subspace
//! deformation weights, and L1 (piecewise-planar) smoothing and flow.
//!
//! All numerics are generic over the scalar type through [`scalar::Real`];
//! `f64` aliases for the main types live at the crate root.

pub mod domain;
pub mod fd;
pub mod fem;
pub mod rng;
pub mod scalar;
pub mod solve;
pub mod sparse;

pub use domain::{
    annulus_mesh, disk_mesh, grid_from_mask, parse_mesh, snap_points, sphere_mesh, square_mesh,
    write_off, ConstraintSet, GridDomain, MeshFormat, TriMesh,
};
pub use scalar::Real;
pub use sparse::{
    min_quadratic_eq, smallest_eigenpairs, solve_spd, DiscreteEnergy, DomainTag, EigenOptions,
    EigenPairs, EnergyKind, SecondOrderOp, SolveOptions, SparseMatrix,
};

/// Concrete `f64` aliases for the main types.
pub type SparseMatrix64 = sparse::SparseMatrix<f64>;
pub type GridDomain64 = domain::GridDomain<f64>;
pub type TriMesh64 = domain::TriMesh<f64>;
pub type ConstraintSet64 = domain::ConstraintSet<f64>;
pub type DiscreteEnergy64 = sparse::DiscreteEnergy<f64>;
pub type EigenPairs64 = sparse::EigenPairs<f64>;
pub type FemOperators64 = fem::FemOperators<f64>;
pub type WeightMatrix64 = solve::WeightMatrix<f64>;

/// Concrete `f32` aliases.
pub type SparseMatrix32 = sparse::SparseMatrix<f32>;
pub type GridDomain32 = domain::GridDomain<f32>;
pub type TriMesh32 = domain::TriMesh<f32>;
