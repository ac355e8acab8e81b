//! Sparse matrices, SPD factorization, constrained quadratic minimization
//! and a smallest-eigenpair solver.

pub mod cholesky;
pub mod eigen;
pub mod energy;
pub mod matrix;
pub mod minimize;

pub use cholesky::{reverse_cuthill_mckee, solve_spd, CholeskyFactor, SolveError, SolveOptions};
pub use eigen::{smallest_eigenpairs, EigenError, EigenOptions, EigenPairs};
pub use energy::{DiscreteEnergy, DomainTag, EnergyKind, SecondOrderOp};
pub use matrix::{CooMatrix, SparseMatrix};
pub use minimize::{min_quadratic_eq, solve_constrained, MinimizeError};
