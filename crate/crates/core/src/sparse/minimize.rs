//! Equality-constrained minimization of quadratic energies by variable
//! elimination: constrained entries are substituted out so every
//! factorization stays symmetric positive definite.

use thiserror::Error;

use crate::domain::constraints::ConstraintSet;
use crate::scalar::Real;
use crate::sparse::cholesky::{solve_spd, SolveError, SolveOptions};
use crate::sparse::matrix::SparseMatrix;

#[derive(Debug, Error)]
pub enum MinimizeError {
    #[error("constraint index {index} out of range for a system of size {n}")]
    ConstraintOutOfRange { index: usize, n: usize },
    #[error("reduced system is rank deficient ({detail})")]
    RankDeficient { detail: String },
    #[error("without a data term at least one constraint is required")]
    NoConstraints,
    #[error("linear solve failed: {0}")]
    Solve(SolveError),
}

/// Minimizes `½ uᵀAu − bᵀu` subject to `u[idx] = val`, for symmetric
/// positive semidefinite `A` whose null space the constraints fix.
pub fn solve_constrained<T: Real>(
    a: &SparseMatrix<T>,
    b: &[T],
    constraints: &ConstraintSet<T>,
    opts: &SolveOptions,
) -> Result<Vec<T>, MinimizeError> {
    let n = a.nrows();
    for (index, _) in constraints.iter() {
        if index >= n {
            return Err(MinimizeError::ConstraintOutOfRange { index, n });
        }
    }
    let mut fixed = vec![None; n];
    for (index, value) in constraints.iter() {
        fixed[index] = Some(value);
    }
    let free: Vec<usize> = (0..n).filter(|&i| fixed[i].is_none()).collect();
    if free.is_empty() {
        return Ok((0..n).map(|i| fixed[i].unwrap()).collect());
    }

    // move constrained values to the right-hand side
    let u0: Vec<T> = (0..n).map(|i| fixed[i].unwrap_or_else(T::zero)).collect();
    let au0 = a.mul_vec(&u0);
    let rhs: Vec<T> = free.iter().map(|&i| b[i] - au0[i]).collect();

    let mut col_map = vec![None; n];
    for (new, &old) in free.iter().enumerate() {
        col_map[old] = Some(new);
    }
    let reduced = a.select_rows(&free).select_columns(&col_map, free.len());

    let x = solve_spd(&reduced, &rhs, T::zero(), opts).map_err(|err| match err {
        SolveError::NotPositiveDefinite { index, pivot } => MinimizeError::RankDeficient {
            detail: format!(
                "factorization broke down at reduced index {index} with pivot {pivot:e}; \
                 the constraints likely leave a null-space direction free"
            ),
        },
        other => MinimizeError::Solve(other),
    })?;

    let mut u = u0;
    for (&i, &xi) in free.iter().zip(&x) {
        u[i] = xi;
    }
    Ok(u)
}

/// Minimizes `½·w·uᵀQu [+ ½(u−f)ᵀM(u−f)]` subject to `u[idx] = val`.
///
/// With a data term the stationarity condition is `(M + wQ)u = Mf`; without
/// one the problem reduces to constrained minimization of the energy alone,
/// which needs enough constraints to pin the null space of `Q`.
pub fn min_quadratic_eq<T: Real>(
    q: &SparseMatrix<T>,
    mass: &SparseMatrix<T>,
    data: Option<&[T]>,
    weight: T,
    constraints: &ConstraintSet<T>,
    opts: &SolveOptions,
) -> Result<Vec<T>, MinimizeError> {
    match data {
        Some(f) => {
            assert!(weight > T::zero(), "data-term weight must be positive");
            let a = q.add_scaled(weight, mass, T::one());
            let b = mass.mul_vec(f);
            solve_constrained(&a, &b, constraints, opts)
        }
        None => {
            if constraints.is_empty() {
                return Err(MinimizeError::NoConstraints);
            }
            let b = vec![T::zero(); q.nrows()];
            solve_constrained(q, &b, constraints, opts)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sparse::matrix::CooMatrix;

    fn path_laplacian(n: usize) -> SparseMatrix<f64> {
        let mut coo = CooMatrix::new(n, n);
        for i in 0..n {
            let mut d = 0.0;
            if i > 0 {
                coo.push(i, i - 1, -1.0);
                d += 1.0;
            }
            if i + 1 < n {
                coo.push(i, i + 1, -1.0);
                d += 1.0;
            }
            coo.push(i, i, d);
        }
        coo.to_csr()
    }

    #[test]
    fn fixing_endpoints_gives_linear_interpolant() {
        let q = path_laplacian(11);
        let cs = ConstraintSet::new(vec![(0, 1.0), (10, 3.0)]).unwrap();
        let b = vec![0.0; 11];
        let u = solve_constrained(&q, &b, &cs, &SolveOptions::default()).unwrap();
        for (i, ui) in u.iter().enumerate() {
            let expected = 1.0 + 2.0 * i as f64 / 10.0;
            assert!((ui - expected).abs() < 1e-10, "node {i}: {ui} vs {expected}");
        }
    }

    #[test]
    fn all_nodes_constrained_returns_the_constraints() {
        let q = path_laplacian(3);
        let cs = ConstraintSet::new(vec![(0, 5.0), (1, -1.0), (2, 2.0)]).unwrap();
        let u = solve_constrained(&q, &[0.0; 3], &cs, &SolveOptions::default()).unwrap();
        assert_eq!(u, vec![5.0, -1.0, 2.0]);
    }

    #[test]
    fn tiny_weight_returns_the_data() {
        let q = path_laplacian(9);
        let m = SparseMatrix::from_diagonal(&vec![1.0; 9]);
        let f: Vec<f64> = (0..9).map(|i| (i as f64).sin()).collect();
        let u = min_quadratic_eq(&q, &m, Some(&f), 1e-12, &ConstraintSet::empty(), &SolveOptions::default())
            .unwrap();
        for (ui, fi) in u.iter().zip(&f) {
            assert!((ui - fi).abs() < 1e-8);
        }
    }

    #[test]
    fn missing_constraints_without_data_is_an_error() {
        let q = path_laplacian(4);
        let m = SparseMatrix::from_diagonal(&vec![1.0; 4]);
        assert!(matches!(
            min_quadratic_eq(&q, &m, None, 1.0, &ConstraintSet::empty(), &SolveOptions::default()),
            Err(MinimizeError::NoConstraints)
        ));
    }

    #[test]
    fn out_of_range_constraint_is_reported() {
        let q = path_laplacian(4);
        let cs = ConstraintSet::new(vec![(9, 0.0)]).unwrap();
        assert!(matches!(
            solve_constrained(&q, &[0.0; 4], &cs, &SolveOptions::default()),
            Err(MinimizeError::ConstraintOutOfRange { index: 9, n: 4 })
        ));
    }
}
