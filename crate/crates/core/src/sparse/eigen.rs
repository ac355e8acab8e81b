//! Smallest generalized eigenpairs of `Q x = λ M x` for symmetric
//! positive-semidefinite `Q` and diagonal SPD `M`, by shift-inverted
//! subspace iteration with Rayleigh-Ritz extraction.

use thiserror::Error;

use crate::rng::SplitMix64;
use crate::scalar::{real, to_f64, Real};
use crate::sparse::cholesky::CholeskyFactor;
use crate::sparse::matrix::SparseMatrix;

#[derive(Debug, Error)]
pub enum EigenError {
    #[error("k = {k} eigenpairs requested from a system of size {n}")]
    TooManyPairs { k: usize, n: usize },
    #[error("mass matrix must be diagonal with positive entries")]
    BadMass,
    #[error(
        "eigensolver did not converge within {iterations} iterations; \
         achieved residuals {residuals:?} against tolerance {tolerance:e}"
    )]
    NoConvergence { iterations: usize, residuals: Vec<f64>, tolerance: f64 },
    #[error("shifted operator could not be factorized: {0}")]
    Factorization(#[from] crate::sparse::cholesky::SolveError),
}

#[derive(Clone, Copy, Debug)]
pub struct EigenOptions {
    /// Per-pair bound on `‖Qx − λMx‖₂` relative to `‖Q‖_∞`.
    pub residual_tol: f64,
    pub max_iterations: usize,
    /// Extra subspace vectors carried beyond `k`.
    pub guard_vectors: usize,
    pub seed: u64,
}

pub const EIGEN_RESIDUAL_TOL: f64 = 1e-8;

impl Default for EigenOptions {
    fn default() -> Self {
        Self { residual_tol: EIGEN_RESIDUAL_TOL, max_iterations: 500, guard_vectors: 8, seed: 0x9d2c_5681 }
    }
}

/// Generalized eigenpairs, ascending by eigenvalue. Vectors are M-orthonormal.
#[derive(Clone, Debug)]
pub struct EigenPairs<T> {
    pub eigenvalues: Vec<T>,
    /// `eigenvectors[j]` is the vector paired with `eigenvalues[j]`.
    pub eigenvectors: Vec<Vec<T>>,
    pub residuals: Vec<T>,
}

/// Cyclic Jacobi eigendecomposition for the small Ritz blocks.
/// Returns ascending eigenvalues and the rotation columns.
pub(crate) fn jacobi_small<T: Real>(a: &[Vec<T>]) -> (Vec<T>, Vec<Vec<T>>) {
    let p = a.len();
    let mut m: Vec<Vec<T>> = a.to_vec();
    let mut v = vec![vec![T::zero(); p]; p];
    for (i, row) in v.iter_mut().enumerate() {
        row[i] = T::one();
    }
    let scale = m
        .iter()
        .flat_map(|r| r.iter())
        .fold(T::zero(), |acc, x| acc.max(x.abs()))
        .max(real(1e-300));
    for _sweep in 0..60 {
        let mut off = T::zero();
        for i in 0..p {
            for j in i + 1..p {
                off = off.max(m[i][j].abs());
            }
        }
        if off <= real::<T>(1e-15) * scale {
            break;
        }
        for r in 0..p {
            for c in r + 1..p {
                if m[r][c].abs() <= real::<T>(1e-18) * scale {
                    continue;
                }
                let theta = (m[c][c] - m[r][r]) / (real::<T>(2.0) * m[r][c]);
                let t = theta.signum() / (theta.abs() + (theta * theta + T::one()).sqrt());
                let cs = T::one() / (t * t + T::one()).sqrt();
                let sn = t * cs;
                for k in 0..p {
                    let (mkr, mkc) = (m[k][r], m[k][c]);
                    m[k][r] = cs * mkr - sn * mkc;
                    m[k][c] = sn * mkr + cs * mkc;
                }
                for k in 0..p {
                    let (mrk, mck) = (m[r][k], m[c][k]);
                    m[r][k] = cs * mrk - sn * mck;
                    m[c][k] = sn * mrk + cs * mck;
                }
                for k in 0..p {
                    let (vkr, vkc) = (v[k][r], v[k][c]);
                    v[k][r] = cs * vkr - sn * vkc;
                    v[k][c] = sn * vkr + cs * vkc;
                }
            }
        }
    }
    let mut order: Vec<usize> = (0..p).collect();
    order.sort_by(|&i, &j| m[i][i].partial_cmp(&m[j][j]).unwrap());
    let values: Vec<T> = order.iter().map(|&i| m[i][i]).collect();
    let mut columns = vec![vec![T::zero(); p]; p];
    for (jnew, &jold) in order.iter().enumerate() {
        for i in 0..p {
            columns[jnew][i] = v[i][jold];
        }
    }
    (values, columns)
}

fn m_dot<T: Real>(mass: &[T], x: &[T], y: &[T]) -> T {
    x.iter().zip(y).zip(mass).fold(T::zero(), |acc, ((&xi, &yi), &mi)| acc + xi * mi * yi)
}

/// M-orthonormalizes `basis` in place (two passes of modified Gram-Schmidt);
/// collapsed directions are replaced with fresh deterministic random vectors.
fn m_orthonormalize<T: Real>(basis: &mut [Vec<T>], mass: &[T], rng: &mut SplitMix64) {
    let p = basis.len();
    for j in 0..p {
        let mut attempts = 0;
        loop {
            for _pass in 0..2 {
                for i in 0..j {
                    let (head, tail) = basis.split_at_mut(j);
                    let c = m_dot(mass, &head[i], &tail[0]);
                    for (t, &h) in tail[0].iter_mut().zip(head[i].iter()) {
                        *t = *t - c * h;
                    }
                }
            }
            let norm = m_dot(mass, &basis[j], &basis[j]).sqrt();
            if norm > real::<T>(1e-150) {
                for t in basis[j].iter_mut() {
                    *t = *t / norm;
                }
                break;
            }
            attempts += 1;
            assert!(attempts < 20, "basis collapse in M-orthonormalization");
            for t in basis[j].iter_mut() {
                *t = real(rng.next_symmetric());
            }
        }
    }
}

/// Smallest `k` generalized eigenpairs of `(Q, M)`; see module docs.
///
/// The factorized operator is `Q + σM` with `σ = 1e-8·mean(diag Q)`, which
/// keeps the eigenvectors of the pencil intact while making the matrix
/// positive definite despite the energy's null space.
pub fn smallest_eigenpairs<T: Real>(
    q: &SparseMatrix<T>,
    mass: &SparseMatrix<T>,
    k: usize,
    opts: &EigenOptions,
) -> Result<EigenPairs<T>, EigenError> {
    let n = q.nrows();
    if k >= n || k == 0 {
        return Err(EigenError::TooManyPairs { k, n });
    }
    if !mass.is_diagonal() {
        return Err(EigenError::BadMass);
    }
    let mdiag = mass.diagonal();
    if mdiag.iter().any(|&m| m <= T::zero()) {
        return Err(EigenError::BadMass);
    }

    let qnorm = q.infinity_norm();
    let mean_diag = q.diagonal().iter().fold(T::zero(), |acc, &d| acc + d) / real(n as f64);
    let sigma = if mean_diag > T::zero() { real::<T>(1e-8) * mean_diag } else { T::one() };
    let shifted = q.add_scaled(T::one(), mass, sigma);
    let factor = CholeskyFactor::new(&shifted)?;

    let p = (k + opts.guard_vectors).min(n);
    let mut rng = SplitMix64::new(opts.seed);
    let mut basis: Vec<Vec<T>> =
        (0..p).map(|_| (0..n).map(|_| real(rng.next_symmetric())).collect()).collect();
    m_orthonormalize(&mut basis, &mdiag, &mut rng);

    let res_tol = real::<T>(opts.residual_tol) * qnorm.max(real(1e-300));
    let mut last_residuals = vec![T::infinity(); k];
    for _iter in 0..opts.max_iterations {
        // subspace step: X ← (Q + σM)⁻¹ M X
        for col in basis.iter_mut() {
            let mx: Vec<T> = col.iter().zip(&mdiag).map(|(&x, &m)| x * m).collect();
            *col = factor.solve(&mx);
        }
        m_orthonormalize(&mut basis, &mdiag, &mut rng);

        // Rayleigh-Ritz on the Q form
        let qx: Vec<Vec<T>> = basis.iter().map(|col| q.mul_vec(col)).collect();
        let mut t = vec![vec![T::zero(); p]; p];
        for i in 0..p {
            for j in i..p {
                let mut acc = T::zero();
                for idx in 0..n {
                    acc += basis[i][idx] * qx[j][idx];
                }
                t[i][j] = acc;
                t[j][i] = acc;
            }
        }
        let (ritz_values, rotations) = jacobi_small(&t);
        let mut rotated: Vec<Vec<T>> = Vec::with_capacity(p);
        for col in &rotations {
            let mut v = vec![T::zero(); n];
            for (coeff, b) in col.iter().zip(&basis) {
                if *coeff == T::zero() {
                    continue;
                }
                for (vi, &bi) in v.iter_mut().zip(b.iter()) {
                    *vi += *coeff * bi;
                }
            }
            rotated.push(v);
        }
        basis = rotated;

        // residuals of the leading k pairs
        let mut ok = true;
        for j in 0..k {
            let qv = q.mul_vec(&basis[j]);
            let lambda = ritz_values[j];
            let mut rsq = T::zero();
            for idx in 0..n {
                let r = qv[idx] - lambda * mdiag[idx] * basis[j][idx];
                rsq += r * r;
            }
            last_residuals[j] = rsq.sqrt();
            if last_residuals[j] > res_tol {
                ok = false;
            }
        }
        if ok {
            basis.truncate(k);
            return Ok(EigenPairs {
                eigenvalues: ritz_values[..k].to_vec(),
                eigenvectors: basis,
                residuals: last_residuals,
            });
        }
    }
    Err(EigenError::NoConvergence {
        iterations: opts.max_iterations,
        residuals: last_residuals.iter().map(|&r| to_f64(r)).collect(),
        tolerance: opts.residual_tol,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn q_equals_m_gives_unit_eigenvalues() {
        let m = SparseMatrix::<f64>::from_diagonal(&vec![0.5; 12]);
        let pairs = smallest_eigenpairs(&m, &m, 4, &EigenOptions::default()).unwrap();
        for lambda in &pairs.eigenvalues {
            assert!((lambda - 1.0).abs() < 1e-9, "eigenvalue {lambda}");
        }
    }

    #[test]
    fn zero_form_gives_zero_eigenvalues_with_orthonormal_vectors() {
        let q = SparseMatrix::<f64>::zeros(10, 10);
        let m = SparseMatrix::from_diagonal(&vec![2.0; 10]);
        let pairs = smallest_eigenpairs(&q, &m, 3, &EigenOptions::default()).unwrap();
        for lambda in &pairs.eigenvalues {
            assert!(lambda.abs() < 1e-12);
        }
        let mdiag = m.diagonal();
        for i in 0..3 {
            for j in 0..3 {
                let dot = m_dot(&mdiag, &pairs.eigenvectors[i], &pairs.eigenvectors[j]);
                let expected = if i == j { 1.0 } else { 0.0 };
                assert!((dot - expected).abs() <= 1e-8);
            }
        }
    }

    #[test]
    fn rejects_k_not_below_n() {
        let m = SparseMatrix::from_diagonal(&vec![1.0; 3]);
        assert!(matches!(
            smallest_eigenpairs(&m, &m, 3, &EigenOptions::default()),
            Err(EigenError::TooManyPairs { .. })
        ));
    }

    #[test]
    fn jacobi_matches_known_two_by_two() {
        let a: Vec<Vec<f64>> = vec![vec![2.0, 1.0], vec![1.0, 2.0]];
        let (vals, _) = jacobi_small(&a);
        assert!((vals[0] - 1.0).abs() < 1e-14);
        assert!((vals[1] - 3.0).abs() < 1e-14);
    }
}
