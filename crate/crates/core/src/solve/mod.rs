//! Application solvers on top of the discrete energies: constrained
//! interpolation, dense smoothing, modal analysis, subspace deformation
//! weights, L1 smoothing and flow, and the annulus reference solution.

pub mod annulus;
pub mod flow;
pub mod l1;

use thiserror::Error;

use crate::domain::constraints::ConstraintSet;
use crate::scalar::{real, Real};
use crate::sparse::cholesky::{CholeskyFactor, SolveOptions};
use crate::sparse::eigen::{smallest_eigenpairs, EigenError, EigenOptions, EigenPairs};
use crate::sparse::energy::{DiscreteEnergy, EnergyKind};
use crate::sparse::minimize::{min_quadratic_eq, MinimizeError};

pub use annulus::{annulus_reference, AnnulusError, RadialBiharmonic};
pub use flow::{l1_flow, FlowError, FlowOperator};
pub use l1::{l1_smooth, DualCertificate, L1Error, L1Problem, L1Solution};

#[derive(Debug, Error)]
pub enum SolverError {
    #[error("interpolation needs at least one constraint")]
    NoConstraints,
    #[error(
        "constraints cannot fix the energy's null space: {given} value pins \
         for a null space of dimension {needed}"
    )]
    TooFewConstraints { given: usize, needed: usize },
    #[error(
        "rank-deficient system: the constraint sites leave a zero-energy \
         direction free (e.g. collinear sites under the Hessian energy); {detail}"
    )]
    RankDeficient { detail: String },
    #[error("degenerate handle set: handles must affinely span the plane")]
    DegenerateHandles,
    #[error("subspace weights need at least 3 handles, got {0}")]
    TooFewHandles(usize),
    #[error("minimization failed: {0}")]
    Minimize(MinimizeError),
    #[error("eigensolver failed: {0}")]
    Eigen(#[from] EigenError),
}

impl From<MinimizeError> for SolverError {
    fn from(err: MinimizeError) -> Self {
        match err {
            MinimizeError::RankDeficient { detail } => SolverError::RankDeficient { detail },
            other => SolverError::Minimize(other),
        }
    }
}

/// Solutions of pure interpolation problems stay on the scale of their
/// constraint values; anything wildly beyond that signals an unpinned
/// null-space direction that slipped through factorization.
fn check_solution_scale<T: Real>(u: &[T], constraints: &ConstraintSet<T>) -> Result<(), SolverError> {
    let scale = T::one() + constraints.max_abs_value();
    let worst = u.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
    if worst > real::<T>(1e8) * scale {
        return Err(SolverError::RankDeficient {
            detail: format!(
                "solution magnitude {worst:e} vastly exceeds the constraint scale {scale:e}"
            ),
        });
    }
    Ok(())
}

/// Minimizes `½uᵀQu` subject to the fixed values: smooth scattered-data
/// interpolation under the energy's boundary behavior.
pub fn interpolate<T: Real>(
    energy: &DiscreteEnergy<T>,
    constraints: &ConstraintSet<T>,
    opts: &SolveOptions,
) -> Result<Vec<T>, SolverError> {
    if constraints.is_empty() {
        return Err(SolverError::NoConstraints);
    }
    if let Some(needed) = energy.null_dimension_hint() {
        if constraints.len() < needed {
            return Err(SolverError::TooFewConstraints { given: constraints.len(), needed });
        }
    }
    let u = min_quadratic_eq(&energy.q, &energy.mass, None, T::one(), constraints, opts)?;
    check_solution_scale(&u, constraints)?;
    Ok(u)
}

/// Minimizes `½(u−f)ᵀM(u−f) + ½·w·uᵀQu`, i.e. solves `(M + wQ)u = Mf`.
///
/// For the zero-Neumann Laplacian the constant null direction is deflated
/// exactly: at `w ≫ 1` the factorization of `M + wQ` cannot resolve the
/// mass-scale eigenvalue against `w·ε·‖Q‖` rounding, which would pollute
/// the limit (the M-weighted mean) the heavy-smoothing regime converges to.
pub fn smooth<T: Real>(
    energy: &DiscreteEnergy<T>,
    data: &[T],
    w_smooth: T,
    opts: &SolveOptions,
) -> Result<Vec<T>, SolverError> {
    assert!(w_smooth > T::zero(), "smoothing weight must be positive");
    if energy.kind == EnergyKind::LaplacianZeroNeumann {
        return smooth_deflated_constants(energy, data, w_smooth, opts);
    }
    Ok(min_quadratic_eq(
        &energy.q,
        &energy.mass,
        Some(data),
        w_smooth,
        &ConstraintSet::empty(),
        opts,
    )?)
}

fn smooth_deflated_constants<T: Real>(
    energy: &DiscreteEnergy<T>,
    data: &[T],
    w_smooth: T,
    opts: &SolveOptions,
) -> Result<Vec<T>, SolverError> {
    let mdiag = energy.mass_diagonal();
    let total = mdiag.iter().fold(T::zero(), |acc, &m| acc + m);
    let mean = data
        .iter()
        .zip(&mdiag)
        .fold(T::zero(), |acc, (&f, &m)| acc + f * m)
        / total;
    let centered: Vec<T> = data.iter().map(|&f| f - mean).collect();
    let mut v = min_quadratic_eq(
        &energy.q,
        &energy.mass,
        Some(&centered),
        w_smooth,
        &ConstraintSet::empty(),
        opts,
    )?;
    // the exact complement solution carries no constant component; whatever
    // is there is factorization noise
    let drift = v
        .iter()
        .zip(&mdiag)
        .fold(T::zero(), |acc, (&vi, &m)| acc + vi * m)
        / total;
    for vi in v.iter_mut() {
        *vi = *vi - drift + mean;
    }
    Ok(v)
}

/// The `k` lowest-frequency modes of the energy's generalized pencil `(Q, M)`.
pub fn modes<T: Real>(
    energy: &DiscreteEnergy<T>,
    k: usize,
    opts: &EigenOptions,
) -> Result<EigenPairs<T>, SolverError> {
    Ok(smallest_eigenpairs(&energy.q, &energy.mass, k, opts)?)
}

/// Per-handle weight fields: column `i` minimizes the energy subject to
/// `w_i(p_j) = δ_ij`. Columns share one factorization of the reduced form.
#[derive(Clone, Debug)]
pub struct WeightMatrix<T> {
    /// `columns[i][v]` is the weight of handle `i` at node `v`
    pub columns: Vec<Vec<T>>,
    pub handles: Vec<usize>,
}

impl<T: Real> WeightMatrix<T> {
    pub fn num_nodes(&self) -> usize {
        self.columns.first().map_or(0, Vec::len)
    }

    /// `max_v |Σ_i W[v,i] − 1|`: partition-of-unity residual.
    pub fn max_row_sum_deviation(&self) -> T {
        let n = self.num_nodes();
        let mut worst = T::zero();
        for v in 0..n {
            let sum = self.columns.iter().fold(T::zero(), |acc, col| acc + col[v]);
            worst = worst.max((sum - T::one()).abs());
        }
        worst
    }

    /// `max_v ‖Σ_i W[v,i]·p_i − p_v‖`: linear-reproduction residual given
    /// node positions.
    pub fn linear_reproduction_error(&self, positions: &[[T; 3]]) -> T {
        let mut worst = T::zero();
        for (v, pv) in positions.iter().enumerate() {
            let mut rebuilt = [T::zero(); 3];
            for (col, &h) in self.columns.iter().zip(&self.handles) {
                for c in 0..3 {
                    rebuilt[c] += col[v] * positions[h][c];
                }
            }
            let mut dist = T::zero();
            for c in 0..3 {
                let d = rebuilt[c] - pv[c];
                dist += d * d;
            }
            worst = worst.max(dist.sqrt());
        }
        worst
    }
}

/// Checks that handle sites affinely span the plane: some pair of edge
/// vectors from the first handle must have a non-negligible cross product.
fn handles_affinely_span<T: Real>(positions: &[[T; 3]]) -> bool {
    let p0 = positions[0];
    let mut scale = T::zero();
    for p in positions {
        for c in 0..3 {
            scale = scale.max((p[c] - p0[c]).abs());
        }
    }
    if scale == T::zero() {
        return false;
    }
    let tol = real::<T>(1e-10) * scale * scale;
    for a in positions.iter().skip(1) {
        for b in positions.iter().skip(1) {
            let u = [a[0] - p0[0], a[1] - p0[1], a[2] - p0[2]];
            let v = [b[0] - p0[0], b[1] - p0[1], b[2] - p0[2]];
            let cx = u[1] * v[2] - u[2] * v[1];
            let cy = u[2] * v[0] - u[0] * v[2];
            let cz = u[0] * v[1] - u[1] * v[0];
            if (cx * cx + cy * cy + cz * cz).sqrt() > tol {
                return true;
            }
        }
    }
    false
}

/// Computes one smooth weight field per handle by constrained minimization.
/// `handle_positions` are the snapped node positions, used to reject
/// degenerate (collinear) handle sets up front.
pub fn subspace_weights<T: Real>(
    energy: &DiscreteEnergy<T>,
    handles: &[usize],
    handle_positions: &[[T; 3]],
    opts: &SolveOptions,
) -> Result<WeightMatrix<T>, SolverError> {
    if handles.len() < 3 {
        return Err(SolverError::TooFewHandles(handles.len()));
    }
    assert_eq!(handles.len(), handle_positions.len());
    if !handles_affinely_span(handle_positions) {
        return Err(SolverError::DegenerateHandles);
    }
    let n = energy.n();
    for &h in handles {
        if h >= n {
            return Err(SolverError::Minimize(MinimizeError::ConstraintOutOfRange {
                index: h,
                n,
            }));
        }
    }
    let mut is_handle = vec![false; n];
    for &h in handles {
        is_handle[h] = true;
    }
    let free: Vec<usize> = (0..n).filter(|&v| !is_handle[v]).collect();
    let mut columns = vec![vec![T::zero(); n]; handles.len()];
    for (i, col) in columns.iter_mut().enumerate() {
        col[handles[i]] = T::one();
    }
    if free.is_empty() {
        return Ok(WeightMatrix { columns, handles: handles.to_vec() });
    }
    let mut col_map = vec![None; n];
    for (new, &old) in free.iter().enumerate() {
        col_map[old] = Some(new);
    }
    let reduced = energy.q.select_rows(&free).select_columns(&col_map, free.len());
    let factor = CholeskyFactor::new(&reduced).map_err(|err| SolverError::RankDeficient {
        detail: format!("shared factorization failed: {err}"),
    })?;
    for (i, col) in columns.iter_mut().enumerate() {
        let qcol = energy.q.mul_vec(col);
        let rhs: Vec<T> = free.iter().map(|&v| -qcol[v]).collect();
        let x = crate::sparse::cholesky::refine(&reduced, &rhs, &factor, opts)
            .map_err(|err| SolverError::Minimize(MinimizeError::Solve(err)))?;
        for (&v, &xv) in free.iter().zip(&x) {
            col[v] = xv;
        }
        let worst = col.iter().fold(T::zero(), |acc, &v| acc.max(v.abs()));
        if worst > real::<T>(1e8) {
            return Err(SolverError::RankDeficient {
                detail: format!("weight column {i} has magnitude {worst:e}"),
            });
        }
    }
    Ok(WeightMatrix { columns, handles: handles.to_vec() })
}
