//! Discrete quadratic smoothness energies: a symmetric PSD form `Q`, its
//! companion mass matrix, and the stacked second-derivative operator the
//! form was condensed from.

use crate::scalar::Real;
use crate::sparse::matrix::SparseMatrix;

/// Which smoothness energy a quadratic form discretizes.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum EnergyKind<T> {
    HessianNatural,
    LaplacianZeroNeumann,
    LaplacianNatural,
    CrouzeixRaviart,
    /// `(1−α)·squared-Laplacian + α·squared-Hessian`
    Blend(T),
}

/// Identifies the domain an operator was assembled on, for compatibility
/// checks between energies.
#[derive(Clone, Copy, Debug, PartialEq)]
pub enum DomainTag<T> {
    Grid { nx: usize, ny: usize, h: T, dofs: usize },
    Mesh { vertices: usize, faces: usize, dim: usize },
    Interval { nodes: usize, h: T },
}

/// Stacked pointwise second-derivative rows with their quadrature weights.
/// The associated quadratic form is `HᵀM̃H` with `M̃ = diag(row_mass)`.
#[derive(Clone, Debug)]
pub struct SecondOrderOp<T> {
    pub rows: SparseMatrix<T>,
    pub row_mass: Vec<T>,
}

impl<T: Real> SecondOrderOp<T> {
    pub fn new(rows: SparseMatrix<T>, row_mass: Vec<T>) -> Self {
        assert_eq!(rows.nrows(), row_mass.len(), "row mass length mismatch");
        Self { rows, row_mass }
    }

    /// Condensed quadratic form `HᵀM̃H`; exactly symmetric by construction.
    pub fn quadratic_matrix(&self) -> SparseMatrix<T> {
        self.rows.normal_product(&self.row_mass)
    }
}

/// A discrete smoothness energy `u ↦ ½ uᵀQu` with its node mass matrix.
#[derive(Clone, Debug)]
pub struct DiscreteEnergy<T> {
    pub q: SparseMatrix<T>,
    pub mass: SparseMatrix<T>,
    pub kind: EnergyKind<T>,
    pub domain: DomainTag<T>,
    /// The stacked operator behind `q`; `None` for blended forms.
    pub operator: Option<SecondOrderOp<T>>,
}

impl<T: Real> DiscreteEnergy<T> {
    pub fn from_operator(
        op: SecondOrderOp<T>,
        mass: SparseMatrix<T>,
        kind: EnergyKind<T>,
        domain: DomainTag<T>,
    ) -> Self {
        let q = op.quadratic_matrix();
        Self { q, mass, kind, domain, operator: Some(op) }
    }

    pub fn n(&self) -> usize {
        self.q.nrows()
    }

    pub fn mass_diagonal(&self) -> Vec<T> {
        self.mass.diagonal()
    }

    /// `uᵀQu`, evaluated through the stacked operator when available:
    /// `Σ_k M̃_kk (Hu)_k²` avoids the cancellation the condensed form
    /// suffers on (near-)null-space inputs.
    pub fn quadratic(&self, u: &[T]) -> T {
        match &self.operator {
            Some(op) => {
                let hu = op.rows.mul_vec(u);
                hu.iter()
                    .zip(&op.row_mass)
                    .fold(T::zero(), |acc, (&v, &w)| acc + w * v * v)
            }
            None => self.q.quadratic_form(u),
        }
    }

    /// Energy value `½ uᵀQu`.
    pub fn value(&self, u: &[T]) -> T {
        self.quadratic(u) * T::from_f64(0.5).unwrap()
    }

    /// How many constraints are needed to pin the null space, when the
    /// energy kind makes that dimension known in advance.
    pub fn null_dimension_hint(&self) -> Option<usize> {
        match (self.kind, &self.domain) {
            (EnergyKind::HessianNatural, DomainTag::Interval { .. }) => Some(2),
            (EnergyKind::HessianNatural, _) => Some(self.ambient_dim() + 1),
            (EnergyKind::CrouzeixRaviart, _) => Some(self.ambient_dim() + 1),
            (EnergyKind::LaplacianZeroNeumann, _) => Some(1),
            (EnergyKind::Blend(alpha), _) if alpha > T::zero() => Some(self.ambient_dim() + 1),
            _ => None,
        }
    }

    fn ambient_dim(&self) -> usize {
        match self.domain {
            DomainTag::Grid { .. } => 2,
            DomainTag::Mesh { dim, .. } => dim,
            DomainTag::Interval { .. } => 1,
        }
    }
}
