//! Analytic reference for the annulus test: the radially symmetric
//! biharmonic minimizer with fixed boundary values and vanishing radial
//! second derivative at both circles (the second-order condition that
//! survives once Dirichlet values are clamped).

use thiserror::Error;

use crate::scalar::{real, Real};

#[derive(Debug, Error)]
pub enum AnnulusError {
    #[error("radii must satisfy 0 < r0 < r1, got r0={r0}, r1={r1}")]
    BadRadii { r0: f64, r1: f64 },
    #[error("the 4x4 coefficient system is singular")]
    Singular,
}

/// Radial biharmonic `u(r) = a + b·r² + c·ln r + d·r²·ln r`.
#[derive(Clone, Copy, Debug)]
pub struct RadialBiharmonic<T> {
    /// `[a, b, c, d]`
    pub coefficients: [T; 4],
}

impl<T: Real> RadialBiharmonic<T> {
    pub fn eval(&self, r: T) -> T {
        let [a, b, c, d] = self.coefficients;
        a + b * r * r + c * r.ln() + d * r * r * r.ln()
    }

    pub fn second_derivative(&self, r: T) -> T {
        let [_, b, c, d] = self.coefficients;
        real::<T>(2.0) * b - c / (r * r) + d * (real::<T>(2.0) * r.ln() + real(3.0))
    }
}

/// Coefficients of the radial biharmonic with `u(r0)=1`, `u(r1)=0`,
/// `u''(r0)=0`, `u''(r1)=0`, from a dense 4×4 solve.
pub fn annulus_reference<T: Real>(r0: T, r1: T) -> Result<RadialBiharmonic<T>, AnnulusError> {
    if !(r0 > T::zero() && r1 > r0) {
        return Err(AnnulusError::BadRadii {
            r0: crate::scalar::to_f64(r0),
            r1: crate::scalar::to_f64(r1),
        });
    }
    let two = real::<T>(2.0);
    let three = real::<T>(3.0);
    let mut a = [
        [T::one(), r0 * r0, r0.ln(), r0 * r0 * r0.ln()],
        [T::one(), r1 * r1, r1.ln(), r1 * r1 * r1.ln()],
        [T::zero(), two, -T::one() / (r0 * r0), two * r0.ln() + three],
        [T::zero(), two, -T::one() / (r1 * r1), two * r1.ln() + three],
    ];
    let mut b = [T::one(), T::zero(), T::zero(), T::zero()];
    // Gaussian elimination with partial pivoting on the 4x4 system
    for col in 0..4 {
        let mut piv = col;
        for row in col + 1..4 {
            if a[row][col].abs() > a[piv][col].abs() {
                piv = row;
            }
        }
        if a[piv][col].abs() <= real(1e-300) {
            return Err(AnnulusError::Singular);
        }
        a.swap(col, piv);
        b.swap(col, piv);
        for row in col + 1..4 {
            let f = a[row][col] / a[col][col];
            for c in col..4 {
                let sub = f * a[col][c];
                a[row][c] = a[row][c] - sub;
            }
            let sub = f * b[col];
            b[row] = b[row] - sub;
        }
    }
    for col in (0..4).rev() {
        b[col] = b[col] / a[col][col];
        for row in 0..col {
            let sub = a[row][col] * b[col];
            b[row] = b[row] - sub;
        }
    }
    Ok(RadialBiharmonic { coefficients: b })
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn boundary_values_are_interpolated() {
        let u = annulus_reference(1.0f64, 2.0).unwrap();
        assert!((u.eval(1.0) - 1.0).abs() <= 1e-12);
        assert!(u.eval(2.0).abs() <= 1e-12);
    }

    #[test]
    fn second_derivative_vanishes_at_both_circles() {
        let u = annulus_reference(0.5f64, 1.75).unwrap();
        assert!(u.second_derivative(0.5).abs() <= 1e-12);
        assert!(u.second_derivative(1.75).abs() <= 1e-12);
    }

    #[test]
    fn rejects_bad_radii() {
        assert!(annulus_reference(2.0f64, 1.0).is_err());
        assert!(annulus_reference(0.0f64, 1.0).is_err());
    }

    #[test]
    fn second_derivative_formula_matches_central_differences() {
        // the 4x4 system leans on this formula for the natural conditions
        let u = annulus_reference(1.0f64, 3.0).unwrap();
        for r in [1.2, 1.7, 2.4] {
            let h = 1e-5;
            let numeric = (u.eval(r + h) - 2.0 * u.eval(r) + u.eval(r - h)) / (h * h);
            assert!(
                (numeric - u.second_derivative(r)).abs() < 1e-4,
                "r={r}: {numeric} vs {}",
                u.second_derivative(r)
            );
        }
    }
}
