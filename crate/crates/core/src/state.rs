//! Validated phase-space points for the various reduction levels.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::son::{RotationMatrix, SkewMatrix};

/// Constraint tolerance for point validation (φ₁ = 1, φ₂ = 0 and friends).
pub const CONSTRAINT_TOL: f64 = 1e-10;

fn check(constraint: &'static str, residual: f64) -> Result<()> {
    if residual.abs() > CONSTRAINT_TOL {
        return Err(Error::ConstraintViolated {
            constraint,
            residual,
        });
    }
    Ok(())
}

/// Redundant coordinates (γ, p) of `T*S^{n-1}` with `(γ, γ) = 1`,
/// `(γ, p) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct CotangentPoint {
    gamma: DVector<f64>,
    p: DVector<f64>,
}

impl CotangentPoint {
    pub fn new(gamma: DVector<f64>, p: DVector<f64>) -> Result<Self> {
        assert_eq!(gamma.len(), p.len(), "state: dimension mismatch");
        check("phi1 = (gamma,gamma) = 1", gamma.dot(&gamma) - 1.0)?;
        check("phi2 = (gamma,p) = 0", gamma.dot(&p))?;
        Ok(Self { gamma, p })
    }

    #[inline]
    pub fn gamma(&self) -> &DVector<f64> {
        &self.gamma
    }

    #[inline]
    pub fn p(&self) -> &DVector<f64> {
        &self.p
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.gamma.len()
    }
}

/// Rescaled momenta (γ, p̃) with `ψ₁ = (γ, γ) = 1`, `ψ₂ = (γ, p̃) = 0`.
#[derive(Debug, Clone, PartialEq)]
pub struct TildePoint {
    gamma: DVector<f64>,
    p_tilde: DVector<f64>,
}

impl TildePoint {
    pub fn new(gamma: DVector<f64>, p_tilde: DVector<f64>) -> Result<Self> {
        assert_eq!(gamma.len(), p_tilde.len(), "state: dimension mismatch");
        check("psi1 = (gamma,gamma) = 1", gamma.dot(&gamma) - 1.0)?;
        check("psi2 = (gamma,p~) = 0", gamma.dot(&p_tilde))?;
        Ok(Self { gamma, p_tilde })
    }

    #[inline]
    pub fn gamma(&self) -> &DVector<f64> {
        &self.gamma
    }

    #[inline]
    pub fn p_tilde(&self) -> &DVector<f64> {
        &self.p_tilde
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.gamma.len()
    }
}

/// Point (k, γ) of the SO(n-1)-reduced phase space `so(n)* × S^{n-1}`,
/// where k is the angular momentum relative to the contact point.
#[derive(Debug, Clone, PartialEq)]
pub struct ReducedFullState {
    pub k: SkewMatrix,
    pub gamma: DVector<f64>,
}

impl ReducedFullState {
    pub fn new(k: SkewMatrix, gamma: DVector<f64>) -> Result<Self> {
        assert_eq!(k.dim(), gamma.len(), "state: dimension mismatch");
        check("|gamma| = 1", gamma.dot(&gamma) - 1.0)?;
        Ok(Self { k, gamma })
    }
}

/// Attitude and contact-plane position of the rolling ball.
#[derive(Debug, Clone)]
pub struct FullPose {
    pub g: RotationMatrix,
    /// Contact position in the hyperplane, n-1 components.
    pub r: DVector<f64>,
}

/// 3-D Veselova state: body-frame angular velocity w and unit Poisson
/// vector γ. The constraint submanifold additionally has `(w, γ) = 0`, but
/// the extended system is defined for any value of `(w, γ)`.
#[derive(Debug, Clone, PartialEq)]
pub struct Veselova3dState {
    pub w: DVector<f64>,
    pub gamma: DVector<f64>,
}

impl Veselova3dState {
    pub fn new(w: DVector<f64>, gamma: DVector<f64>) -> Result<Self> {
        assert_eq!(w.len(), 3);
        assert_eq!(gamma.len(), 3);
        check("|gamma| = 1", gamma.dot(&gamma) - 1.0)?;
        Ok(Self { w, gamma })
    }
}

/// Splits a flat `[γ; p]` state into its halves.
pub fn split_pair(y: &DVector<f64>) -> (DVector<f64>, DVector<f64>) {
    let n = y.len() / 2;
    (
        DVector::from_iterator(n, (0..n).map(|i| y[i])),
        DVector::from_iterator(n, (0..n).map(|i| y[n + i])),
    )
}

/// Joins (γ, p) into a flat state `[γ; p]`.
pub fn join_pair(gamma: &DVector<f64>, p: &DVector<f64>) -> DVector<f64> {
    let n = gamma.len();
    DVector::from_iterator(2 * n, gamma.iter().chain(p.iter()).copied())
}

/// Flattens a square matrix column-major into a vector.
pub fn flatten_matrix(m: &DMatrix<f64>) -> DVector<f64> {
    DVector::from_column_slice(m.as_slice())
}

/// Rebuilds an n×n matrix from its column-major flattening.
pub fn unflatten_matrix(n: usize, v: &[f64]) -> DMatrix<f64> {
    DMatrix::from_column_slice(n, n, v)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn cotangent_point_validation() {
        let g = DVector::from_vec(vec![1.0, 0.0, 0.0]);
        let p = DVector::from_vec(vec![0.0, 1.0, 0.0]);
        assert!(CotangentPoint::new(g.clone(), p.clone()).is_ok());
        let bad_norm = DVector::from_vec(vec![1.1, 0.0, 0.0]);
        assert!(CotangentPoint::new(bad_norm, p.clone()).is_err());
        let bad_orth = DVector::from_vec(vec![0.5, 1.0, 0.0]);
        assert!(CotangentPoint::new(g, bad_orth).is_err());
    }

    #[test]
    fn pair_round_trip() {
        let g = DVector::from_vec(vec![1.0, 2.0]);
        let p = DVector::from_vec(vec![3.0, 4.0]);
        let y = join_pair(&g, &p);
        let (g2, p2) = split_pair(&y);
        assert_eq!(g, g2);
        assert_eq!(p, p2);
    }
}
