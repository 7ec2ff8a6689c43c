//! Exact linear algebra on `so(n)`.
//!
//! Skew-symmetric matrices carry the angular velocities `ω`, `Ω` and momenta
//! `k`, `M` of the rolling ball. The module fixes the conventions used
//! everywhere else in the crate:
//!
//! - wedge product `x ∧ y = x yᵀ - y xᵀ`,
//! - invariant scalar product `⟨X, Y⟩ = -½ tr(X Y)`, under which the basis
//!   `E_i ∧ E_j` (i < j) is orthonormal and the basis coefficient of a skew
//!   matrix equals its (i, j) entry,
//! - `h^γ = R^n ∧ γ` and its ⟨,⟩-orthogonal complement `so(n-1)^γ`,
//! - the 3-D hat map sending `x` to the matrix acting as `x ×`.
//!
//! Skew matrices are stored as full n×n arrays (n stays desk-scale); the
//! coefficient view in the `E_i ∧ E_j` basis is used for diagonal inertia
//! operators and linear solves on the coefficient space.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};

/// Absolute entry tolerance for antisymmetry/orthogonality validation.
/// Violation is an error, not a silent renormalization.
pub const VALIDATION_TOL: f64 = 1e-10;

/// Number of basis elements `E_i ∧ E_j`, i < j, of `so(n)`.
#[inline]
pub fn pair_count(n: usize) -> usize {
    n * (n - 1) / 2
}

/// Lexicographic index of the pair (i, j), i < j, in the coefficient basis.
#[inline]
pub fn pair_index(n: usize, i: usize, j: usize) -> usize {
    debug_assert!(i < j && j < n);
    i * n - i * (i + 1) / 2 + (j - i - 1)
}

/// Iterator over the ordered pairs (i, j), i < j < n.
pub fn pairs(n: usize) -> impl Iterator<Item = (usize, usize)> {
    (0..n).flat_map(move |i| (i + 1..n).map(move |j| (i, j)))
}

/// An element of `so(n)`: a validated antisymmetric matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct SkewMatrix {
    entries: DMatrix<f64>,
}

impl SkewMatrix {
    /// Validates antisymmetry to [`VALIDATION_TOL`] on entries.
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        assert_eq!(entries.nrows(), entries.ncols(), "skew matrix must be square");
        let defect = (&entries + entries.transpose()).abs().max();
        if defect > VALIDATION_TOL {
            return Err(Error::NotAntisymmetric { defect });
        }
        // Exact antisymmetrization so that downstream identities hold to
        // machine precision rather than to the validation tolerance.
        let sym = (&entries - entries.transpose()) * 0.5;
        Ok(Self { entries: sym })
    }

    /// Builds a skew matrix from entries assumed exactly antisymmetric
    /// (internal fast path for formulas that produce skew output).
    pub(crate) fn from_antisymmetric_unchecked(entries: DMatrix<f64>) -> Self {
        Self { entries }
    }

    /// The zero element of `so(n)`.
    pub fn zeros(n: usize) -> Self {
        Self {
            entries: DMatrix::zeros(n, n),
        }
    }

    /// Basis element `E_i ∧ E_j`.
    pub fn basis(n: usize, i: usize, j: usize) -> Self {
        let mut m = DMatrix::zeros(n, n);
        m[(i, j)] = 1.0;
        m[(j, i)] = -1.0;
        Self { entries: m }
    }

    /// Rebuilds a skew matrix from its coefficient vector in the
    /// `E_i ∧ E_j` basis (lexicographic pair order).
    pub fn from_coeffs(n: usize, coeffs: &DVector<f64>) -> Self {
        assert_eq!(coeffs.len(), pair_count(n), "coefficient count mismatch");
        let mut m = DMatrix::zeros(n, n);
        for (idx, (i, j)) in pairs(n).enumerate() {
            m[(i, j)] = coeffs[idx];
            m[(j, i)] = -coeffs[idx];
        }
        Self { entries: m }
    }

    /// Matrix dimension n.
    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    /// Basis coefficient `M_ij = ⟨M, E_i ∧ E_j⟩`, equal to the (i, j) entry.
    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        self.entries[(i, j)]
    }

    /// Coefficient vector in the `E_i ∧ E_j` basis. Round-trips exactly with
    /// [`SkewMatrix::from_coeffs`].
    pub fn coeffs(&self) -> DVector<f64> {
        let n = self.dim();
        DVector::from_iterator(pair_count(n), pairs(n).map(|(i, j)| self.entries[(i, j)]))
    }

    /// The underlying matrix.
    #[inline]
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }

    /// Applies the matrix to a vector.
    #[inline]
    pub fn apply_vec(&self, v: &DVector<f64>) -> DVector<f64> {
        &self.entries * v
    }

    /// Commutator [M, N] = MN - NM.
    pub fn commutator(&self, other: &SkewMatrix) -> SkewMatrix {
        let mn = &self.entries * &other.entries;
        let nm = &other.entries * &self.entries;
        SkewMatrix::from_antisymmetric_unchecked(mn - nm)
    }

    /// Linear combination `self + c * other`.
    pub fn add_scaled(&self, c: f64, other: &SkewMatrix) -> SkewMatrix {
        SkewMatrix::from_antisymmetric_unchecked(&self.entries + c * &other.entries)
    }

    /// Scalar multiple.
    pub fn scale(&self, c: f64) -> SkewMatrix {
        SkewMatrix::from_antisymmetric_unchecked(c * &self.entries)
    }
}

/// An element of SO(n): a validated rotation matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct RotationMatrix {
    entries: DMatrix<f64>,
}

impl RotationMatrix {
    /// Validates `gᵀ g = I` and `det g = +1` to [`VALIDATION_TOL`].
    pub fn new(entries: DMatrix<f64>) -> Result<Self> {
        assert_eq!(entries.nrows(), entries.ncols(), "rotation must be square");
        let n = entries.nrows();
        let defect = (entries.transpose() * &entries - DMatrix::identity(n, n))
            .abs()
            .max();
        let det = entries.determinant();
        if defect > VALIDATION_TOL || (det - 1.0).abs() > VALIDATION_TOL {
            return Err(Error::NotRotation { defect, det });
        }
        Ok(Self { entries })
    }

    /// Identity rotation.
    pub fn identity(n: usize) -> Self {
        Self {
            entries: DMatrix::identity(n, n),
        }
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.entries.nrows()
    }

    #[inline]
    pub fn matrix(&self) -> &DMatrix<f64> {
        &self.entries
    }
}

/// Orthonormal basis of the hyperplane γ^⊥ (Gram–Schmidt seeded with the
/// coordinate axes least aligned with γ). γ need not be normalized.
pub fn orthonormal_complement(gamma: &DVector<f64>) -> Vec<DVector<f64>> {
    let n = gamma.len();
    let g = gamma / gamma.norm();
    let mut basis: Vec<DVector<f64>> = Vec::with_capacity(n - 1);
    let mut axes: Vec<usize> = (0..n).collect();
    axes.sort_by(|&i, &j| g[i].abs().partial_cmp(&g[j].abs()).unwrap());
    for &i in axes.iter().take(n - 1) {
        let mut v = DVector::zeros(n);
        v[i] = 1.0;
        v -= g.dot(&v) * &g;
        for b in &basis {
            let proj = b.dot(&v);
            v -= proj * b;
        }
        let norm = v.norm();
        v /= norm;
        basis.push(v);
    }
    basis
}

/// Wedge product `x ∧ y = x yᵀ - y xᵀ`.
///
/// Panics if the dimensions differ.
pub fn wedge(x: &DVector<f64>, y: &DVector<f64>) -> SkewMatrix {
    assert_eq!(x.len(), y.len(), "wedge: dimension mismatch");
    let m = x * y.transpose() - y * x.transpose();
    SkewMatrix::from_antisymmetric_unchecked(m)
}

/// Invariant scalar product `⟨M, N⟩ = -½ tr(M N)`.
///
/// Symmetric, bilinear and positive definite on `so(n)`; the basis
/// `E_i ∧ E_j` is orthonormal.
pub fn inner(m: &SkewMatrix, n: &SkewMatrix) -> f64 {
    assert_eq!(m.dim(), n.dim(), "inner: dimension mismatch");
    let a = m.matrix();
    let b = n.matrix();
    // -½ tr(A B) = +½ Σ_ij A_ij B_ij for antisymmetric A, B.
    let mut acc = 0.0;
    for i in 0..a.nrows() {
        for j in 0..a.ncols() {
            acc += a[(i, j)] * b[(i, j)];
        }
    }
    0.5 * acc
}

/// Norm induced by [`inner`].
pub fn norm(m: &SkewMatrix) -> f64 {
    inner(m, m).sqrt()
}

/// Orthogonal projection of `so(n)` onto `h^γ = R^n ∧ γ` with respect to the
/// invariant scalar product: `pr_{h^γ}(M) = (M γ) ∧ γ`.
///
/// `γ` must be a unit vector for this to be the orthogonal projector.
pub fn proj_h_gamma(m: &SkewMatrix, gamma: &DVector<f64>) -> SkewMatrix {
    let mg = m.apply_vec(gamma);
    wedge(&mg, gamma)
}

/// Projection onto the complement `so(n-1)^γ = (h^γ)^⊥`:
/// `M - pr_{h^γ}(M)`.
pub fn proj_complement(m: &SkewMatrix, gamma: &DVector<f64>) -> SkewMatrix {
    let p = proj_h_gamma(m, gamma);
    m.add_scaled(-1.0, &p)
}

/// Adjoint action `Ad_g(M) = g M gᵀ`. Preserves [`inner`] and maps `h^Γ`
/// to `h^{gΓ}`.
pub fn adjoint(g: &RotationMatrix, m: &SkewMatrix) -> SkewMatrix {
    assert_eq!(g.dim(), m.dim(), "adjoint: dimension mismatch");
    let res = g.matrix() * m.matrix() * g.matrix().transpose();
    SkewMatrix::from_antisymmetric_unchecked(res)
}

/// 3-D hat map: `(x₁, x₂, x₃)` to the matrix with rows
/// `(0, -x₃, x₂; x₃, 0, -x₁; -x₂, x₁, 0)`, so that `hat(x) y = x × y`.
///
/// Panics unless the vector has length 3.
pub fn hat(x: &DVector<f64>) -> SkewMatrix {
    assert_eq!(x.len(), 3, "hat map is defined for n = 3 only");
    let m = DMatrix::from_row_slice(
        3,
        3,
        &[0.0, -x[2], x[1], x[2], 0.0, -x[0], -x[1], x[0], 0.0],
    );
    SkewMatrix::from_antisymmetric_unchecked(m)
}

/// Inverse of the 3-D hat map.
///
/// Panics unless the matrix is 3×3.
pub fn unhat(m: &SkewMatrix) -> DVector<f64> {
    assert_eq!(m.dim(), 3, "unhat is defined for n = 3 only");
    let e = m.matrix();
    DVector::from_vec(vec![e[(2, 1)], e[(0, 2)], e[(1, 0)]])
}
