//! Inertia operators on `so(n)` diagonal in the basis `E_i ∧ E_j`.
//!
//! The Chaplygin-sphere operator has coefficients
//! `c_ij = a_i a_j D / (D - a_i a_j)` with `0 < a_i a_j < D`, the associated
//! Veselova operator has `c_ij = 1/(a_i a_j)`, and the two are linked by
//! `D 𝓘 = I + D I⁻¹` coefficient-wise. The module also carries the 3-D
//! principal-axis parametrization, the Lagrange (symmetric) specialization
//! with its mass tensor, and the Fedorov map between the 3-D Veselova and
//! Chaplygin-ball parameters.
//!
//! Operators are stored as coefficient tables, never as dense matrices on the
//! coefficient space; applications are O(n²).

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::son::{pair_count, pair_index, pairs, SkewMatrix};

/// A positive operator on `so(n)` diagonal in the `E_i ∧ E_j` basis.
#[derive(Debug, Clone, PartialEq)]
pub struct DiagonalInertia {
    n: usize,
    coeffs: Vec<f64>,
}

impl DiagonalInertia {
    /// Builds the operator from a coefficient function over pairs i < j.
    /// All coefficients must be strictly positive.
    pub fn from_fn(n: usize, f: impl Fn(usize, usize) -> f64) -> Result<Self> {
        let mut coeffs = Vec::with_capacity(pair_count(n));
        for (i, j) in pairs(n) {
            let c = f(i, j);
            if !(c > 0.0) || !c.is_finite() {
                return Err(Error::InadmissibleParams(format!(
                    "inertia coefficient c_{}{} = {c} must be positive and finite",
                    i + 1,
                    j + 1
                )));
            }
            coeffs.push(c);
        }
        Ok(Self { n, coeffs })
    }

    /// Scalar operator `s · Id` (homogeneous ball).
    pub fn scalar(n: usize, s: f64) -> Result<Self> {
        Self::from_fn(n, |_, _| s)
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.n
    }

    /// Coefficient on the basis element `E_i ∧ E_j` (either index order).
    #[inline]
    pub fn coeff(&self, i: usize, j: usize) -> f64 {
        let (i, j) = if i < j { (i, j) } else { (j, i) };
        self.coeffs[pair_index(self.n, i, j)]
    }

    /// Applies the operator: coefficient-wise scaling `M_ij ↦ c_ij M_ij`.
    pub fn apply(&self, m: &SkewMatrix) -> SkewMatrix {
        self.map(m, |c| c)
    }

    /// Applies the inverse operator: `M_ij ↦ M_ij / c_ij`.
    pub fn apply_inverse(&self, m: &SkewMatrix) -> SkewMatrix {
        self.map(m, |c| 1.0 / c)
    }

    fn map(&self, m: &SkewMatrix, f: impl Fn(f64) -> f64) -> SkewMatrix {
        assert_eq!(m.dim(), self.n, "inertia: dimension mismatch");
        let mut out = DMatrix::zeros(self.n, self.n);
        for (i, j) in pairs(self.n) {
            let v = f(self.coeff(i, j)) * m.coeff(i, j);
            out[(i, j)] = v;
            out[(j, i)] = -v;
        }
        SkewMatrix::from_antisymmetric_unchecked(out)
    }
}

/// Parameters `A = diag(a_1, …, a_n)`, `D = m ρ²` of the Chaplygin-sphere
/// inertia operator, validated against `0 < a_i a_j < D` for all pairs
/// (including i = j).
#[derive(Debug, Clone, PartialEq)]
pub struct ChaplyginParams {
    a: DVector<f64>,
    d: f64,
}

impl ChaplyginParams {
    pub fn new(a: DVector<f64>, d: f64) -> Result<Self> {
        if a.len() < 3 {
            return Err(Error::InadmissibleParams(format!(
                "dimension n = {} must be at least 3",
                a.len()
            )));
        }
        if !(d > 0.0) {
            return Err(Error::InadmissibleParams(format!("D = {d} must be positive")));
        }
        for i in 0..a.len() {
            if !(a[i] > 0.0) {
                return Err(Error::InadmissibleParams(format!(
                    "a_{} = {} must be positive",
                    i + 1,
                    a[i]
                )));
            }
            for j in i..a.len() {
                if a[i] * a[j] >= d {
                    return Err(Error::InadmissibleParams(format!(
                        "a_{}*a_{} = {} must be < D = {d}",
                        i + 1,
                        j + 1,
                        a[i] * a[j]
                    )));
                }
            }
        }
        Ok(Self { a, d })
    }

    #[inline]
    pub fn dim(&self) -> usize {
        self.a.len()
    }

    #[inline]
    pub fn a(&self) -> &DVector<f64> {
        &self.a
    }

    #[inline]
    pub fn d(&self) -> f64 {
        self.d
    }

    /// Whether the operator is the inertia tensor of an actual rigid body:
    /// always for n = 3, and for n ≥ 4 only in the Lagrange case
    /// `a_1 = … = a_{n-1}`. Recorded as metadata; nothing is rejected.
    pub fn physically_realizable(&self) -> bool {
        let n = self.dim();
        if n == 3 {
            return true;
        }
        let head = self.a[0];
        (0..n - 1).all(|i| self.a[i] == head)
    }
}

/// Chaplygin-sphere inertia operator `c_ij = a_i a_j D / (D - a_i a_j)`.
pub fn chaplygin_inertia(params: &ChaplyginParams) -> DiagonalInertia {
    let a = params.a();
    let d = params.d();
    DiagonalInertia::from_fn(a.len(), |i, j| a[i] * a[j] * d / (d - a[i] * a[j]))
        .expect("admissible parameters give positive coefficients")
}

/// Veselova inertia operator `c_ij = 1/(a_i a_j)`.
pub fn veselova_inertia(a: &DVector<f64>) -> Result<DiagonalInertia> {
    for (i, &ai) in a.iter().enumerate() {
        if !(ai > 0.0) {
            return Err(Error::InadmissibleParams(format!(
                "a_{} = {ai} must be positive",
                i + 1
            )));
        }
    }
    DiagonalInertia::from_fn(a.len(), |i, j| 1.0 / (a[i] * a[j]))
}

/// Recovers the parameters `a` from a generic 3-D principal inertia tensor
/// `I = diag(I_1, I_2, I_3)`:
///
/// `a_i = √(I_1 I_2 I_3 D) (I_i + D) / (I_i √((I_1+D)(I_2+D)(I_3+D)))`.
///
/// Pushing the result back through [`chaplygin_inertia`] and the 3-D vector
/// identification reproduces `diag(I_1, I_2, I_3)` with `I_1 = c_23`,
/// `I_2 = c_13`, `I_3 = c_12`.
pub fn params_from_principal_3d(moments: [f64; 3], d: f64) -> Result<ChaplyginParams> {
    for (i, &m) in moments.iter().enumerate() {
        if !(m > 0.0) {
            return Err(Error::InadmissibleParams(format!(
                "I_{} = {m} must be positive",
                i + 1
            )));
        }
    }
    if !(d > 0.0) {
        return Err(Error::InadmissibleParams(format!("D = {d} must be positive")));
    }
    let [i1, i2, i3] = moments;
    let num = (i1 * i2 * i3 * d).sqrt();
    let den = ((i1 + d) * (i2 + d) * (i3 + d)).sqrt();
    let a = DVector::from_iterator(3, moments.iter().map(|&ii| num * (ii + d) / (ii * den)));
    ChaplyginParams::new(a, d)
}

/// Principal moments `(I_1, I_2, I_3) = (c_23, c_13, c_12)` of the operator
/// under the 3-D vector identification.
pub fn principal_moments_3d(inertia: &DiagonalInertia) -> [f64; 3] {
    assert_eq!(inertia.dim(), 3, "principal moments are a 3-D notion");
    [inertia.coeff(1, 2), inertia.coeff(0, 2), inertia.coeff(0, 1)]
}

/// Lagrange (SO(n-1)-symmetric) parameters together with the mass tensor
/// `J = diag(J_1, …, J_1, J_n)` realizing the operator as `Iω = Jω + ωJ`.
#[derive(Debug, Clone)]
pub struct LagrangeParams {
    pub params: ChaplyginParams,
    pub j_head: f64,
    pub j_tail: f64,
}

/// Builds the multidimensional Lagrange case `a = (a_1, …, a_1, a_n)`,
/// `a_1 ≠ a_n`, with mass-tensor entries
/// `J_1 = a_1² D / (2(D - a_1²))` and
/// `J_n = a_1 a_n D/(D - a_1 a_n) - J_1`, subject to `2 a_n D > a_1 a_n + a_1 D`.
pub fn lagrange_params(n: usize, a1: f64, an: f64, d: f64) -> Result<LagrangeParams> {
    if a1 == an {
        return Err(Error::InadmissibleParams(
            "Lagrange case requires a_1 != a_n".into(),
        ));
    }
    if 2.0 * an * d <= a1 * an + a1 * d {
        return Err(Error::InadmissibleParams(format!(
            "2 a_n D = {} must be > a_1 a_n + a_1 D = {}",
            2.0 * an * d,
            a1 * an + a1 * d
        )));
    }
    let mut a = DVector::from_element(n, a1);
    a[n - 1] = an;
    let params = ChaplyginParams::new(a, d)?;
    let j_head = a1 * a1 * d / (2.0 * (d - a1 * a1));
    let j_tail = a1 * an * d / (d - a1 * an) - j_head;
    Ok(LagrangeParams {
        params,
        j_head,
        j_tail,
    })
}

/// Fedorov's 3-D correspondence between the Veselova tensor `𝓘`
/// (eigenvalues > 1) and the Chaplygin-ball data:
///
/// `I = D(𝓘 - Id)⁻¹`, `ω = -(1/D)(𝓘 - Id) w`, inverted by
/// `𝓘 = Id + D I⁻¹`, `w = -I ω`.
pub fn fedorov_map_3d(
    script_i: [f64; 3],
    d: f64,
    w: &DVector<f64>,
) -> Result<([f64; 3], DVector<f64>)> {
    assert_eq!(w.len(), 3);
    for (idx, &ii) in script_i.iter().enumerate() {
        if ii <= 1.0 {
            return Err(Error::InadmissibleParams(format!(
                "Veselova tensor eigenvalue 𝓘_{} = {ii} must be > 1",
                idx + 1
            )));
        }
    }
    let moments = [
        d / (script_i[0] - 1.0),
        d / (script_i[1] - 1.0),
        d / (script_i[2] - 1.0),
    ];
    let omega = DVector::from_iterator(3, (0..3).map(|i| -(script_i[i] - 1.0) * w[i] / d));
    Ok((moments, omega))
}

/// Inverse of [`fedorov_map_3d`]: `𝓘 = Id + D I⁻¹`, `w = -I ω`.
pub fn fedorov_map_3d_inverse(moments: [f64; 3], d: f64, omega: &DVector<f64>) -> ([f64; 3], DVector<f64>) {
    assert_eq!(omega.len(), 3);
    let script_i = [
        1.0 + d / moments[0],
        1.0 + d / moments[1],
        1.0 + d / moments[2],
    ];
    let w = DVector::from_iterator(3, (0..3).map(|i| -moments[i] * omega[i]));
    (script_i, w)
}
