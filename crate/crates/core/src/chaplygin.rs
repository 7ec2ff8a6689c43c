//! The reduced Chaplygin sphere at every implemented reduction level.
//!
//! Levels, from least to most reduced:
//!
//! - `(k, γ) ∈ so(n)* × S^{n-1}` with `k̇ = [k, ω]`, `γ̇ = -ωγ`, where
//!   `k = Iω + D pr_{h^γ} ω` is the momentum relative to the contact point;
//! - `T*S^{n-1}` in redundant coordinates `(γ, p)` at the zero level of the
//!   SO(n-1) momentum map, via `k = γ ∧ p`, `ω = I⁻¹(γ ∧ ξ)` with ξ solved
//!   from `p = ξ - D I⁻¹(γ ∧ ξ)γ`;
//! - the closed-form extended field on `R^{2n} ∖ {γ = 0}` for the special
//!   inertia operator `c_ij = a_i a_j D/(D - a_i a_j)`;
//! - the classical 3-D ball in vector form, and the homogeneous (scalar
//!   inertia) geodesic specialization.
//!
//! Attitude/contact reconstruction `ġ = gω`, `ṙ_i = ρ(g ω g⁻¹ Γ)_i` closes
//! the ladder back up to the physical motion.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::inertia::{ChaplyginParams, DiagonalInertia};
use crate::numerics::integrator::{integrate, IntegratorConfig, Trajectory};
use crate::son::{
    orthonormal_complement, pair_count, pairs, proj_complement, proj_h_gamma, wedge,
    RotationMatrix, SkewMatrix,
};
use crate::state::{flatten_matrix, unflatten_matrix};

/// `(γ, A⁻¹γ)` for `A = diag(a)`.
#[inline]
pub fn ainv_quadratic(gamma: &DVector<f64>, a: &DVector<f64>) -> f64 {
    gamma.iter().zip(a.iter()).map(|(g, ai)| g * g / ai).sum()
}

#[inline]
fn a_mul(a: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().zip(a.iter()).map(|(x, ai)| x * ai))
}

#[inline]
fn ainv_mul(a: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().zip(a.iter()).map(|(x, ai)| x / ai))
}

// ---------------------------------------------------------------------------
// Zero-momentum reduction to T*S^{n-1}, generic inertia
// ---------------------------------------------------------------------------

/// Solves `p = ξ - D I⁻¹(γ ∧ ξ)γ` for the unique ξ orthogonal to γ.
///
/// The operator maps γ^⊥ to itself, so the solve is an (n-1)×(n-1) linear
/// system in an orthonormal basis of γ^⊥. Requires `(γ, p) = 0`, `|γ| = 1`.
pub fn xi_from_p(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    inertia: &DiagonalInertia,
    d: f64,
) -> Result<DVector<f64>> {
    let n = gamma.len();
    let basis = orthonormal_complement(gamma);
    let mut sys = DMatrix::zeros(n - 1, n - 1);
    for (col, u) in basis.iter().enumerate() {
        // T(u) = u - D I⁻¹(γ ∧ u) γ
        let t_u = u - d * inertia.apply_inverse(&wedge(gamma, u)).apply_vec(gamma);
        for (row, v) in basis.iter().enumerate() {
            sys[(row, col)] = v.dot(&t_u);
        }
    }
    let rhs = DVector::from_iterator(n - 1, basis.iter().map(|v| v.dot(p)));
    let sol = sys.lu().solve(&rhs).ok_or(Error::SingularSystem {
        context: "xi_from_p restricted system",
    })?;
    let mut xi = DVector::zeros(n);
    for (c, u) in sol.iter().zip(basis.iter()) {
        xi += *c * u;
    }
    Ok(xi)
}

/// Angular velocity `ω = I⁻¹(γ ∧ ξ(γ, p))` of the reduced flow.
pub fn omega_reduced(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    inertia: &DiagonalInertia,
    d: f64,
) -> Result<SkewMatrix> {
    let xi = xi_from_p(gamma, p, inertia, d)?;
    Ok(inertia.apply_inverse(&wedge(gamma, &xi)))
}

/// Reduced Chaplygin-sphere field on `T*S^{n-1}` for a generic diagonal
/// inertia: `γ̇ = -ωγ`, `ṗ = -ωp`.
pub fn cotangent_rhs(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    inertia: &DiagonalInertia,
    d: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let omega = omega_reduced(gamma, p, inertia, d)?;
    Ok((-omega.apply_vec(gamma), -omega.apply_vec(p)))
}

/// Reduced Hamiltonian `H = ½⟨γ ∧ p, I⁻¹(γ ∧ ξ)⟩ = ½⟨k, ω⟩`.
pub fn hamiltonian_reduced(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    inertia: &DiagonalInertia,
    d: f64,
) -> Result<f64> {
    let omega = omega_reduced(gamma, p, inertia, d)?;
    Ok(0.5 * crate::son::inner(&wedge(gamma, p), &omega))
}

/// Reduced momentum `K = (γ, γ)(p, p) - (γ, p)²`, defined on all of R^{2n}.
#[inline]
pub fn momentum_k(gamma: &DVector<f64>, p: &DVector<f64>) -> f64 {
    gamma.dot(gamma) * p.dot(p) - gamma.dot(p).powi(2)
}

// ---------------------------------------------------------------------------
// Closed forms for the special inertia operator
// ---------------------------------------------------------------------------

/// Closed form `ξ = (Ap - (p, Aγ)γ) / (D(γ, A⁻¹γ))` valid on the constraint
/// manifold.
pub fn xi_closed(gamma: &DVector<f64>, p: &DVector<f64>, params: &ChaplyginParams) -> DVector<f64> {
    let a = params.a();
    let d = params.d();
    let alpha = ainv_quadratic(gamma, a);
    let ap = a_mul(a, p);
    let p_a_gamma = p.dot(&a_mul(a, gamma));
    (ap - p_a_gamma * gamma) / (d * alpha)
}

/// Closed-form angular velocity
/// `ω = (A⁻¹γ ∧ p - γ ∧ Ap / D) / (D (γ, A⁻¹γ))`.
pub fn omega_closed(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    params: &ChaplyginParams,
) -> SkewMatrix {
    let a = params.a();
    let d = params.d();
    let alpha = ainv_quadratic(gamma, a);
    let w1 = wedge(&ainv_mul(a, gamma), p);
    let w2 = wedge(gamma, &a_mul(a, p));
    w1.add_scaled(-1.0 / d, &w2).scale(1.0 / (d * alpha))
}

/// The extended reduced field on `R^{2n} ∖ {γ = 0}`:
///
/// `γ̇ = p/D - (p,γ)/(Dα) A⁻¹γ + (γ,Ap)/(D²α) γ - (γ,γ)/(D²α) Ap`,
/// `ṗ = (p,A⁻¹γ)/(Dα) p - (p,p)/(Dα) A⁻¹γ + (p,Ap)/(D²α) γ - (p,γ)/(D²α) Ap`,
///
/// with `α = (γ, A⁻¹γ)`. Off the constraint manifold this extension
/// preserves φ₁, φ₂, (p, p) and K exactly, and the Hamiltonian on the slice
/// φ₂ = 0.
pub fn cotangent_rhs_closed(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    params: &ChaplyginParams,
) -> (DVector<f64>, DVector<f64>) {
    let a = params.a();
    let d = params.d();
    let d2 = d * d;
    let alpha = ainv_quadratic(gamma, a);
    let ainv_g = ainv_mul(a, gamma);
    let ap = a_mul(a, p);
    let p_g = p.dot(gamma);
    let g_ap = gamma.dot(&ap);
    let g_g = gamma.dot(gamma);
    let p_p = p.dot(p);
    let p_ainv_g = p.dot(&ainv_g);
    let p_ap = p.dot(&ap);

    let gamma_dot = p / d - (p_g / (d * alpha)) * &ainv_g + (g_ap / (d2 * alpha)) * gamma
        - (g_g / (d2 * alpha)) * &ap;
    let p_dot = (p_ainv_g / (d * alpha)) * p - (p_p / (d * alpha)) * &ainv_g
        + (p_ap / (d2 * alpha)) * gamma
        - (p_g / (d2 * alpha)) * &ap;
    (gamma_dot, p_dot)
}

/// Closed-form Hamiltonian
/// `H = (D(γ, A⁻¹γ)(p, p) - (p, Ap)) / (2D²(γ, A⁻¹γ))`.
pub fn hamiltonian_closed(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    params: &ChaplyginParams,
) -> f64 {
    let a = params.a();
    let d = params.d();
    let alpha = ainv_quadratic(gamma, a);
    (d * alpha * p.dot(p) - p.dot(&a_mul(a, p))) / (2.0 * d * d * alpha)
}

/// Gradient of [`hamiltonian_closed`] with respect to (γ, p).
pub fn hamiltonian_closed_gradient(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    params: &ChaplyginParams,
) -> (DVector<f64>, DVector<f64>) {
    let a = params.a();
    let d = params.d();
    let alpha = ainv_quadratic(gamma, a);
    let p_ap = p.dot(&a_mul(a, p));
    // H = (p,p)/(2D) - (p,Ap)/(2D²α)
    let dh_dgamma = (p_ap / (d * d * alpha * alpha)) * ainv_mul(a, gamma);
    let dh_dp = p / d - a_mul(a, p) / (d * d * alpha);
    (dh_dgamma, dh_dp)
}

/// Invariant measure density `μ(γ) = (γ, A⁻¹γ)^{-(n-2)/2}` of the reduced
/// flow on `T*S^{n-1}`.
pub fn measure_density(gamma: &DVector<f64>, a: &DVector<f64>) -> f64 {
    let n = gamma.len();
    ainv_quadratic(gamma, a).powf(-((n as f64) - 2.0) / 2.0)
}

/// Gradient of [`measure_density`] with respect to γ.
pub fn measure_density_gradient(gamma: &DVector<f64>, a: &DVector<f64>) -> DVector<f64> {
    let n = gamma.len() as f64;
    let alpha = ainv_quadratic(gamma, a);
    -(n - 2.0) * alpha.powf(-n / 2.0) * ainv_mul(a, gamma)
}

/// Analytic divergence of the extended field in `R^{2n}`:
///
/// `div X = (n-2) [(γ, A⁻¹p)/(Dα) + (γ, Ap)/(D²α)] + Ψ`, with
/// `Ψ = [2(A⁻²γ,γ)/(Dα²) + 2(γ,γ)/(D²α²) - tr A⁻¹/(Dα) - tr A/(D²α)] (γ, p)`.
///
/// Ψ vanishes on φ₂ = 0, where the divergence reduces to
/// `(n-2)(γ, A⁻¹γ̇)/(γ, A⁻¹γ) = -μ̇/μ`.
pub fn divergence_closed(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    params: &ChaplyginParams,
) -> f64 {
    let a = params.a();
    let d = params.d();
    let d2 = d * d;
    let n = gamma.len() as f64;
    let alpha = ainv_quadratic(gamma, a);
    let ainv_g = ainv_mul(a, gamma);
    let main = (n - 2.0) * (gamma.dot(&ainv_mul(a, p)) / (d * alpha)
        + gamma.dot(&a_mul(a, p)) / (d2 * alpha));
    let a2inv_g_g = ainv_g.dot(&ainv_g);
    let tr_ainv: f64 = a.iter().map(|ai| 1.0 / ai).sum();
    let tr_a: f64 = a.iter().sum();
    let psi = (2.0 * a2inv_g_g / (d * alpha * alpha) + 2.0 * gamma.dot(gamma) / (d2 * alpha * alpha)
        - tr_ainv / (d * alpha)
        - tr_a / (d2 * alpha))
        * gamma.dot(p);
    main + psi
}

// ---------------------------------------------------------------------------
// so(n)* × S^{n-1} level
// ---------------------------------------------------------------------------

/// Matrix of the reduced metric `κ_red = I + D pr_{h^γ}` in the E_i∧E_j
/// coefficient basis (symmetric positive definite).
pub fn reduced_metric_matrix(
    gamma: &DVector<f64>,
    inertia: &DiagonalInertia,
    d: f64,
) -> DMatrix<f64> {
    let n = gamma.len();
    let m = pair_count(n);
    let mut out = DMatrix::zeros(m, m);
    for (col, (i, j)) in pairs(n).enumerate() {
        let basis = SkewMatrix::basis(n, i, j);
        let image = inertia
            .apply(&basis)
            .add_scaled(d, &proj_h_gamma(&basis, gamma));
        out.set_column(col, &image.coeffs());
    }
    out
}

/// Solves `k = Iω + D pr_{h^γ} ω` for ω.
pub fn omega_from_k(
    k: &SkewMatrix,
    gamma: &DVector<f64>,
    inertia: &DiagonalInertia,
    d: f64,
) -> Result<SkewMatrix> {
    let sys = reduced_metric_matrix(gamma, inertia, d);
    let chol = nalgebra::linalg::Cholesky::new(sys).ok_or(Error::SingularSystem {
        context: "reduced metric kappa_red",
    })?;
    let coeffs = chol.solve(&k.coeffs());
    Ok(SkewMatrix::from_coeffs(gamma.len(), &coeffs))
}

/// Forward momentum map `k = Iω + D pr_{h^γ} ω`.
pub fn k_from_omega(
    omega: &SkewMatrix,
    gamma: &DVector<f64>,
    inertia: &DiagonalInertia,
    d: f64,
) -> SkewMatrix {
    inertia
        .apply(omega)
        .add_scaled(d, &proj_h_gamma(omega, gamma))
}

/// Reduced equations on `so(n)* × S^{n-1}`: `k̇ = [k, ω]`, `γ̇ = -ωγ`.
pub fn full_reduced_rhs(
    k: &SkewMatrix,
    gamma: &DVector<f64>,
    inertia: &DiagonalInertia,
    d: f64,
) -> Result<(SkewMatrix, DVector<f64>)> {
    let omega = omega_from_k(k, gamma, inertia, d)?;
    Ok((k.commutator(&omega), -omega.apply_vec(gamma)))
}

/// SO(n-1)-momentum `pr_{so(n-1)^γ}(k)`: zero exactly on the reduced
/// zero-momentum level.
pub fn momentum_map(k: &SkewMatrix, gamma: &DVector<f64>) -> SkewMatrix {
    proj_complement(k, gamma)
}

/// Embedding of `T*S^{n-1}` into `so(n)* × S^{n-1}`: `(γ, p) ↦ (γ ∧ p, γ)`.
pub fn embed(gamma: &DVector<f64>, p: &DVector<f64>) -> (SkewMatrix, DVector<f64>) {
    (wedge(gamma, p), gamma.clone())
}

/// Measure density `1/√det(I + D pr_{h^γ})` of the invariant volume on
/// `so(n)* × S^{n-1}`, with the determinant taken in the coefficient basis.
pub fn measure_density_full(gamma: &DVector<f64>, inertia: &DiagonalInertia, d: f64) -> f64 {
    let det = reduced_metric_matrix(gamma, inertia, d).determinant();
    1.0 / det.sqrt()
}

// ---------------------------------------------------------------------------
// Homogeneous ball
// ---------------------------------------------------------------------------

/// Homogeneous-ball field `γ̇ = p/(s+D)`, `ṗ = -(p,p)γ/(s+D)`: the geodesic
/// flow of the round metric multiplied by s+D.
pub fn homogeneous_rhs(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    s: f64,
    d: f64,
) -> (DVector<f64>, DVector<f64>) {
    (p / (s + d), -(p.dot(p) / (s + d)) * gamma)
}

/// Angular velocity `ω = (γ ∧ p)/(s + D)`, constant along the homogeneous
/// flow.
pub fn homogeneous_omega(gamma: &DVector<f64>, p: &DVector<f64>, s: f64, d: f64) -> SkewMatrix {
    wedge(gamma, p).scale(1.0 / (s + d))
}

/// Analytic great-circle solution of the homogeneous ball:
/// `γ(t) = cos(νt)γ₀ + sin(νt)p̂₀`, `p(t) = |p₀|(cos(νt)p̂₀ - sin(νt)γ₀)`,
/// `ν = |p₀|/(s+D)`.
pub fn homogeneous_exact(
    gamma0: &DVector<f64>,
    p0: &DVector<f64>,
    s: f64,
    d: f64,
    t: f64,
) -> (DVector<f64>, DVector<f64>) {
    let pn = p0.norm();
    if pn == 0.0 {
        return (gamma0.clone(), p0.clone());
    }
    let phat = p0 / pn;
    let nu = pn / (s + d);
    let (sin, cos) = (nu * t).sin_cos();
    (cos * gamma0 + sin * &phat, pn * (cos * &phat - sin * gamma0))
}

// ---------------------------------------------------------------------------
// Classical 3-D ball
// ---------------------------------------------------------------------------

/// Solves `k = Iω + Dω - D(ω, γ)γ` for ω (3×3 symmetric positive definite
/// system).
pub fn classical3d_omega(
    k: &DVector<f64>,
    gamma: &DVector<f64>,
    moments: [f64; 3],
    d: f64,
) -> Result<DVector<f64>> {
    let mut sys = DMatrix::zeros(3, 3);
    for i in 0..3 {
        for j in 0..3 {
            let mut v = if i == j { moments[i] + d } else { 0.0 };
            v -= d * gamma[i] * gamma[j];
            sys[(i, j)] = v;
        }
    }
    sys.lu().solve(k).ok_or(Error::SingularSystem {
        context: "classical 3-D momentum relation",
    })
}

/// Momentum `k = Iω + Dω - D(ω, γ)γ` of the classical ball.
pub fn classical3d_k(omega: &DVector<f64>, gamma: &DVector<f64>, moments: [f64; 3], d: f64) -> DVector<f64> {
    let mut k = DVector::zeros(3);
    for i in 0..3 {
        k[i] = moments[i] * omega[i] + d * omega[i];
    }
    k - d * omega.dot(gamma) * gamma
}

fn cross(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

/// Classical Chaplygin ball equations `k̇ = k × ω`, `γ̇ = γ × ω`.
pub fn classical3d_rhs(
    k: &DVector<f64>,
    gamma: &DVector<f64>,
    moments: [f64; 3],
    d: f64,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let omega = classical3d_omega(k, gamma, moments, d)?;
    Ok((cross(k, &omega), cross(gamma, &omega)))
}

/// The four integrals `F₁ = (k, γ)`, `F₂ = (γ, γ)`, `F₃ = ½(k, ω)`,
/// `F₄ = (k, k)` of the classical ball.
pub fn classical3d_integrals(
    k: &DVector<f64>,
    gamma: &DVector<f64>,
    moments: [f64; 3],
    d: f64,
) -> Result<[f64; 4]> {
    let omega = classical3d_omega(k, gamma, moments, d)?;
    Ok([
        k.dot(gamma),
        gamma.dot(gamma),
        0.5 * k.dot(&omega),
        k.dot(k),
    ])
}

/// Chaplygin's 3-D measure density
/// `1/√(det(I + D Id)(1 - D(γ, (I + D Id)⁻¹γ)))`.
pub fn classical3d_measure(gamma: &DVector<f64>, moments: [f64; 3], d: f64) -> Result<f64> {
    let det: f64 = moments.iter().map(|i| i + d).product();
    let quad: f64 = (0..3).map(|i| gamma[i] * gamma[i] / (moments[i] + d)).sum();
    let radicand = det * (1.0 - d * quad);
    if radicand <= 0.0 {
        return Err(Error::InadmissibleParams(format!(
            "measure radicand {radicand} must be positive"
        )));
    }
    Ok(1.0 / radicand.sqrt())
}

// ---------------------------------------------------------------------------
// Reconstruction
// ---------------------------------------------------------------------------

/// Attitude/contact reconstruction along a reduced flow.
#[derive(Debug, Clone)]
pub struct Reconstruction {
    pub times: Vec<f64>,
    pub attitudes: Vec<DMatrix<f64>>,
    /// Contact position in the plane, n-1 components per sample.
    pub contacts: Vec<DVector<f64>>,
    /// Max over samples of the entrywise defect `|gᵀg - I|`.
    pub max_orthogonality_defect: f64,
    /// Max over samples of the vertical contact velocity `|(gωg⁻¹Γ, Γ)| ρ`.
    pub max_vertical_velocity: f64,
}

/// Integrates `ġ = gω(y)`, `ṙ_i = ρ (g ω g⁻¹ Γ)_i` (i < n, Γ = E_n) along the
/// reduced flow `ẏ = reduced_rhs(y)`. With `project` on, g is re-orthonormalized
/// after every step (QR with positive diagonal).
///
/// The reduced state may be empty, in which case `omega_of` sees the empty
/// vector and must return a constant angular velocity.
#[allow(clippy::too_many_arguments)]
pub fn reconstruct(
    reduced_rhs: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    omega_of: &dyn Fn(&DVector<f64>) -> SkewMatrix,
    y0: &DVector<f64>,
    g0: &RotationMatrix,
    r0: &DVector<f64>,
    rho: f64,
    cfg: &IntegratorConfig,
    project: bool,
) -> Result<Reconstruction> {
    let n = g0.dim();
    let m = y0.len();
    assert_eq!(r0.len(), n - 1, "contact position has n-1 components");

    let mut z0 = DVector::zeros(m + n * n + (n - 1));
    z0.rows_mut(0, m).copy_from(y0);
    z0.rows_mut(m, n * n).copy_from(&flatten_matrix(g0.matrix()));
    z0.rows_mut(m + n * n, n - 1).copy_from(r0);

    let rhs = |z: &DVector<f64>| -> DVector<f64> {
        let y = z.rows(0, m).into_owned();
        let g = unflatten_matrix(n, z.rows(m, n * n).as_slice());
        let omega = omega_of(&y);
        let g_dot = &g * omega.matrix();
        // spatial angular velocity Ω = g ω g⁻¹ applied to Γ = E_n
        let omega_space_gamma = &g * (omega.matrix() * g.transpose().column(n - 1));
        let mut out = DVector::zeros(m + n * n + (n - 1));
        out.rows_mut(0, m).copy_from(&reduced_rhs(&y));
        out.rows_mut(m, n * n).copy_from(&flatten_matrix(&g_dot));
        for i in 0..n - 1 {
            out[m + n * n + i] = rho * omega_space_gamma[i];
        }
        out
    };

    let projector = |z: &mut DVector<f64>| {
        let g = unflatten_matrix(n, z.rows(m, n * n).as_slice());
        let qr = g.qr();
        let mut q = qr.q();
        let r = qr.r();
        for j in 0..n {
            if r[(j, j)] < 0.0 {
                for i in 0..n {
                    q[(i, j)] = -q[(i, j)];
                }
            }
        }
        z.rows_mut(m, n * n).copy_from(&flatten_matrix(&q));
    };

    let traj = if project {
        integrate(&rhs, &z0, cfg, Some(&projector))?
    } else {
        integrate(&rhs, &z0, cfg, None)?
    };

    let mut attitudes = Vec::with_capacity(traj.len());
    let mut contacts = Vec::with_capacity(traj.len());
    let mut max_defect: f64 = 0.0;
    let mut max_vert: f64 = 0.0;
    let eye = DMatrix::identity(n, n);
    for z in &traj.states {
        let y = z.rows(0, m).into_owned();
        let g = unflatten_matrix(n, z.rows(m, n * n).as_slice());
        max_defect = max_defect.max((g.transpose() * &g - &eye).abs().max());
        let omega = omega_of(&y);
        let v = &g * (omega.matrix() * g.transpose().column(n - 1));
        max_vert = max_vert.max((rho * v[n - 1]).abs());
        attitudes.push(g);
        contacts.push(z.rows(m + n * n, n - 1).into_owned());
    }
    Ok(Reconstruction {
        times: traj.times,
        attitudes,
        contacts,
        max_orthogonality_defect: max_defect,
        max_vertical_velocity: max_vert,
    })
}

// ---------------------------------------------------------------------------
// Flat-state adapters used by the scenario layer and the integrator
// ---------------------------------------------------------------------------

/// `[γ; p]` adapter for [`cotangent_rhs_closed`].
pub fn cotangent_flat_rhs(params: &ChaplyginParams) -> impl Fn(&DVector<f64>) -> DVector<f64> + '_ {
    move |y| {
        let (gamma, p) = crate::state::split_pair(y);
        let (gd, pd) = cotangent_rhs_closed(&gamma, &p, params);
        crate::state::join_pair(&gd, &pd)
    }
}

/// Projector renormalizing γ and removing the γ-component of p.
pub fn cotangent_projector(y: &mut DVector<f64>) {
    let n = y.len() / 2;
    let (mut gamma, mut p) = crate::state::split_pair(y);
    gamma /= gamma.norm();
    let overlap = gamma.dot(&p);
    p -= overlap * &gamma;
    for i in 0..n {
        y[i] = gamma[i];
        y[n + i] = p[i];
    }
}

/// `[k coefficients; γ]` adapter for [`full_reduced_rhs`].
pub fn full_flat_rhs<'a>(
    inertia: &'a DiagonalInertia,
    d: f64,
) -> impl Fn(&DVector<f64>) -> DVector<f64> + 'a {
    move |y| {
        let n = inertia.dim();
        let m = pair_count(n);
        let k = SkewMatrix::from_coeffs(n, &y.rows(0, m).into_owned());
        let gamma = y.rows(m, n).into_owned();
        let (kd, gd) = full_reduced_rhs(&k, &gamma, inertia, d)
            .expect("kappa_red is positive definite for admissible parameters");
        let mut out = DVector::zeros(m + n);
        out.rows_mut(0, m).copy_from(&kd.coeffs());
        out.rows_mut(m, n).copy_from(&gd);
        out
    }
}

/// Drift summary of a trajectory under a set of named scalar quantities.
pub fn drift_table(
    traj: &Trajectory,
    quantities: &[(&str, &dyn Fn(&DVector<f64>) -> f64)],
) -> Vec<(String, f64)> {
    quantities
        .iter()
        .map(|(name, q)| (name.to_string(), traj.relative_drift(q)))
        .collect()
}
