//! The Veselova problem: the reduced n-dimensional flow on `T*S^{n-1}`, the
//! classical 3-D system with its integrals and measure, the Fedorov
//! transformation linking it to the Chaplygin ball, and the
//! ellipsoid-geodesic Gauss-map equivalence.
//!
//! The reduced field is `γ̇ = -Φ₁γ`, `ṗ = -Φ₁p` with
//! `Φ₁ = γ ∧ Ap / (γ, A⁻¹γ)`, which written out reads
//!
//! `γ̇ = ((γ, γ) Ap - (p, Aγ) γ) / (γ, A⁻¹γ)`,
//! `ṗ = ((p, γ) Ap - (p, Ap) γ) / (γ, A⁻¹γ)`.
//!
//! Both φ₁ and φ₂ are exact first integrals of this extension, as are
//! `(p, p)` and hence `K`; the Hamiltonian `𝓗 = (Ap, p) / (2(γ, A⁻¹γ))` is
//! conserved on the slice φ₂ = 0. Under the shared time substitution
//! `dτ = N dt` and `p̃ = N p` the flow becomes the Hamiltonian geodesic flow
//! of `𝓗(γ, p̃) = (D²/2)(A p̃, p̃)`.

use nalgebra::DVector;

use crate::chaplygin::{ainv_quadratic, classical3d_integrals, classical3d_k};
use crate::error::Result;
use crate::hamiltonization::{dirac_flow, ScalarField};
use crate::inertia::fedorov_map_3d;
use crate::state::{join_pair, split_pair};

#[inline]
fn a_mul(a: &DVector<f64>, v: &DVector<f64>) -> DVector<f64> {
    DVector::from_iterator(v.len(), v.iter().zip(a.iter()).map(|(x, ai)| x * ai))
}

/// Internal momentum map value `Φ₁ = γ ∧ Ap / (γ, A⁻¹γ)` of the reduced
/// Veselova flow.
pub fn phi1_operator(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    a: &DVector<f64>,
) -> crate::son::SkewMatrix {
    crate::son::wedge(gamma, &a_mul(a, p)).scale(1.0 / ainv_quadratic(gamma, a))
}

/// Extended reduced Veselova field on `R^{2n} ∖ {γ = 0}`.
pub fn reduced_rhs(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    a: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let alpha = ainv_quadratic(gamma, a);
    let ap = a_mul(a, p);
    let gamma_dot = (gamma.dot(gamma) * &ap - p.dot(&a_mul(a, gamma)) * gamma) / alpha;
    let p_dot = (p.dot(gamma) * &ap - p.dot(&ap) * gamma) / alpha;
    (gamma_dot, p_dot)
}

/// `[γ; p]` adapter for [`reduced_rhs`].
pub fn reduced_flat_rhs(a: &DVector<f64>) -> impl Fn(&DVector<f64>) -> DVector<f64> + '_ {
    move |y| {
        let (gamma, p) = split_pair(y);
        let (gd, pd) = reduced_rhs(&gamma, &p, a);
        join_pair(&gd, &pd)
    }
}

/// Veselova Hamiltonian in tilde variables: `𝓗 = (D²/2)(A p̃, p̃)`.
pub fn hamiltonian_cal_tilde(p_tilde: &DVector<f64>, a: &DVector<f64>, d: f64) -> f64 {
    0.5 * d * d * p_tilde.dot(&a_mul(a, p_tilde))
}

/// The same invariant expressed in the original momenta:
/// `𝓗 = (A p, p) / (2 (γ, A⁻¹γ))` (independent of D).
pub fn hamiltonian_cal(gamma: &DVector<f64>, p: &DVector<f64>, a: &DVector<f64>) -> f64 {
    0.5 * p.dot(&a_mul(a, p)) / ainv_quadratic(gamma, a)
}

/// [`ScalarField`] for 𝓗 in tilde variables.
pub fn hamiltonian_cal_field<'a>(a: &'a DVector<f64>, d: f64) -> ScalarField<'a> {
    ScalarField::new(
        move |_, p| hamiltonian_cal_tilde(p, a, d),
        move |g, p| (DVector::zeros(g.len()), d * d * a_mul(a, p)),
    )
}

/// Hamiltonian geodesic flow of 𝓗 in the time τ (the Hamiltonization of the
/// reduced Veselova problem).
pub fn geodesic_cal_rhs(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    a: &DVector<f64>,
    d: f64,
) -> (DVector<f64>, DVector<f64>) {
    dirac_flow(&hamiltonian_cal_field(a, d), gamma, p_tilde)
}

/// `[γ; p̃]` adapter for [`geodesic_cal_rhs`].
pub fn geodesic_cal_flat_rhs(
    a: &DVector<f64>,
    d: f64,
) -> impl Fn(&DVector<f64>) -> DVector<f64> + '_ {
    move |y| {
        let (gamma, pt) = split_pair(y);
        let (gd, pd) = geodesic_cal_rhs(&gamma, &pt, a, d);
        join_pair(&gd, &pd)
    }
}

// ---------------------------------------------------------------------------
// Classical 3-D Veselova system
// ---------------------------------------------------------------------------

/// Constraint multiplier `λ = -(𝓘w × w, 𝓘⁻¹γ) / (𝓘⁻¹γ, γ)`.
pub fn veselova3d_multiplier(w: &DVector<f64>, gamma: &DVector<f64>, tensor: [f64; 3]) -> f64 {
    let iw_x_w = cross3(&diag_mul(tensor, w), w);
    let iinv_g = DVector::from_vec(vec![
        gamma[0] / tensor[0],
        gamma[1] / tensor[1],
        gamma[2] / tensor[2],
    ]);
    -iw_x_w.dot(&iinv_g) / iinv_g.dot(gamma)
}

/// Classical Veselova equations `𝓘ẇ = 𝓘w × w + λγ`, `γ̇ = γ × w`, with λ
/// chosen so that `f₁ = (w, γ)` is a first integral from any initial value.
pub fn veselova3d_rhs(
    w: &DVector<f64>,
    gamma: &DVector<f64>,
    tensor: [f64; 3],
) -> (DVector<f64>, DVector<f64>) {
    let lambda = veselova3d_multiplier(w, gamma, tensor);
    let rhs = cross3(&diag_mul(tensor, w), w) + lambda * gamma;
    let w_dot = DVector::from_vec(vec![
        rhs[0] / tensor[0],
        rhs[1] / tensor[1],
        rhs[2] / tensor[2],
    ]);
    (w_dot, cross3(gamma, w))
}

/// `[w; γ]` adapter for [`veselova3d_rhs`].
pub fn veselova3d_flat_rhs(tensor: [f64; 3]) -> impl Fn(&DVector<f64>) -> DVector<f64> {
    move |y| {
        let (w, gamma) = split_pair(y);
        let (wd, gd) = veselova3d_rhs(&w, &gamma, tensor);
        join_pair(&wd, &gd)
    }
}

/// Momentum `K = 𝓘w - (𝓘⁰w, γ)γ`, `𝓘⁰ = 𝓘 - Id`.
pub fn veselova3d_momentum(w: &DVector<f64>, gamma: &DVector<f64>, tensor: [f64; 3]) -> DVector<f64> {
    let iw = diag_mul(tensor, w);
    let i0w = &iw - w;
    &iw - i0w.dot(gamma) * gamma
}

/// The four integrals `f₁ = (K, γ) = (w, γ)`, `f₂ = (γ, γ)`,
/// `f₃ = ½(K, w) - ½(K, γ)(𝓘⁰w, γ)`, `f₄ = (K, K)`.
pub fn veselova3d_integrals(w: &DVector<f64>, gamma: &DVector<f64>, tensor: [f64; 3]) -> [f64; 4] {
    let k = veselova3d_momentum(w, gamma, tensor);
    let i0w = diag_mul(tensor, w) - w;
    [
        k.dot(gamma),
        gamma.dot(gamma),
        0.5 * k.dot(w) - 0.5 * k.dot(gamma) * i0w.dot(gamma),
        k.dot(&k),
    ]
}

/// Invariant measure density `√(𝓘⁻¹γ, γ)` of the extended 3-D system.
pub fn veselova3d_measure_density(gamma: &DVector<f64>, tensor: [f64; 3]) -> f64 {
    (0..3)
        .map(|i| gamma[i] * gamma[i] / tensor[i])
        .sum::<f64>()
        .sqrt()
}

fn diag_mul(d: [f64; 3], v: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![d[0] * v[0], d[1] * v[1], d[2] * v[2]])
}

fn cross3(a: &DVector<f64>, b: &DVector<f64>) -> DVector<f64> {
    DVector::from_vec(vec![
        a[1] * b[2] - a[2] * b[1],
        a[2] * b[0] - a[0] * b[2],
        a[0] * b[1] - a[1] * b[0],
    ])
}

// ---------------------------------------------------------------------------
// Fedorov correspondence
// ---------------------------------------------------------------------------

/// Pointwise comparison of the Veselova integrals with the Chaplygin-ball
/// integrals pulled back through the Fedorov map `I = D(𝓘 - Id)⁻¹`,
/// `ω = -(1/D)(𝓘 - Id)w`.
///
/// Under this map `k = -K` pointwise, so the invariant-tori correspondence
/// holds with the constants mapped by `F₁ = -f₁`, `F₂ = f₂`,
/// `F₃ = (f₄ - 2f₃)/(2D)`, `F₄ = f₄`. `exact` holds the residuals of those
/// four identities, `naive` the raw differences `|F_i - f_i|` for reporting.
#[derive(Debug, Clone)]
pub struct FedorovReport {
    pub chaplygin_values: [f64; 4],
    pub veselova_values: [f64; 4],
    pub exact: [f64; 4],
    pub naive: [f64; 4],
}

impl FedorovReport {
    pub fn max_exact_residual(&self) -> f64 {
        self.exact.iter().fold(0.0f64, |m, &v| m.max(v))
    }
}

/// Evaluates the Theorem-5 correspondence at one state (on- or
/// off-constraint).
pub fn fedorov_check(
    w: &DVector<f64>,
    gamma: &DVector<f64>,
    tensor: [f64; 3],
    d: f64,
) -> Result<FedorovReport> {
    let f = veselova3d_integrals(w, gamma, tensor);
    let (moments, omega) = fedorov_map_3d(tensor, d, w)?;
    let k = classical3d_k(&omega, gamma, moments, d);
    let big_f = classical3d_integrals(&k, gamma, moments, d)?;
    // k = -K pointwise
    let k_ves = veselova3d_momentum(w, gamma, tensor);
    debug_assert!((&k + &k_ves).norm() < 1e-9 * (1.0 + k.norm()));
    let exact = [
        (big_f[0] + f[0]).abs(),
        (big_f[1] - f[1]).abs(),
        (2.0 * d * big_f[2] - (f[3] - 2.0 * f[2])).abs(),
        (big_f[3] - f[3]).abs(),
    ];
    let naive = [
        (big_f[0] - f[0]).abs(),
        (big_f[1] - f[1]).abs(),
        (big_f[2] - f[2]).abs(),
        (big_f[3] - f[3]).abs(),
    ];
    Ok(FedorovReport {
        chaplygin_values: big_f,
        veselova_values: f,
        exact,
        naive,
    })
}

// ---------------------------------------------------------------------------
// Ellipsoid geodesics and the Gauss map
// ---------------------------------------------------------------------------

/// Geodesic field on the ellipsoid `(x, Ax) = 1`:
/// `ẋ = v`, `v̇ = -((v, Av)/(Ax, Ax)) Ax`, the multiplier keeping both
/// `(x, Ax)` and `(v, Ax)` constant.
pub fn ellipsoid_rhs(
    x: &DVector<f64>,
    v: &DVector<f64>,
    a: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let ax = a_mul(a, x);
    let mu = -v.dot(&a_mul(a, v)) / ax.dot(&ax);
    (v.clone(), mu * ax)
}

/// `[x; v]` adapter for [`ellipsoid_rhs`].
pub fn ellipsoid_flat_rhs(a: &DVector<f64>) -> impl Fn(&DVector<f64>) -> DVector<f64> + '_ {
    move |y| {
        let (x, v) = split_pair(y);
        let (xd, vd) = ellipsoid_rhs(&x, &v, a);
        join_pair(&xd, &vd)
    }
}

/// Gauss map `γ = Ax / |Ax|` of the ellipsoid.
pub fn gauss_map(x: &DVector<f64>, a: &DVector<f64>) -> DVector<f64> {
    let ax = a_mul(a, x);
    let norm = ax.norm();
    ax / norm
}

/// Matched Veselova initial data for an ellipsoid geodesic through (x, v):
/// the reduced flow started here traces the same unparametrized γ-curve as
/// the Gauss image of the geodesic.
///
/// γ₀ is the Gauss image of x; p₀ is chosen orthogonal to γ₀ so that the
/// initial Veselova velocity is a positive multiple of the Gauss-image
/// velocity `d/dt (Ax/|Ax|)`.
pub fn veselova_start_from_ellipsoid(
    x: &DVector<f64>,
    v: &DVector<f64>,
    a: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let gamma = gauss_map(x, a);
    let ax_norm = a_mul(a, x).norm();
    let av = a_mul(a, v);
    // unnormalized tangent of the Gauss image
    let d_raw = (&av - gamma.dot(&av) * &gamma) / ax_norm;
    let alpha = ainv_quadratic(&gamma, a);
    let ainv_d = DVector::from_iterator(x.len(), d_raw.iter().zip(a.iter()).map(|(t, ai)| t / ai));
    let ainv_g = DVector::from_iterator(x.len(), gamma.iter().zip(a.iter()).map(|(g, ai)| g / ai));
    let p = &ainv_d - (gamma.dot(&ainv_d) / alpha) * &ainv_g;
    (gamma, p)
}
