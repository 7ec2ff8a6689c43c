//! Spheroconical coordinates, the commuting quadratic family, linear and
//! Lagrange-case integrals, and shared-foliation verification.
//!
//! On the sphere with parameters `a_1 < … < a_n` the spheroconical
//! coordinates `λ_1 < … < λ_{n-1}` interlace the `a_i` and satisfy
//! `γ_i² = Π_k (a_i - λ_k) / Π_{j≠i} (a_i - a_j)`. With the conjugate
//! momenta `μ_k` of the rescaled form `Σ dp̃_i ∧ dγ_i` the Veselova
//! Hamiltonian separates, and the commuting family is realized explicitly
//! through the separated quantities
//!
//! `U_k = -2D² (λ_k - a_1)⋯(λ_k - a_n) λ_k μ_k²`,
//! `F_m = Σ_k (-1)^m e_m(λ ∖ {λ_k}) U_k / Π_{s≠k}(λ_k - λ_s)`,
//!
//! the coefficients of the degree-(n-2) polynomial interpolating `U_k` at
//! the nodes `λ_k`. Then `F_0 = 𝓗`, `K = 2(-1)^n F_{n-2} / (a_1⋯a_n)` and
//! `H* = K/(2D) - F_0/D²`, so commutativity of the family carries the whole
//! integral ladder. Pairwise commutation is established numerically by the
//! Dirac-bracket oracle, not by citation.

use nalgebra::{DMatrix, DVector};

use crate::chaplygin::ainv_quadratic;
use crate::error::{Error, Result};
use crate::hamiltonization::ScalarField;
use crate::numerics::integrator::{hermite_eval, Trajectory};

/// Minimum spectral gap for chart-based operations.
pub const SPECTRUM_GAP: f64 = 1e-6;
/// Minimum |γ_i| for chart-interior evaluation.
pub const CHART_MARGIN: f64 = 1e-6;

/// Spheroconical point: `a_1 < λ_1 < a_2 < … < λ_{n-1} < a_n` with
/// conjugate momenta μ.
#[derive(Debug, Clone, PartialEq)]
pub struct SpheroconicalPoint {
    pub lambda: Vec<f64>,
    pub mu: Vec<f64>,
}

/// Validates a strictly increasing spectrum with gaps above
/// [`SPECTRUM_GAP`].
pub fn check_spectrum(a: &DVector<f64>) -> Result<()> {
    for i in 1..a.len() {
        if a[i] - a[i - 1] < SPECTRUM_GAP {
            return Err(Error::ChartBoundary(format!(
                "spectral gap a_{} - a_{} = {} below {}",
                i + 1,
                i,
                a[i] - a[i - 1],
                SPECTRUM_GAP
            )));
        }
    }
    Ok(())
}

fn check_interlacing(lambda: &[f64], a: &DVector<f64>) -> Result<()> {
    let n = a.len();
    if lambda.len() != n - 1 {
        return Err(Error::InterlacingViolated(format!(
            "need {} coordinates, got {}",
            n - 1,
            lambda.len()
        )));
    }
    for (k, &l) in lambda.iter().enumerate() {
        if !(a[k] < l && l < a[k + 1]) {
            return Err(Error::InterlacingViolated(format!(
                "lambda_{} = {l} outside (a_{}, a_{}) = ({}, {})",
                k + 1,
                k + 1,
                k + 2,
                a[k],
                a[k + 1]
            )));
        }
    }
    Ok(())
}

/// γ from spheroconical coordinates with a chosen sign pattern:
/// `γ_i = s_i √(Π_k (a_i - λ_k) / Π_{j≠i}(a_i - a_j))`.
pub fn gamma_from_lambda(lambda: &[f64], a: &DVector<f64>, signs: &[f64]) -> Result<DVector<f64>> {
    check_spectrum(a)?;
    check_interlacing(lambda, a)?;
    let n = a.len();
    assert_eq!(signs.len(), n);
    let mut gamma = DVector::zeros(n);
    for i in 0..n {
        let mut num = 1.0;
        for &l in lambda {
            num *= a[i] - l;
        }
        let mut den = 1.0;
        for j in 0..n {
            if j != i {
                den *= a[i] - a[j];
            }
        }
        let sq = num / den;
        debug_assert!(sq >= -1e-15, "interlacing keeps the radicand nonnegative");
        gamma[i] = signs[i].signum() * sq.max(0.0).sqrt();
    }
    Ok(gamma)
}

/// Full chart map `(λ, μ) → (γ, p̃)`: γ from [`gamma_from_lambda`], p̃ the
/// unique vector with `(γ, p̃) = 0` realizing the cotangent lift
/// `μ_k = Σ_i p̃_i ∂γ_i/∂λ_k`.
pub fn cartesian_from_spheroconical(
    pt: &SpheroconicalPoint,
    a: &DVector<f64>,
    signs: &[f64],
) -> Result<(DVector<f64>, DVector<f64>)> {
    let gamma = gamma_from_lambda(&pt.lambda, a, signs)?;
    let n = a.len();
    if gamma.iter().any(|g| g.abs() < CHART_MARGIN) {
        return Err(Error::ChartBoundary(
            "gamma component below chart margin".into(),
        ));
    }
    // rows: γᵀ p̃ = 0 and (∂γ/∂λ_k)ᵀ p̃ = μ_k
    let mut sys = DMatrix::zeros(n, n);
    let mut rhs = DVector::zeros(n);
    for j in 0..n {
        sys[(0, j)] = gamma[j];
    }
    for k in 0..n - 1 {
        for j in 0..n {
            sys[(k + 1, j)] = -gamma[j] / (2.0 * (a[j] - pt.lambda[k]));
        }
        rhs[k + 1] = pt.mu[k];
    }
    let p_tilde = sys.lu().solve(&rhs).ok_or(Error::SingularSystem {
        context: "cotangent lift of the spheroconical chart",
    })?;
    Ok((gamma, p_tilde))
}

/// Inverse chart: λ as the interlacing roots of `Σ γ_i²/(a_i - λ) = 0`,
/// `μ_k = -½ Σ_i p̃_i γ_i / (a_i - λ_k)`.
pub fn spheroconical_from_cartesian(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    a: &DVector<f64>,
) -> Result<SpheroconicalPoint> {
    check_spectrum(a)?;
    let n = a.len();
    if gamma.iter().any(|g| g.abs() < CHART_MARGIN) {
        return Err(Error::ChartBoundary(
            "gamma component below chart margin".into(),
        ));
    }
    let f = |l: f64| -> f64 { (0..n).map(|i| gamma[i] * gamma[i] / (a[i] - l)).sum() };
    let fp = |l: f64| -> f64 {
        (0..n)
            .map(|i| gamma[i] * gamma[i] / ((a[i] - l) * (a[i] - l)))
            .sum()
    };
    let mut lambda = Vec::with_capacity(n - 1);
    for k in 0..n - 1 {
        let gap = a[k + 1] - a[k];
        let mut lo = a[k] + 1e-13 * gap;
        let mut hi = a[k + 1] - 1e-13 * gap;
        // f is strictly increasing from -inf to +inf on the gap
        for _ in 0..80 {
            let mid = 0.5 * (lo + hi);
            if f(mid) < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let mut root = 0.5 * (lo + hi);
        for _ in 0..4 {
            let step = f(root) / fp(root);
            let next = root - step;
            if next > lo && next < hi {
                root = next;
            }
        }
        lambda.push(root);
    }
    let mu = (0..n - 1)
        .map(|k| {
            -0.5 * (0..n)
                .map(|i| p_tilde[i] * gamma[i] / (a[i] - lambda[k]))
                .sum::<f64>()
        })
        .collect();
    Ok(SpheroconicalPoint { lambda, mu })
}

// ---------------------------------------------------------------------------
// The §5.3 quadratic-form identities
// ---------------------------------------------------------------------------

fn root_poly(x: f64, a: &DVector<f64>) -> f64 {
    a.iter().fold(1.0, |acc, &ai| acc * (x - ai))
}

fn root_poly_deriv(x: f64, a: &DVector<f64>) -> f64 {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .filter(|&j| j != i)
                .fold(1.0, |acc, j| acc * (x - a[j]))
        })
        .sum()
}

fn lambda_denominator(lambda: &[f64], k: usize) -> f64 {
    lambda
        .iter()
        .enumerate()
        .filter(|&(s, _)| s != k)
        .fold(1.0, |acc, (_, &l)| acc * (lambda[k] - l))
}

/// `(p̃, p̃)` in chart variables:
/// `-4 Σ_k (λ_k - a_1)⋯(λ_k - a_n) μ_k² / Π_{s≠k}(λ_k - λ_s)`.
pub fn chart_p_squared(pt: &SpheroconicalPoint, a: &DVector<f64>) -> f64 {
    pt.lambda
        .iter()
        .enumerate()
        .map(|(k, &l)| -4.0 * root_poly(l, a) * pt.mu[k] * pt.mu[k] / lambda_denominator(&pt.lambda, k))
        .sum()
}

/// `(γ, A⁻¹γ) = λ_1⋯λ_{n-1} / (a_1⋯a_n)` in chart variables.
pub fn chart_alpha(pt: &SpheroconicalPoint, a: &DVector<f64>) -> f64 {
    let num: f64 = pt.lambda.iter().product();
    let den: f64 = a.iter().product();
    num / den
}

/// `(A p̃, p̃)` in chart variables: the weighted version of
/// [`chart_p_squared`] with an extra factor λ_k.
pub fn chart_ap_squared(pt: &SpheroconicalPoint, a: &DVector<f64>) -> f64 {
    pt.lambda
        .iter()
        .enumerate()
        .map(|(k, &l)| {
            -4.0 * root_poly(l, a) * l * pt.mu[k] * pt.mu[k] / lambda_denominator(&pt.lambda, k)
        })
        .sum()
}

// ---------------------------------------------------------------------------
// The commuting family
// ---------------------------------------------------------------------------

/// Elementary symmetric polynomials `e_0 … e_len` of a list.
fn elementary_symmetric(vals: &[f64]) -> Vec<f64> {
    let mut e = vec![0.0; vals.len() + 1];
    e[0] = 1.0;
    for (count, &v) in vals.iter().enumerate() {
        for m in (1..=count + 1).rev() {
            e[m] += v * e[m - 1];
        }
    }
    e
}

fn lambda_without(lambda: &[f64], skip: &[usize]) -> Vec<f64> {
    lambda
        .iter()
        .enumerate()
        .filter(|(i, _)| !skip.contains(i))
        .map(|(_, &l)| l)
        .collect()
}

/// Separated quantities `U_k = -2D² (λ_k - a_1)⋯(λ_k - a_n) λ_k μ_k²`.
fn separated_u(pt: &SpheroconicalPoint, a: &DVector<f64>, d: f64) -> Vec<f64> {
    pt.lambda
        .iter()
        .zip(pt.mu.iter())
        .map(|(&l, &m)| -2.0 * d * d * root_poly(l, a) * l * m * m)
        .collect()
}

/// The commuting family `F_0 … F_{n-2}` in chart variables. `F_0 = 𝓗`.
pub fn staeckel_values(pt: &SpheroconicalPoint, a: &DVector<f64>, d: f64) -> Vec<f64> {
    let m_count = pt.lambda.len();
    let u = separated_u(pt, a, d);
    let mut out = vec![0.0; m_count];
    for k in 0..m_count {
        let others = lambda_without(&pt.lambda, &[k]);
        let e = elementary_symmetric(&others);
        let q = lambda_denominator(&pt.lambda, k);
        for (m, val) in out.iter_mut().enumerate() {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            *val += sign * e[m] * u[k] / q;
        }
    }
    out
}

/// Partial derivatives `(∂F_m/∂λ_r, ∂F_m/∂μ_r)` of the family in chart
/// variables.
pub fn staeckel_partials(
    pt: &SpheroconicalPoint,
    a: &DVector<f64>,
    d: f64,
) -> (Vec<Vec<f64>>, Vec<Vec<f64>>) {
    let m_count = pt.lambda.len();
    let u = separated_u(pt, a, d);
    let mut dl = vec![vec![0.0; m_count]; m_count];
    let mut dm = vec![vec![0.0; m_count]; m_count];
    for r in 0..m_count {
        let lr = pt.lambda[r];
        let mr = pt.mu[r];
        let q_r = lambda_denominator(&pt.lambda, r);
        let e_r = elementary_symmetric(&lambda_without(&pt.lambda, &[r]));
        let du_dmu = -4.0 * d * d * root_poly(lr, a) * lr * mr;
        let du_dl = -2.0 * d * d * mr * mr * (root_poly_deriv(lr, a) * lr + root_poly(lr, a));
        let q_log_deriv: f64 = pt
            .lambda
            .iter()
            .enumerate()
            .filter(|&(s, _)| s != r)
            .map(|(_, &ls)| 1.0 / (lr - ls))
            .sum();
        for m in 0..m_count {
            let sign = if m % 2 == 0 { 1.0 } else { -1.0 };
            dm[m][r] = sign * e_r[m] * du_dmu / q_r;
            // k = r term
            let mut acc = sign * e_r[m] * (du_dl / q_r - u[r] * q_log_deriv / q_r);
            // k ≠ r terms
            for k in 0..m_count {
                if k == r {
                    continue;
                }
                let q_k = lambda_denominator(&pt.lambda, k);
                let e_k = elementary_symmetric(&lambda_without(&pt.lambda, &[k]));
                let e_kr = elementary_symmetric(&lambda_without(&pt.lambda, &[k, r]));
                let de = if m == 0 { 0.0 } else { e_kr[m - 1] };
                acc += sign * (de + e_k[m] / (pt.lambda[k] - lr)) * u[k] / q_k;
            }
            dl[m][r] = acc;
        }
    }
    (dl, dm)
}

/// Jacobian of the inverse chart at a Cartesian point: rows are
/// `∂λ_k/∂γ`, `∂μ_k/∂γ`, `∂μ_k/∂p̃` in that order.
#[allow(clippy::type_complexity)]
fn chart_jacobian(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    a: &DVector<f64>,
    pt: &SpheroconicalPoint,
) -> (Vec<DVector<f64>>, Vec<DVector<f64>>, Vec<DVector<f64>>) {
    let n = a.len();
    let m_count = n - 1;
    let mut dlam = Vec::with_capacity(m_count);
    let mut dmu_g = Vec::with_capacity(m_count);
    let mut dmu_p = Vec::with_capacity(m_count);
    for k in 0..m_count {
        let lk = pt.lambda[k];
        let t_k: f64 = (0..n)
            .map(|i| gamma[i] * gamma[i] / ((a[i] - lk) * (a[i] - lk)))
            .sum();
        let w_k: f64 = (0..n)
            .map(|i| p_tilde[i] * gamma[i] / ((a[i] - lk) * (a[i] - lk)))
            .sum();
        let dl = DVector::from_fn(n, |i, _| -2.0 * gamma[i] / ((a[i] - lk) * t_k));
        let dmg = DVector::from_fn(n, |i, _| {
            -p_tilde[i] / (2.0 * (a[i] - lk)) - 0.5 * w_k * dl[i]
        });
        let dmp = DVector::from_fn(n, |i, _| -gamma[i] / (2.0 * (a[i] - lk)));
        dlam.push(dl);
        dmu_g.push(dmg);
        dmu_p.push(dmp);
    }
    (dlam, dmu_g, dmu_p)
}

/// Value of F_m at a Cartesian point (through the inverse chart).
pub fn staeckel_value_cartesian(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    a: &DVector<f64>,
    d: f64,
    m: usize,
) -> Result<f64> {
    let pt = spheroconical_from_cartesian(gamma, p_tilde, a)?;
    Ok(staeckel_values(&pt, a, d)[m])
}

/// Cartesian gradient of F_m by the chain rule through the chart.
pub fn staeckel_gradient_cartesian(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    a: &DVector<f64>,
    d: f64,
    m: usize,
) -> Result<(DVector<f64>, DVector<f64>)> {
    let pt = spheroconical_from_cartesian(gamma, p_tilde, a)?;
    let (df_dl, df_dm) = staeckel_partials(&pt, a, d);
    let (dlam, dmu_g, dmu_p) = chart_jacobian(gamma, p_tilde, a, &pt);
    let n = a.len();
    let mut grad_g = DVector::zeros(n);
    let mut grad_p = DVector::zeros(n);
    for k in 0..n - 1 {
        grad_g += df_dl[m][k] * &dlam[k] + df_dm[m][k] * &dmu_g[k];
        grad_p += df_dm[m][k] * &dmu_p[k];
    }
    Ok((grad_g, grad_p))
}

/// [`ScalarField`] for F_m with analytic chart gradients.
///
/// Panics when evaluated at a chart boundary; the commuting-family checks
/// sample chart-interior points only.
pub fn staeckel_field(a: &DVector<f64>, d: f64, m: usize) -> ScalarField<'_> {
    ScalarField::new(
        move |g: &DVector<f64>, p: &DVector<f64>| {
            staeckel_value_cartesian(g, p, a, d, m).expect("chart-interior point")
        },
        move |g: &DVector<f64>, p: &DVector<f64>| {
            staeckel_gradient_cartesian(g, p, a, d, m).expect("chart-interior point")
        },
    )
}

// ---------------------------------------------------------------------------
// Linear and Lagrange-case integrals
// ---------------------------------------------------------------------------

/// Linear integral `f_ij = γ_i p̃_j - γ_j p̃_i`, conserved by the geodesic
/// flow whenever `a_i = a_j`.
pub fn linear_integral(gamma: &DVector<f64>, p_tilde: &DVector<f64>, i: usize, j: usize) -> f64 {
    gamma[i] * p_tilde[j] - gamma[j] * p_tilde[i]
}

/// Lagrange-case integral of the t-flow in the original coordinates, for
/// `a_1 = … = a_{n-1}` and `1 ≤ i < j ≤ n-1`:
///
/// `F_ij = (γ_i p_j - γ_j p_i)² / (γ, A⁻¹γ)`.
///
/// This equals `D² f_ij²` under the momentum rescaling, which is what makes
/// it a first integral (the printed form with `(γ, A⁻¹γ)` as a direct factor
/// grows like the square of the conformal factor instead).
pub fn lagrange_integral(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    a: &DVector<f64>,
    i: usize,
    j: usize,
) -> Result<f64> {
    let n = a.len();
    if i >= j || j >= n - 1 {
        return Err(Error::InadmissibleParams(format!(
            "Lagrange integral needs 1 <= i < j <= n-1, got ({}, {})",
            i + 1,
            j + 1
        )));
    }
    let head = a[0];
    if (0..n - 1).any(|idx| a[idx] != head) {
        return Err(Error::InadmissibleParams(
            "Lagrange integrals require a_1 = … = a_{n-1}".into(),
        ));
    }
    let w = gamma[i] * p[j] - gamma[j] * p[i];
    Ok(w * w / ainv_quadratic(gamma, a))
}

// ---------------------------------------------------------------------------
// Foliation and Poincaré sections
// ---------------------------------------------------------------------------

/// Named drift summary produced by [`foliation_report`].
#[derive(Debug, Clone)]
pub struct FoliationReport {
    pub chaplygin_drifts: Vec<(String, f64)>,
    pub veselova_drifts: Vec<(String, f64)>,
}

impl FoliationReport {
    pub fn max_drift(&self) -> f64 {
        self.chaplygin_drifts
            .iter()
            .chain(self.veselova_drifts.iter())
            .map(|(_, d)| *d)
            .fold(0.0, f64::max)
    }
}

/// Integrates both the Chaplygin t-flow and the Veselova t-flow from the
/// same `(γ, p)` and reports the relative drift of every shared quantity
/// (H*, 𝓗, K and each F_m through the momentum rescaling) on both flows:
/// the operational content of the shared-foliation theorem.
pub fn foliation_report(
    gamma0: &DVector<f64>,
    p0: &DVector<f64>,
    params: &crate::inertia::ChaplyginParams,
    cfg: &crate::numerics::integrator::IntegratorConfig,
) -> Result<FoliationReport> {
    use crate::state::{join_pair, split_pair};
    let a = params.a();
    let d = params.d();
    check_spectrum(a)?;
    let y0 = join_pair(gamma0, p0);
    let chap_rhs = crate::chaplygin::cotangent_flat_rhs(params);
    let ves_rhs = crate::veselova::reduced_flat_rhs(a);
    let chap = crate::numerics::integrator::integrate(&chap_rhs, &y0, cfg, None)?;
    let ves = crate::numerics::integrator::integrate(&ves_rhs, &y0, cfg, None)?;

    let n = a.len();
    let mut quantities: Vec<(String, Box<dyn Fn(&DVector<f64>) -> f64>)> = Vec::new();
    {
        let params = params.clone();
        quantities.push((
            "h_star".into(),
            Box::new(move |y: &DVector<f64>| {
                let (g, p) = split_pair(y);
                crate::chaplygin::hamiltonian_closed(&g, &p, &params)
            }),
        ));
    }
    {
        let a = a.clone();
        quantities.push((
            "h_cal".into(),
            Box::new(move |y: &DVector<f64>| {
                let (g, p) = split_pair(y);
                crate::veselova::hamiltonian_cal(&g, &p, &a)
            }),
        ));
    }
    quantities.push((
        "momentum_k".into(),
        Box::new(|y: &DVector<f64>| {
            let (g, p) = split_pair(y);
            crate::chaplygin::momentum_k(&g, &p)
        }),
    ));
    for m in 0..n - 1 {
        let a = a.clone();
        let params = params.clone();
        quantities.push((
            format!("staeckel_{m}"),
            Box::new(move |y: &DVector<f64>| {
                let (g, p) = split_pair(y);
                let pt = crate::hamiltonization::to_tilde(&g, &p, &params);
                staeckel_value_cartesian(&g, &pt, &a, d, m).expect("chart-interior trajectory")
            }),
        ));
    }

    let drifts = |traj: &Trajectory| -> Vec<(String, f64)> {
        quantities
            .iter()
            .map(|(name, q)| (name.clone(), traj.relative_drift(q)))
            .collect()
    };
    Ok(FoliationReport {
        chaplygin_drifts: drifts(&chap),
        veselova_drifts: drifts(&ves),
    })
}

/// Times (in the trajectory's own clock or the auxiliary τ clock) of the
/// upward crossings of the section `state[coord] = value`.
///
/// Crossing times are refined by bisection on the cubic Hermite interpolant;
/// when `rate` is supplied, the crossing is converted to the τ clock through
/// the trajectory's stored τ samples with slope `rate(state)`.
pub fn section_crossings(
    traj: &Trajectory,
    rhs: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    coord: usize,
    value: f64,
    rate: Option<&dyn Fn(&DVector<f64>) -> f64>,
) -> Vec<f64> {
    let mut out = Vec::new();
    for i in 0..traj.len() - 1 {
        let s0 = traj.states[i][coord] - value;
        let s1 = traj.states[i + 1][coord] - value;
        if !(s0 < 0.0 && s1 >= 0.0) {
            continue;
        }
        let (t0, t1) = (traj.times[i], traj.times[i + 1]);
        let (y0, y1) = (&traj.states[i], &traj.states[i + 1]);
        let (f0, f1) = (rhs(y0), rhs(y1));
        let mut lo = t0;
        let mut hi = t1;
        for _ in 0..60 {
            let mid = 0.5 * (lo + hi);
            let s = hermite_eval(t0, y0, &f0, t1, y1, &f1, mid)[coord] - value;
            if s < 0.0 {
                lo = mid;
            } else {
                hi = mid;
            }
        }
        let t_star = 0.5 * (lo + hi);
        match (rate, &traj.taus) {
            (Some(rate_fn), Some(taus)) => {
                let tau0 = DVector::from_vec(vec![taus[i]]);
                let tau1 = DVector::from_vec(vec![taus[i + 1]]);
                let r0 = DVector::from_vec(vec![rate_fn(y0)]);
                let r1 = DVector::from_vec(vec![rate_fn(y1)]);
                out.push(hermite_eval(t0, &tau0, &r0, t1, &tau1, &r1, t_star)[0]);
            }
            _ => out.push(t_star),
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::chaplygin::momentum_k;
    use crate::hamiltonization::{
        dirac_bracket, hamiltonian_star_field, momentum_k_field, to_tilde,
    };
    use crate::inertia::ChaplyginParams;
    use crate::numerics::integrator::{integrate, IntegratorConfig};
    use crate::numerics::sampling::{chart_interior_pair, rng, vector};
    use crate::state::{join_pair, split_pair};
    use approx::assert_relative_eq;

    fn a123() -> DVector<f64> {
        DVector::from_vec(vec![1.0, 2.0, 3.0])
    }

    /// Random chart-interior point in (λ, μ) with interlacing margin.
    fn random_chart_point(
        r: &mut impl rand::Rng,
        a: &DVector<f64>,
    ) -> (SpheroconicalPoint, Vec<f64>) {
        let n = a.len();
        let lambda: Vec<f64> = (0..n - 1)
            .map(|k| {
                let lo = a[k] + 0.15 * (a[k + 1] - a[k]);
                let hi = a[k + 1] - 0.15 * (a[k + 1] - a[k]);
                lo + (hi - lo) * r.random::<f64>()
            })
            .collect();
        let mu: Vec<f64> = (0..n - 1)
            .map(|_| crate::numerics::sampling::normal(r))
            .collect();
        let signs: Vec<f64> = (0..n)
            .map(|_| if r.random::<bool>() { 1.0 } else { -1.0 })
            .collect();
        (SpheroconicalPoint { lambda, mu }, signs)
    }

    #[test]
    fn chart_worked_example() {
        let a = a123();
        let pt = SpheroconicalPoint {
            lambda: vec![1.5, 2.5],
            mu: vec![0.0, 0.0],
        };
        let gamma = gamma_from_lambda(&pt.lambda, &a, &[1.0, 1.0, 1.0]).unwrap();
        assert_relative_eq!(gamma[0] * gamma[0], 0.375, epsilon = 1e-14);
        assert_relative_eq!(gamma[1] * gamma[1], 0.25, epsilon = 1e-14);
        assert_relative_eq!(gamma[2] * gamma[2], 0.375, epsilon = 1e-14);
        assert_relative_eq!(gamma.norm_squared(), 1.0, epsilon = 1e-13);
        // (γ, A⁻¹γ) = λ₁λ₂/(a₁a₂a₃) = 0.625
        assert_relative_eq!(ainv_quadratic(&gamma, &a), 0.625, epsilon = 1e-13);
        assert_relative_eq!(chart_alpha(&pt, &a), 0.625, epsilon = 1e-15);
    }

    #[test]
    fn gamma_component_vanishes_continuously_at_boundary() {
        let a = a123();
        for eps in [1e-2, 1e-4, 1e-6] {
            let gamma = gamma_from_lambda(&[1.0 + eps, 2.5], &a, &[1.0, 1.0, 1.0]).unwrap();
            // λ₁ → a₁ kills γ₁ like √eps
            assert!(gamma[0].abs() < (eps * 2.0).sqrt());
        }
        assert!(check_spectrum(&DVector::from_vec(vec![1.0, 1.0 + 1e-9, 3.0])).is_err());
        assert!(gamma_from_lambda(&[0.5, 2.5], &a123(), &[1.0, 1.0, 1.0]).is_err());
    }

    #[test]
    fn chart_round_trip() {
        let a = a123();
        let mut r = rng(100);
        for _ in 0..100 {
            let (pt, signs) = random_chart_point(&mut r, &a);
            let (gamma, p_tilde) = cartesian_from_spheroconical(&pt, &a, &signs).unwrap();
            assert_relative_eq!(gamma.norm_squared(), 1.0, epsilon = 1e-12);
            assert!(gamma.dot(&p_tilde).abs() < 1e-12 * (1.0 + p_tilde.norm()));
            let back = spheroconical_from_cartesian(&gamma, &p_tilde, &a).unwrap();
            for k in 0..2 {
                assert_relative_eq!(back.lambda[k], pt.lambda[k], epsilon = 1e-10);
                assert_relative_eq!(back.mu[k], pt.mu[k], epsilon = 1e-10, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn chart_round_trip_dimension_five() {
        let a = DVector::from_vec(vec![0.7, 1.3, 2.1, 3.0, 4.2]);
        let mut r = rng(101);
        for _ in 0..30 {
            let (pt, signs) = random_chart_point(&mut r, &a);
            let (gamma, p_tilde) = cartesian_from_spheroconical(&pt, &a, &signs).unwrap();
            let back = spheroconical_from_cartesian(&gamma, &p_tilde, &a).unwrap();
            for k in 0..4 {
                assert_relative_eq!(back.lambda[k], pt.lambda[k], epsilon = 1e-10);
                assert_relative_eq!(back.mu[k], pt.mu[k], epsilon = 1e-9, max_relative = 1e-9);
            }
        }
    }

    #[test]
    fn quadratic_form_identities() {
        let mut r = rng(102);
        for a in [a123(), DVector::from_vec(vec![0.7, 1.3, 2.1, 3.0])] {
            for _ in 0..50 {
                let (pt, signs) = random_chart_point(&mut r, &a);
                let (gamma, p_tilde) = cartesian_from_spheroconical(&pt, &a, &signs).unwrap();
                let ap = DVector::from_iterator(
                    a.len(),
                    p_tilde.iter().zip(a.iter()).map(|(p, ai)| p * ai),
                );
                assert_relative_eq!(
                    chart_p_squared(&pt, &a),
                    p_tilde.dot(&p_tilde),
                    epsilon = 1e-10,
                    max_relative = 1e-10
                );
                assert_relative_eq!(
                    chart_alpha(&pt, &a),
                    ainv_quadratic(&gamma, &a),
                    epsilon = 1e-10,
                    max_relative = 1e-10
                );
                assert_relative_eq!(
                    chart_ap_squared(&pt, &a),
                    p_tilde.dot(&ap),
                    epsilon = 1e-10,
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn momentum_in_chart_variables() {
        // K = D²(γ, A⁻¹γ)(p̃, p̃) both ways
        let a = a123();
        let d = 10.0;
        let mut r = rng(103);
        let (pt, signs) = random_chart_point(&mut r, &a);
        let (gamma, p_tilde) = cartesian_from_spheroconical(&pt, &a, &signs).unwrap();
        let chart_value = d * d * chart_alpha(&pt, &a) * chart_p_squared(&pt, &a);
        let cart_value = d * d * ainv_quadratic(&gamma, &a) * p_tilde.dot(&p_tilde);
        assert_relative_eq!(chart_value, cart_value, epsilon = 1e-11, max_relative = 1e-11);
    }

    #[test]
    fn staeckel_f0_is_the_veselova_hamiltonian() {
        let mut r = rng(104);
        for a in [a123(), DVector::from_vec(vec![0.7, 1.3, 2.1, 3.0])] {
            let d = 7.0;
            for _ in 0..100 {
                let (pt, signs) = random_chart_point(&mut r, &a);
                let (_, p_tilde) = cartesian_from_spheroconical(&pt, &a, &signs).unwrap();
                let f = staeckel_values(&pt, &a, d);
                let hcal = crate::veselova::hamiltonian_cal_tilde(&p_tilde, &a, d);
                assert_relative_eq!(f[0], hcal, epsilon = 1e-11, max_relative = 1e-11);
            }
        }
    }

    #[test]
    fn momentum_is_in_the_family_span() {
        // K = 2 (-1)^n F_{n-2} / (a_1⋯a_n)
        let mut r = rng(105);
        for a in [a123(), DVector::from_vec(vec![0.7, 1.3, 2.1, 3.0])] {
            let n = a.len();
            let d = 5.0;
            let prod: f64 = a.iter().product();
            let sign = if n % 2 == 0 { 1.0 } else { -1.0 };
            for _ in 0..20 {
                let (pt, signs) = random_chart_point(&mut r, &a);
                let (gamma, p_tilde) = cartesian_from_spheroconical(&pt, &a, &signs).unwrap();
                let f = staeckel_values(&pt, &a, d);
                let k = d * d * ainv_quadratic(&gamma, &a) * p_tilde.dot(&p_tilde);
                assert_relative_eq!(
                    2.0 * sign * f[n - 2] / prod,
                    k,
                    epsilon = 1e-10,
                    max_relative = 1e-10
                );
            }
        }
    }

    #[test]
    fn separated_relation_interpolation_identity() {
        // U_k = Σ_m λ_k^{n-2-m} F_m: the family is exactly the coefficient
        // list of the polynomial interpolating U at the nodes λ.
        let a = DVector::from_vec(vec![0.7, 1.3, 2.1, 3.0]);
        let d = 3.0;
        let mut r = rng(106);
        let (pt, _) = random_chart_point(&mut r, &a);
        let f = staeckel_values(&pt, &a, d);
        let u = separated_u(&pt, &a, d);
        for k in 0..pt.lambda.len() {
            let mut acc = 0.0;
            for (m, fm) in f.iter().enumerate() {
                acc += pt.lambda[k].powi((pt.lambda.len() - 1 - m) as i32) * fm;
            }
            assert_relative_eq!(acc, u[k], epsilon = 1e-10, max_relative = 1e-10);
        }
    }

    #[test]
    fn staeckel_gradients_match_finite_differences() {
        let a = a123();
        let d = 10.0;
        let mut r = rng(107);
        for _ in 0..10 {
            let (gamma, p) = chart_interior_pair(&mut r, 3, 0.2);
            let (gg, gp) = staeckel_gradient_cartesian(&gamma, &p, &a, d, 1).unwrap();
            let y = join_pair(&gamma, &p);
            let f = |z: &DVector<f64>| {
                let (g, q) = split_pair(z);
                staeckel_value_cartesian(&g, &q, &a, d, 1).unwrap()
            };
            let fd = crate::numerics::fd_gradient(&f, &y, 1e-6);
            let analytic = join_pair(&gg, &gp);
            let scale = 1.0 + analytic.norm();
            assert!(
                (fd - &analytic).norm() / scale < 1e-6,
                "gradient mismatch"
            );
        }
    }

    #[test]
    fn family_commutes_under_dirac_bracket() {
        let mut r = rng(108);
        for a in [a123(), DVector::from_vec(vec![0.7, 1.3, 2.1, 3.0])] {
            let n = a.len();
            let d = 6.0;
            let fields: Vec<_> = (0..n - 1).map(|m| staeckel_field(&a, d, m)).collect();
            for _ in 0..30 {
                let (gamma, p) = chart_interior_pair(&mut r, n, 0.15);
                for i in 0..n - 1 {
                    for j in i + 1..n - 1 {
                        let b = dirac_bracket(&fields[i], &fields[j], &gamma, &p).unwrap();
                        let scale = 1.0
                            + fields[i].value(&gamma, &p).abs()
                            + fields[j].value(&gamma, &p).abs();
                        assert!(
                            b.abs() / scale < 1e-9,
                            "{{F_{i}, F_{j}}} = {b} at n = {n}"
                        );
                    }
                }
            }
        }
    }

    #[test]
    fn family_commutes_with_k_and_h_star() {
        let mut r = rng(109);
        let a = a123();
        let d = 6.0;
        let params = ChaplyginParams::new(a.clone(), d).unwrap();
        let h = hamiltonian_star_field(&params);
        let k = momentum_k_field(&params);
        for _ in 0..30 {
            let (gamma, p) = chart_interior_pair(&mut r, 3, 0.15);
            for m in 0..2 {
                let f = staeckel_field(&a, d, m);
                let bk = dirac_bracket(&f, &k, &gamma, &p).unwrap();
                let bh = dirac_bracket(&f, &h, &gamma, &p).unwrap();
                let scale = 1.0 + f.value(&gamma, &p).abs();
                assert!(bk.abs() / scale < 1e-9, "{{F_{m}, K}} = {bk}");
                assert!(bh.abs() / scale < 1e-9, "{{F_{m}, H*}} = {bh}");
            }
        }
    }

    #[test]
    fn linear_integrals_conserved_iff_parameters_equal() {
        // n = 4, a = (1,1,3,3): f_12 and f_34 conserved along the geodesic
        // flow; for distinct parameters the same quantity visibly drifts.
        let a_eq = DVector::from_vec(vec![1.0, 1.0, 3.0, 3.0]);
        let params = ChaplyginParams::new(a_eq.clone(), 12.0).unwrap();
        let mut r = rng(110);
        let (gamma, p) = crate::numerics::sampling::cotangent_pair(&mut r, 4);
        let pt = to_tilde(&gamma, &p, &params);
        let y0 = join_pair(&gamma, &pt);
        let rhs = crate::hamiltonization::geodesic_flat_rhs(&params);
        let cfg = IntegratorConfig::rk4(1e-3, 10.0).with_stride(50);
        let traj = integrate(&rhs, &y0, &cfg, None).unwrap();
        let f12 = |y: &DVector<f64>| {
            let (g, q) = split_pair(y);
            linear_integral(&g, &q, 0, 1)
        };
        let f34 = |y: &DVector<f64>| {
            let (g, q) = split_pair(y);
            linear_integral(&g, &q, 2, 3)
        };
        assert!(traj.relative_drift(&f12) < 1e-10);
        assert!(traj.relative_drift(&f34) < 1e-10);

        // negative control
        let a_neq = DVector::from_vec(vec![1.0, 1.5, 2.2, 3.0]);
        let params2 = ChaplyginParams::new(a_neq, 12.0).unwrap();
        let pt2 = to_tilde(&gamma, &p, &params2);
        let y0 = join_pair(&gamma, &pt2);
        let rhs2 = crate::hamiltonization::geodesic_flat_rhs(&params2);
        let traj2 = integrate(&rhs2, &y0, &cfg, None).unwrap();
        assert!(
            traj2.relative_drift(&f12) > 1e-3,
            "f_12 should not be conserved for distinct parameters"
        );
    }

    #[test]
    fn linear_integral_is_signed_area_in_its_plane() {
        let mut gamma = DVector::zeros(4);
        gamma[0] = 0.6;
        gamma[1] = 0.8;
        let mut pt = DVector::zeros(4);
        pt[0] = -0.8;
        pt[1] = 0.6;
        // γ and p̃ span the (1,2)-plane: f_12 is the area |γ||p̃| sin θ = 1
        assert_relative_eq!(linear_integral(&gamma, &pt, 0, 1), 1.0, epsilon = 1e-15);
    }

    #[test]
    fn lagrange_integrals_conserved_along_t_flow() {
        let l = crate::inertia::lagrange_params(4, 1.0, 2.0, 10.0).unwrap();
        let params = l.params;
        let mut r = rng(111);
        let (gamma, p) = crate::numerics::sampling::cotangent_pair(&mut r, 4);
        let y0 = join_pair(&gamma, &p);
        let rhs = crate::chaplygin::cotangent_flat_rhs(&params);
        let cfg = IntegratorConfig::rk4(1e-3, 10.0).with_stride(50);
        let traj = integrate(&rhs, &y0, &cfg, None).unwrap();
        let a = params.a().clone();
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            let a = a.clone();
            let f = move |y: &DVector<f64>| {
                let (g, q) = split_pair(y);
                lagrange_integral(&g, &q, &a, i, j).unwrap()
            };
            let drift = traj.relative_drift(&f);
            assert!(drift < 1e-8, "F_{}{} drift {drift}", i + 1, j + 1);
        }
        // p parallel to γ has all F_ij = 0
        let p_par = 0.7 * &gamma;
        for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
            assert!(lagrange_integral(&gamma, &p_par, &a, i, j).unwrap().abs() < 1e-14);
        }
        // guards
        assert!(lagrange_integral(&gamma, &p, &a, 0, 3).is_err());
        let generic = DVector::from_vec(vec![1.0, 1.5, 2.0, 3.0]);
        assert!(lagrange_integral(&gamma, &p, &generic, 0, 1).is_err());
    }

    #[test]
    fn lagrange_integral_matches_linear_integral_relation() {
        // F_ij = D² f_ij² under p̃ = N p.
        let l = crate::inertia::lagrange_params(4, 1.0, 2.0, 10.0).unwrap();
        let params = l.params;
        let mut r = rng(112);
        for _ in 0..20 {
            let (gamma, p) = crate::numerics::sampling::cotangent_pair(&mut r, 4);
            let pt = to_tilde(&gamma, &p, &params);
            for (i, j) in [(0usize, 1usize), (0, 2), (1, 2)] {
                let f = linear_integral(&gamma, &pt, i, j);
                let cap = lagrange_integral(&gamma, &p, params.a(), i, j).unwrap();
                assert_relative_eq!(
                    cap,
                    params.d() * params.d() * f * f,
                    epsilon = 1e-12,
                    max_relative = 1e-12
                );
            }
        }
    }

    #[test]
    fn foliation_shared_by_both_flows() {
        let a = a123();
        let params = ChaplyginParams::new(a, 10.0).unwrap();
        let mut r = rng(113);
        let (gamma, p) = chart_interior_pair(&mut r, 3, 0.25);
        let cfg = IntegratorConfig::rk4(1e-3, 10.0).with_stride(50);
        let report = foliation_report(&gamma, &p, &params, &cfg).unwrap();
        for (name, drift) in report
            .chaplygin_drifts
            .iter()
            .chain(report.veselova_drifts.iter())
        {
            assert!(*drift < 1e-8, "{name} drift {drift}");
        }
    }

    #[test]
    fn homogeneous_parameters_give_great_circles_on_both_flows() {
        // equal a: both reduced flows follow great circles up to time scale
        let a = DVector::from_element(3, 1.0);
        let mut r = rng(114);
        let (gamma, p) = crate::numerics::sampling::cotangent_pair(&mut r, 3);
        let y0 = join_pair(&gamma, &p);
        let ves_rhs = crate::veselova::reduced_flat_rhs(&a);
        let cfg = IntegratorConfig::rk4(1e-3, 5.0).with_stride(10);
        let traj = integrate(&ves_rhs, &y0, &cfg, None).unwrap();
        // γ stays in span(γ₀, p₀)
        let phat = &p / p.norm();
        for y in &traj.states {
            let (g, _) = split_pair(y);
            let in_plane = gamma.dot(&g) * &gamma + phat.dot(&g) * &phat;
            assert!((g - in_plane).norm() < 1e-9);
        }
    }

    #[test]
    fn section_crossings_of_circular_motion() {
        // ẏ = (-y₂, y₁): crossings of y₂ = 0 upward happen every 2π.
        let rhs = |y: &DVector<f64>| DVector::from_vec(vec![-y[1], y[0]]);
        let y0 = DVector::from_vec(vec![1.0, 0.0]);
        let cfg = IntegratorConfig::rk4(1e-3, 20.0);
        let traj = integrate(&rhs, &y0, &cfg, None).unwrap();
        let crossings = section_crossings(&traj, &rhs, 1, 0.0, None);
        assert!(crossings.len() >= 3);
        for w in crossings.windows(2) {
            assert_relative_eq!(w[1] - w[0], std::f64::consts::TAU, epsilon = 1e-9);
        }
    }

    #[test]
    fn chart_boundary_is_rejected() {
        let a = a123();
        let mut gamma = DVector::zeros(3);
        gamma[0] = 1.0; // γ₂ = γ₃ = 0: on two hyperplanes
        let p = vector(&mut rng(115), 3);
        assert!(spheroconical_from_cartesian(&gamma, &p, &a).is_err());
    }
}
