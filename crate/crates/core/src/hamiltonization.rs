//! Chaplygin reducing multiplier, momentum rescaling and the Dirac-bracket
//! geodesic flow in the new time τ.
//!
//! The time substitution `dτ = N dt` with `N = 1/(D √(γ, A⁻¹γ))` together
//! with the momentum change `p̃ = N p` turns the reduced nonholonomic flow
//! into the Hamiltonian geodesic flow of
//! `H* = ½(D(γ, A⁻¹γ)(p̃, p̃) - (p̃, Ap̃))` on `T*S^{n-1}`, realized in
//! redundant coordinates through the Dirac bracket of the constraints
//! `ψ₁ = (γ, γ) = 1`, `ψ₂ = (γ, p̃) = 0`. The trajectory-level equivalence of
//! the two clocks is the operational test of conformal symplecticity here;
//! no numeric exterior derivative is taken.

use nalgebra::DVector;

use crate::chaplygin::{ainv_quadratic, cotangent_rhs_closed, hamiltonian_closed_gradient};
use crate::error::{Error, Result};
use crate::inertia::ChaplyginParams;
use crate::numerics::fd::fd_gradient;
use crate::numerics::integrator::{hermite_eval, Trajectory};
use crate::son::orthonormal_complement;
use crate::state::{join_pair, split_pair};

/// The Chaplygin reducing multiplier `N(γ) = 1/(D √(γ, A⁻¹γ))`.
pub fn multiplier(gamma: &DVector<f64>, params: &ChaplyginParams) -> f64 {
    1.0 / (params.d() * ainv_quadratic(gamma, params.a()).sqrt())
}

/// Momentum rescaling `p̃ = N(γ) p`.
pub fn to_tilde(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    params: &ChaplyginParams,
) -> DVector<f64> {
    multiplier(gamma, params) * p
}

/// Inverse rescaling `p = p̃ / N(γ)`.
pub fn from_tilde(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    params: &ChaplyginParams,
) -> DVector<f64> {
    p_tilde / multiplier(gamma, params)
}

/// Geodesic Hamiltonian `H* = ½ (D(γ, A⁻¹γ)(p̃, p̃) - (p̃, A p̃))`.
pub fn hamiltonian_star(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    params: &ChaplyginParams,
) -> f64 {
    let a = params.a();
    let alpha = ainv_quadratic(gamma, a);
    let ap = DVector::from_iterator(
        p_tilde.len(),
        p_tilde.iter().zip(a.iter()).map(|(x, ai)| x * ai),
    );
    0.5 * (params.d() * alpha * p_tilde.dot(p_tilde) - p_tilde.dot(&ap))
}

/// Gradient of [`hamiltonian_star`] on `R^{2n}`.
pub fn hamiltonian_star_gradient(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    params: &ChaplyginParams,
) -> (DVector<f64>, DVector<f64>) {
    let a = params.a();
    let d = params.d();
    let alpha = ainv_quadratic(gamma, a);
    let ainv_g = DVector::from_iterator(
        gamma.len(),
        gamma.iter().zip(a.iter()).map(|(g, ai)| g / ai),
    );
    let ap = DVector::from_iterator(
        p_tilde.len(),
        p_tilde.iter().zip(a.iter()).map(|(x, ai)| x * ai),
    );
    (
        d * p_tilde.dot(p_tilde) * ainv_g,
        d * alpha * p_tilde - ap,
    )
}

/// Momentum integral in tilde variables: `K = D²(γ, A⁻¹γ)(p̃, p̃)`.
pub fn momentum_k_tilde(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    params: &ChaplyginParams,
) -> f64 {
    let d = params.d();
    d * d * ainv_quadratic(gamma, params.a()) * p_tilde.dot(p_tilde)
}

/// Gradient of [`momentum_k_tilde`].
pub fn momentum_k_tilde_gradient(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    params: &ChaplyginParams,
) -> (DVector<f64>, DVector<f64>) {
    let d2 = params.d() * params.d();
    let a = params.a();
    let alpha = ainv_quadratic(gamma, a);
    let ainv_g = DVector::from_iterator(
        gamma.len(),
        gamma.iter().zip(a.iter()).map(|(g, ai)| g / ai),
    );
    (
        2.0 * d2 * p_tilde.dot(p_tilde) * ainv_g,
        2.0 * d2 * alpha * p_tilde,
    )
}

/// Constraint multipliers of the geodesic flow in redundant coordinates:
/// `λ = (A p̃, p̃)/(2(γ, γ))`, `μ = (D(γ, A⁻¹γ)(p̃, γ) - (A p̃, γ))/(γ, γ)`.
pub fn lagrange_multipliers(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    params: &ChaplyginParams,
) -> (f64, f64) {
    let a = params.a();
    let alpha = ainv_quadratic(gamma, a);
    let ap = DVector::from_iterator(
        p_tilde.len(),
        p_tilde.iter().zip(a.iter()).map(|(x, ai)| x * ai),
    );
    let gg = gamma.dot(gamma);
    let lambda = p_tilde.dot(&ap) / (2.0 * gg);
    let mu = (params.d() * alpha * p_tilde.dot(gamma) - ap.dot(gamma)) / gg;
    (lambda, mu)
}

/// The same multipliers from the canonical brackets,
/// `λ = {H, ψ₂}/{ψ₁, ψ₂}`, `μ = -{H, ψ₁}/{ψ₁, ψ₂}`.
pub fn lagrange_multipliers_bracket(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    params: &ChaplyginParams,
) -> (f64, f64) {
    let (h_gamma, h_p) = hamiltonian_star_gradient(gamma, p_tilde, params);
    // {F, ψ₁} = -2 (∂F/∂p̃, γ); {F, ψ₂} = (∂F/∂γ, γ) - (∂F/∂p̃, p̃)
    let h_psi1 = -2.0 * h_p.dot(gamma);
    let h_psi2 = h_gamma.dot(gamma) - h_p.dot(p_tilde);
    let psi1_psi2 = 2.0 * gamma.dot(gamma);
    (h_psi2 / psi1_psi2, -h_psi1 / psi1_psi2)
}

/// The geodesic flow in the time τ on `R^{2n} ∖ {γ = 0}`:
///
/// `γ' = D(A⁻¹γ, γ) p̃ - A p̃ + (γ, Ap̃)/(γ, γ) γ - D(γ, A⁻¹γ)(p̃, γ)/(γ, γ) γ`,
/// `p̃' = -D(p̃, p̃) A⁻¹γ + (p̃, Ap̃)/(γ, γ) γ - (γ, Ap̃)/(γ, γ) p̃
///        + D(γ, A⁻¹γ)(p̃, γ)/(γ, γ) p̃`.
///
/// The multipliers make ψ₁ and ψ₂ exact first integrals of the extension.
pub fn geodesic_rhs(
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
    params: &ChaplyginParams,
) -> (DVector<f64>, DVector<f64>) {
    let (lambda, mu) = lagrange_multipliers(gamma, p_tilde, params);
    let (h_gamma, h_p) = hamiltonian_star_gradient(gamma, p_tilde, params);
    let gamma_dot = h_p - mu * gamma;
    let p_dot = -h_gamma + 2.0 * lambda * gamma + mu * p_tilde;
    (gamma_dot, p_dot)
}

/// `[γ; p̃]` adapter for [`geodesic_rhs`].
pub fn geodesic_flat_rhs(
    params: &ChaplyginParams,
) -> impl Fn(&DVector<f64>) -> DVector<f64> + '_ {
    move |y| {
        let (gamma, pt) = split_pair(y);
        let (gd, pd) = geodesic_rhs(&gamma, &pt, params);
        join_pair(&gd, &pd)
    }
}

/// Constrained Hamiltonian flow of an arbitrary scalar field under the Dirac
/// structure: `γ' = H_p̃ - μγ`, `p̃' = -H_γ + 2λγ + μp̃` with
/// `λ = ((H_γ, γ) - (H_p̃, p̃))/(2(γ, γ))`, `μ = (H_p̃, γ)/(γ, γ)`, so that ψ₁
/// and ψ₂ are exact first integrals.
pub fn dirac_flow(
    field: &ScalarField,
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
) -> (DVector<f64>, DVector<f64>) {
    let (h_gamma, h_p) = field.gradient(gamma, p_tilde);
    let gg = gamma.dot(gamma);
    let lambda = (h_gamma.dot(gamma) - h_p.dot(p_tilde)) / (2.0 * gg);
    let mu = h_p.dot(gamma) / gg;
    (
        &h_p - mu * gamma,
        -h_gamma + 2.0 * lambda * gamma + mu * p_tilde,
    )
}

// ---------------------------------------------------------------------------
// Brackets
// ---------------------------------------------------------------------------

/// A scalar field on `R^{2n}(γ, p̃)` together with its gradient, for bracket
/// evaluation.
pub struct ScalarField<'a> {
    value: Box<dyn Fn(&DVector<f64>, &DVector<f64>) -> f64 + 'a>,
    grad: Box<dyn Fn(&DVector<f64>, &DVector<f64>) -> (DVector<f64>, DVector<f64>) + 'a>,
}

impl<'a> ScalarField<'a> {
    pub fn new(
        value: impl Fn(&DVector<f64>, &DVector<f64>) -> f64 + 'a,
        grad: impl Fn(&DVector<f64>, &DVector<f64>) -> (DVector<f64>, DVector<f64>) + 'a,
    ) -> Self {
        Self {
            value: Box::new(value),
            grad: Box::new(grad),
        }
    }

    /// Field with central-difference gradient (step 1e-6): the fallback when
    /// no closed-form gradient is available. Bracket tolerances relax to
    /// 1e-6 with this route.
    pub fn with_fd_gradient(
        value: impl Fn(&DVector<f64>, &DVector<f64>) -> f64 + Clone + 'a,
    ) -> Self {
        let v2 = value.clone();
        let grad = move |gamma: &DVector<f64>, p: &DVector<f64>| {
            let n = gamma.len();
            let y = join_pair(gamma, p);
            let f = |z: &DVector<f64>| {
                let (g, q) = split_pair(z);
                v2(&g, &q)
            };
            let g = fd_gradient(&f, &y, 1e-6);
            (
                g.rows(0, n).into_owned(),
                g.rows(n, n).into_owned(),
            )
        };
        Self {
            value: Box::new(value),
            grad: Box::new(grad),
        }
    }

    /// Coordinate function γ_i.
    pub fn coordinate_gamma(i: usize) -> Self {
        Self::new(
            move |g, _| g[i],
            move |g, p| {
                let mut dg = DVector::zeros(g.len());
                dg[i] = 1.0;
                (dg, DVector::zeros(p.len()))
            },
        )
    }

    /// Coordinate function p̃_i.
    pub fn coordinate_p(i: usize) -> Self {
        Self::new(
            move |_, p| p[i],
            move |g, p| {
                let mut dp = DVector::zeros(p.len());
                dp[i] = 1.0;
                (DVector::zeros(g.len()), dp)
            },
        )
    }

    pub fn value(&self, gamma: &DVector<f64>, p: &DVector<f64>) -> f64 {
        (self.value)(gamma, p)
    }

    pub fn gradient(
        &self,
        gamma: &DVector<f64>,
        p: &DVector<f64>,
    ) -> (DVector<f64>, DVector<f64>) {
        (self.grad)(gamma, p)
    }
}

/// Canonical bracket `{F, G} = Σ (∂F/∂γ_i ∂G/∂p̃_i - ∂F/∂p̃_i ∂G/∂γ_i)`.
pub fn canonical_bracket(
    f: &ScalarField,
    g: &ScalarField,
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
) -> f64 {
    let (fg, fp) = f.gradient(gamma, p_tilde);
    let (gg, gp) = g.gradient(gamma, p_tilde);
    fg.dot(&gp) - fp.dot(&gg)
}

/// Dirac bracket of the constraints ψ₁, ψ₂:
/// `{F, G}_d = {F, G} - ({F, ψ₁}{G, ψ₂} - {F, ψ₂}{G, ψ₁}) / {ψ₁, ψ₂}`,
/// with `{ψ₁, ψ₂} = 2(γ, γ)`.
///
/// Returns an error for γ = 0, where the denominator vanishes.
pub fn dirac_bracket(
    f: &ScalarField,
    g: &ScalarField,
    gamma: &DVector<f64>,
    p_tilde: &DVector<f64>,
) -> Result<f64> {
    let gg = gamma.dot(gamma);
    if gg == 0.0 {
        return Err(Error::SingularSystem {
            context: "Dirac bracket at gamma = 0",
        });
    }
    let (fgr, fpr) = f.gradient(gamma, p_tilde);
    let (ggr, gpr) = g.gradient(gamma, p_tilde);
    let canonical = fgr.dot(&gpr) - fpr.dot(&ggr);
    let f_psi1 = -2.0 * fpr.dot(gamma);
    let f_psi2 = fgr.dot(gamma) - fpr.dot(p_tilde);
    let g_psi1 = -2.0 * gpr.dot(gamma);
    let g_psi2 = ggr.dot(gamma) - gpr.dot(p_tilde);
    Ok(canonical - (f_psi1 * g_psi2 - f_psi2 * g_psi1) / (2.0 * gg))
}

/// [`ScalarField`] for H*.
pub fn hamiltonian_star_field(params: &ChaplyginParams) -> ScalarField<'_> {
    ScalarField::new(
        move |g, p| hamiltonian_star(g, p, params),
        move |g, p| hamiltonian_star_gradient(g, p, params),
    )
}

/// [`ScalarField`] for the momentum K in tilde variables.
pub fn momentum_k_field(params: &ChaplyginParams) -> ScalarField<'_> {
    ScalarField::new(
        move |g, p| momentum_k_tilde(g, p, params),
        move |g, p| momentum_k_tilde_gradient(g, p, params),
    )
}

// ---------------------------------------------------------------------------
// Almost symplectic form
// ---------------------------------------------------------------------------

/// Residual of `i_X w = dH` at an on-manifold point, where `w` is the
/// reduced almost symplectic form
/// `w = Σ dγ_i ∧ dp_i - Σ (p_i γ_j / (a_j (γ, A⁻¹γ))) dγ_i ∧ dγ_j`,
/// X the closed-form t-flow and H the closed-form Hamiltonian.
///
/// Returns the maximum of `|w(X, v) - dH(v)|` over a basis of the
/// 2(n-1)-dimensional tangent space at (γ, p).
pub fn almost_symplectic_residual(
    gamma: &DVector<f64>,
    p: &DVector<f64>,
    params: &ChaplyginParams,
) -> f64 {
    let n = gamma.len();
    let a = params.a();
    let alpha = ainv_quadratic(gamma, a);
    let (x_gamma, x_p) = cotangent_rhs_closed(gamma, p, params);
    let (h_gamma, h_p) = hamiltonian_closed_gradient(gamma, p, params);

    // S_ij = (p_j γ_i / a_i - p_i γ_j / a_j) / α, the dγ∧dγ block.
    let s = |i: usize, j: usize| (p[j] * gamma[i] / a[i] - p[i] * gamma[j] / a[j]) / alpha;
    // w(u, v) with u = X
    let w_x = |v_gamma: &DVector<f64>, v_p: &DVector<f64>| -> f64 {
        let mut acc = x_gamma.dot(v_p) - x_p.dot(v_gamma);
        for i in 0..n {
            for j in 0..n {
                if i != j {
                    acc += s(i, j) * x_gamma[i] * v_gamma[j];
                }
            }
        }
        acc
    };

    // Tangent basis at (γ, p): (u_k, -(p, u_k)γ) and (0, u_k), u_k ⊥ γ.
    let complement = orthonormal_complement(gamma);
    let mut residual: f64 = 0.0;
    let zero = DVector::zeros(n);
    for u in &complement {
        let v_p = -(p.dot(u)) * gamma;
        let lhs = w_x(u, &v_p);
        let rhs = h_gamma.dot(u) + h_p.dot(&v_p);
        residual = residual.max((lhs - rhs).abs());

        let lhs = w_x(&zero, u);
        let rhs = h_p.dot(u);
        residual = residual.max((lhs - rhs).abs());
    }
    residual
}

// ---------------------------------------------------------------------------
// Clock map and trajectory reparametrization
// ---------------------------------------------------------------------------

/// Sampled monotone clock τ(t) with slopes `dτ/dt = N(γ(t)) > 0`, invertible
/// by monotone cubic interpolation.
#[derive(Debug, Clone)]
pub struct ClockMap {
    ts: Vec<f64>,
    taus: Vec<f64>,
    rates: Vec<f64>,
}

impl ClockMap {
    pub fn new(ts: Vec<f64>, taus: Vec<f64>, rates: Vec<f64>) -> Result<Self> {
        if ts.len() != taus.len() || ts.len() != rates.len() || ts.len() < 2 {
            return Err(Error::Config("clock map needs matching sample arrays".into()));
        }
        for w in ts.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config("clock map times must increase".into()));
            }
        }
        for w in taus.windows(2) {
            if w[1] <= w[0] {
                return Err(Error::Config("clock map must be strictly increasing".into()));
            }
        }
        if rates.iter().any(|&r| r <= 0.0) {
            return Err(Error::Config("clock rates must be positive".into()));
        }
        Ok(Self { ts, taus, rates })
    }

    pub fn t_samples(&self) -> &[f64] {
        &self.ts
    }

    pub fn tau_samples(&self) -> &[f64] {
        &self.taus
    }

    /// τ(t) by cubic Hermite interpolation with the exact slopes N(γ).
    pub fn tau_of_t(&self, t: f64) -> f64 {
        let idx = match self.ts.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
            Ok(i) => return self.taus[i],
            Err(i) => i.clamp(1, self.ts.len() - 1),
        };
        self.eval_interval(idx, t)
    }

    fn eval_interval(&self, idx: usize, t: f64) -> f64 {
        let (t0, t1) = (self.ts[idx - 1], self.ts[idx]);
        let y0 = DVector::from_vec(vec![self.taus[idx - 1]]);
        let y1 = DVector::from_vec(vec![self.taus[idx]]);
        let f0 = DVector::from_vec(vec![self.rates[idx - 1]]);
        let f1 = DVector::from_vec(vec![self.rates[idx]]);
        hermite_eval(t0, &y0, &f0, t1, &y1, &f1, t)[0]
    }

    /// Inverse map t(τ) by safeguarded Newton on the interval cubic.
    pub fn t_of_tau(&self, tau: f64) -> f64 {
        let idx = match self.taus.binary_search_by(|x| x.partial_cmp(&tau).unwrap()) {
            Ok(i) => return self.ts[i],
            Err(i) => i.clamp(1, self.taus.len() - 1),
        };
        let (mut lo, mut hi) = (self.ts[idx - 1], self.ts[idx]);
        let mut t = lo + (hi - lo) * (tau - self.taus[idx - 1])
            / (self.taus[idx] - self.taus[idx - 1]);
        for _ in 0..60 {
            let f = self.eval_interval(idx, t) - tau;
            if f.abs() < 1e-15 * (1.0 + tau.abs()) {
                break;
            }
            if f > 0.0 {
                hi = t;
            } else {
                lo = t;
            }
            // local slope never vanishes (rates are positive)
            let slope = (self.eval_interval(idx, t + 1e-9) - self.eval_interval(idx, t)) / 1e-9;
            let newton = t - f / slope;
            t = if newton > lo && newton < hi {
                newton
            } else {
                0.5 * (lo + hi)
            };
        }
        t
    }
}

/// Reparametrizes a t-clock trajectory of the reduced flow into the τ clock:
/// `τ(t) = ∫₀ᵗ N(γ(s)) ds` and `(γ, p) ↦ (γ, p̃ = N p)`.
///
/// If the trajectory already carries clock samples (from
/// [`crate::numerics::integrate_with_clock`]) they are used verbatim;
/// otherwise τ is accumulated by interval Simpson quadrature with a cubic
/// Hermite midpoint state, matching the integrator's order.
pub fn reparametrize(
    traj: &Trajectory,
    params: &ChaplyginParams,
) -> Result<(ClockMap, Trajectory)> {
    let n2 = traj.states[0].len();
    let rate = |y: &DVector<f64>| {
        let (g, _) = split_pair(y);
        multiplier(&g, params)
    };
    let taus: Vec<f64> = match &traj.taus {
        Some(taus) => taus.clone(),
        None => {
            let rhs = crate::chaplygin::cotangent_flat_rhs(params);
            let mut taus = Vec::with_capacity(traj.len());
            let mut acc = 0.0;
            taus.push(0.0);
            for i in 1..traj.len() {
                let (t0, t1) = (traj.times[i - 1], traj.times[i]);
                let (y0, y1) = (&traj.states[i - 1], &traj.states[i]);
                let mid = hermite_eval(t0, y0, &rhs(y0), t1, y1, &rhs(y1), 0.5 * (t0 + t1));
                let h = t1 - t0;
                acc += h / 6.0 * (rate(y0) + 4.0 * rate(&mid) + rate(y1));
                taus.push(acc);
            }
            taus
        }
    };
    let rates: Vec<f64> = traj.states.iter().map(|y| rate(y)).collect();
    let clock = ClockMap::new(traj.times.clone(), taus.clone(), rates)?;

    let states: Vec<DVector<f64>> = traj
        .states
        .iter()
        .map(|y| {
            let (g, p) = split_pair(y);
            let pt = to_tilde(&g, &p, params);
            join_pair(&g, &pt)
        })
        .collect();
    debug_assert_eq!(states[0].len(), n2);
    let mapped = Trajectory {
        times: taus,
        states,
        taus: None,
        meta: traj.meta.clone(),
    };
    Ok((clock, mapped))
}
