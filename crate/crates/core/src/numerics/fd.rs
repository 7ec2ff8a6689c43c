//! Central finite-difference oracles and the Liouville measure verifier.

use nalgebra::DVector;

/// Central-difference gradient, error O(step²).
pub fn fd_gradient(
    f: &dyn Fn(&DVector<f64>) -> f64,
    x: &DVector<f64>,
    step: f64,
) -> DVector<f64> {
    let mut g = DVector::zeros(x.len());
    let mut xp = x.clone();
    for i in 0..x.len() {
        let xi = x[i];
        xp[i] = xi + step;
        let fp = f(&xp);
        xp[i] = xi - step;
        let fm = f(&xp);
        xp[i] = xi;
        g[i] = (fp - fm) / (2.0 * step);
    }
    g
}

/// Central-difference divergence of a vector field, error O(step²).
pub fn fd_divergence(
    field: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
    step: f64,
) -> f64 {
    let mut div = 0.0;
    let mut xp = x.clone();
    for i in 0..x.len() {
        let xi = x[i];
        xp[i] = xi + step;
        let fp = field(&xp)[i];
        xp[i] = xi - step;
        let fm = field(&xp)[i];
        xp[i] = xi;
        div += (fp - fm) / (2.0 * step);
    }
    div
}

/// Liouville residual `div(μX) = Σ ẋ_i ∂μ/∂x_i + μ div(X)` with analytic
/// divergence and density gradient. Zero (to round-off) exactly when μ is an
/// invariant density of the field at `x`.
pub fn liouville_residual_analytic(
    field: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    divergence: &dyn Fn(&DVector<f64>) -> f64,
    density: &dyn Fn(&DVector<f64>) -> f64,
    density_grad: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    x: &DVector<f64>,
) -> f64 {
    let xdot = field(x);
    xdot.dot(&density_grad(x)) + density(x) * divergence(x)
}

/// Liouville residual with finite-difference fallback for both the field
/// divergence and the density gradient.
pub fn liouville_residual_fd(
    field: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    density: &dyn Fn(&DVector<f64>) -> f64,
    x: &DVector<f64>,
    step: f64,
) -> f64 {
    let xdot = field(x);
    xdot.dot(&fd_gradient(density, x, step)) + density(x) * fd_divergence(field, x, step)
}
