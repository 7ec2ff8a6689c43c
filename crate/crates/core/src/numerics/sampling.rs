//! Seeded random generation of states and admissible parameters.
//!
//! All sampling is backed by ChaCha8 so that a recorded seed reproduces a
//! trajectory bit-for-bit within one build.

use nalgebra::{DMatrix, DVector};
use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use crate::inertia::ChaplyginParams;
use crate::son::RotationMatrix;

/// Deterministic generator from a seed.
pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Standard normal deviate (Box–Muller).
pub fn normal(r: &mut impl Rng) -> f64 {
    let u1: f64 = r.random::<f64>().max(1e-300);
    let u2: f64 = r.random();
    (-2.0 * u1.ln()).sqrt() * (std::f64::consts::TAU * u2).cos()
}

/// Vector of i.i.d. standard normals.
pub fn vector(r: &mut impl Rng, n: usize) -> DVector<f64> {
    DVector::from_fn(n, |_, _| normal(r))
}

/// Uniform point on the unit sphere S^{n-1}.
pub fn unit_vector(r: &mut impl Rng, n: usize) -> DVector<f64> {
    loop {
        let v = vector(r, n);
        let norm = v.norm();
        if norm > 1e-6 {
            return v / norm;
        }
    }
}

/// Random point of `T*S^{n-1}` in redundant coordinates: γ uniform on the
/// sphere, p standard normal projected orthogonal to γ.
pub fn cotangent_pair(r: &mut impl Rng, n: usize) -> (DVector<f64>, DVector<f64>) {
    let gamma = unit_vector(r, n);
    let raw = vector(r, n);
    let p = &raw - gamma.dot(&raw) * &gamma;
    (gamma, p)
}

/// Random point of `T*S^{n-1}` avoiding coordinate hyperplanes: every
/// `|γ_i|` at least `margin` (chart-interior sampling).
pub fn chart_interior_pair(
    r: &mut impl Rng,
    n: usize,
    margin: f64,
) -> (DVector<f64>, DVector<f64>) {
    loop {
        let (gamma, p) = cotangent_pair(r, n);
        if gamma.iter().all(|&g| g.abs() > margin) {
            return (gamma, p);
        }
    }
}

/// Haar-ish random rotation: QR of a Gaussian matrix with the determinant
/// fixed to +1.
pub fn rotation(r: &mut impl Rng, n: usize) -> RotationMatrix {
    let m = DMatrix::from_fn(n, n, |_, _| normal(r));
    let qr = m.qr();
    let mut q = qr.q();
    let rr = qr.r();
    // Make the factorization unique (diag R > 0), then fix det = +1.
    for j in 0..n {
        if rr[(j, j)] < 0.0 {
            for i in 0..n {
                q[(i, j)] = -q[(i, j)];
            }
        }
    }
    if q.determinant() < 0.0 {
        for i in 0..n {
            q[(i, 0)] = -q[(i, 0)];
        }
    }
    RotationMatrix::new(q).expect("QR factor is orthogonal")
}

/// Random admissible Chaplygin parameters: a_i in [0.6, 1.4] with distinct
/// sorted entries (min gap 0.05, comfortably above the chart-degeneracy
/// threshold), D between 1.5 and 3 times max a_i a_j.
pub fn chaplygin_params(r: &mut impl Rng, n: usize) -> ChaplyginParams {
    let mut a: Vec<f64> = (0..n)
        .map(|i| 0.6 + 0.8 * (i as f64 + r.random::<f64>() * 0.5) / n as f64)
        .collect();
    a.sort_by(|x, y| x.partial_cmp(y).unwrap());
    for i in 1..n {
        if a[i] - a[i - 1] < 0.05 {
            a[i] = a[i - 1] + 0.05;
        }
    }
    let max_prod = a[n - 1] * a[n - 1];
    let d = max_prod * (1.5 + 1.5 * r.random::<f64>());
    ChaplyginParams::new(DVector::from_vec(a), d).expect("construction keeps a_i a_j < D")
}

/// Random 3-D Veselova inertia tensor with eigenvalues in (1, 4].
pub fn veselova_tensor_3d(r: &mut impl Rng) -> [f64; 3] {
    [
        1.2 + 2.0 * r.random::<f64>(),
        1.5 + 2.0 * r.random::<f64>(),
        1.1 + 2.0 * r.random::<f64>(),
    ]
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn cotangent_pair_satisfies_constraints() {
        let mut r = rng(1);
        for _ in 0..50 {
            let (g, p) = cotangent_pair(&mut r, 5);
            assert_relative_eq!(g.norm(), 1.0, epsilon = 1e-14);
            assert_relative_eq!(g.dot(&p), 0.0, epsilon = 1e-14);
        }
    }

    #[test]
    fn rotation_is_special_orthogonal() {
        let mut r = rng(2);
        let g = rotation(&mut r, 5);
        assert_relative_eq!(g.matrix().determinant(), 1.0, epsilon = 1e-12);
    }

    #[test]
    fn params_are_admissible_and_sorted() {
        let mut r = rng(3);
        for _ in 0..20 {
            let p = chaplygin_params(&mut r, 5);
            let a = p.a();
            for i in 1..5 {
                assert!(a[i] > a[i - 1] + 0.049);
            }
            assert!(a[4] * a[4] < p.d());
        }
    }

    #[test]
    fn seeded_sampling_is_deterministic() {
        let (g1, p1) = cotangent_pair(&mut rng(77), 4);
        let (g2, p2) = cotangent_pair(&mut rng(77), 4);
        assert_eq!(g1, g2);
        assert_eq!(p1, p2);
    }
}
