//! Matrix exponential by scaling and squaring with a Taylor core.
//!
//! Serves as the independent oracle for attitude reconstruction (constant
//! angular velocity gives `g(t) = g₀ exp(tω)`), so it deliberately avoids the
//! integrator code path.

use nalgebra::DMatrix;

/// `exp(M)` for a square matrix, accurate to near machine precision for the
/// moderate norms that occur at desk scale.
pub fn expm(m: &DMatrix<f64>) -> DMatrix<f64> {
    let n = m.nrows();
    assert_eq!(n, m.ncols(), "expm needs a square matrix");
    let norm = m.abs().max();
    let squarings = if norm > 0.5 {
        (norm / 0.5).log2().ceil() as u32
    } else {
        0
    };
    let scaled = m / 2f64.powi(squarings as i32);
    // Taylor series of the scaled matrix; ||scaled|| <= 0.5 so 20 terms give
    // a remainder far below f64 resolution.
    let mut term = DMatrix::identity(n, n);
    let mut sum = DMatrix::identity(n, n);
    for k in 1..=20 {
        term = &term * &scaled / k as f64;
        sum += &term;
    }
    for _ in 0..squarings {
        sum = &sum * &sum;
    }
    sum
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    #[test]
    fn exp_of_planar_rotation_generator() {
        // exp(t (E1∧E2)) acts as a rotation by t in the (1,2) plane.
        let t = 0.83;
        let mut m = DMatrix::zeros(3, 3);
        m[(0, 1)] = t;
        m[(1, 0)] = -t;
        let e = expm(&m);
        assert_relative_eq!(e[(0, 0)], t.cos(), epsilon = 1e-14);
        assert_relative_eq!(e[(0, 1)], t.sin(), epsilon = 1e-14);
        assert_relative_eq!(e[(1, 0)], -t.sin(), epsilon = 1e-14);
        assert_relative_eq!(e[(2, 2)], 1.0, epsilon = 1e-15);
    }

    #[test]
    fn exp_of_skew_is_orthogonal() {
        let mut r = crate::numerics::sampling::rng(19);
        let x = crate::numerics::sampling::vector(&mut r, 5);
        let y = crate::numerics::sampling::vector(&mut r, 5);
        let m = crate::son::wedge(&x, &y);
        let e = expm(m.matrix());
        let defect = (e.transpose() * &e - DMatrix::identity(5, 5)).abs().max();
        assert!(defect < 1e-13, "orthogonality defect {defect}");
    }
}
