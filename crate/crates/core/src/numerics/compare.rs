//! Trajectory comparison: sup-norm at mapped times and unparametrized
//! curve distance.

use nalgebra::DVector;

use crate::error::{Error, Result};
use crate::numerics::integrator::{interpolate, Trajectory};

/// Outcome of a trajectory comparison.
#[derive(Debug, Clone)]
pub struct CompareReport {
    /// Largest distance found.
    pub max_distance: f64,
    /// Time (of trajectory A) at which it occurred.
    pub at_time: f64,
    /// Number of samples compared.
    pub samples: usize,
}

/// Sup distance between trajectory `a` evaluated at its (possibly mapped)
/// times and trajectory `b` interpolated at those same times.
///
/// `a_times` must be supplied explicitly so callers can pass a reparametrized
/// clock (τ values) instead of `a.times`. Samples outside `b`'s range are
/// skipped; it is an error if everything is skipped.
pub fn sup_distance_time_mapped(
    a: &Trajectory,
    a_times: &[f64],
    b: &Trajectory,
    b_rhs: &dyn Fn(&DVector<f64>) -> DVector<f64>,
) -> Result<CompareReport> {
    assert_eq!(a.states.len(), a_times.len());
    let b_start = *b.times.first().ok_or(Error::EmptyOverlap)?;
    let b_end = *b.times.last().ok_or(Error::EmptyOverlap)?;
    let mut max_distance: f64 = -1.0;
    let mut at_time = 0.0;
    let mut samples = 0;
    for (t, state) in a_times.iter().zip(a.states.iter()) {
        if *t < b_start || *t > b_end {
            continue;
        }
        let other = interpolate(b, b_rhs, *t);
        let d = (state - other).norm();
        samples += 1;
        if d > max_distance {
            max_distance = d;
            at_time = *t;
        }
    }
    if samples == 0 {
        return Err(Error::EmptyOverlap);
    }
    Ok(CompareReport {
        max_distance,
        at_time,
        samples,
    })
}

/// Distance from a point to the segment [a, b].
fn point_segment_distance(p: &DVector<f64>, a: &DVector<f64>, b: &DVector<f64>) -> f64 {
    let ab = b - a;
    let len2 = ab.dot(&ab);
    if len2 == 0.0 {
        return (p - a).norm();
    }
    let s = ((p - a).dot(&ab) / len2).clamp(0.0, 1.0);
    (p - (a + s * ab)).norm()
}

/// Unparametrized curve distance: max over samples of `a` of the distance to
/// the piecewise-linear curve through `b`'s samples.
pub fn curve_distance(a: &[DVector<f64>], b: &[DVector<f64>]) -> Result<CompareReport> {
    if a.is_empty() || b.len() < 2 {
        return Err(Error::EmptyOverlap);
    }
    let mut max_distance: f64 = -1.0;
    let mut at_index = 0usize;
    // A sweep pointer keeps this near-linear for curves traversed in the
    // same direction; the local window search keeps it robust.
    let mut hint = 0usize;
    for (ia, p) in a.iter().enumerate() {
        let lo = hint.saturating_sub(5);
        let hi = (hint + 50).min(b.len() - 1);
        let mut best = f64::INFINITY;
        let mut best_j = hint;
        for j in lo..hi {
            let d = point_segment_distance(p, &b[j], &b[j + 1]);
            if d < best {
                best = d;
                best_j = j;
            }
        }
        // Fall back to a full scan if the windowed search looks off.
        if best_j + 1 >= hi && hi < b.len() - 1 || best_j <= lo && lo > 0 {
            for j in 0..b.len() - 1 {
                let d = point_segment_distance(p, &b[j], &b[j + 1]);
                if d < best {
                    best = d;
                    best_j = j;
                }
            }
        }
        hint = best_j;
        if best > max_distance {
            max_distance = best;
            at_index = ia;
        }
    }
    Ok(CompareReport {
        max_distance,
        at_time: at_index as f64,
        samples: a.len(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::integrator::{integrate, IntegratorConfig};

    fn harmonic(y: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(vec![y[1], -y[0]])
    }

    #[test]
    fn identical_trajectories_have_zero_distance() {
        let y0 = DVector::from_vec(vec![1.0, 0.0]);
        let cfg = IntegratorConfig::rk4(1e-2, 2.0);
        let a = integrate(&harmonic, &y0, &cfg, None).unwrap();
        let rep = sup_distance_time_mapped(&a, &a.times, &a, &harmonic).unwrap();
        assert_eq!(rep.max_distance, 0.0);
        let rep = curve_distance(&a.states, &a.states).unwrap();
        assert!(rep.max_distance < 1e-15);
    }

    #[test]
    fn curve_distance_detects_offset() {
        let a: Vec<DVector<f64>> = (0..10)
            .map(|i| DVector::from_vec(vec![i as f64, 0.0]))
            .collect();
        let b: Vec<DVector<f64>> = (0..10)
            .map(|i| DVector::from_vec(vec![i as f64, 0.5]))
            .collect();
        let rep = curve_distance(&a, &b).unwrap();
        assert!((rep.max_distance - 0.5).abs() < 1e-14);
    }

    #[test]
    fn disjoint_ranges_error() {
        let y0 = DVector::from_vec(vec![1.0, 0.0]);
        let cfg = IntegratorConfig::rk4(1e-2, 1.0);
        let a = integrate(&harmonic, &y0, &cfg, None).unwrap();
        let shifted: Vec<f64> = a.times.iter().map(|t| t + 100.0).collect();
        assert!(sup_distance_time_mapped(&a, &shifted, &a, &harmonic).is_err());
    }
}
