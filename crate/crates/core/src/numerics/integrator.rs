//! Fixed-step RK4 and adaptive RKF45 with optional constraint projection.

use nalgebra::DVector;

use crate::error::{Error, Result};

/// Integration scheme.
#[derive(Debug, Clone, PartialEq)]
pub enum Method {
    /// Classical fourth-order Runge–Kutta with fixed step.
    Rk4 { step: f64 },
    /// Runge–Kutta–Fehlberg 4(5) with PI step-size control.
    Rkf45 {
        rel_tol: f64,
        abs_tol: f64,
        initial_step: f64,
    },
}

/// Integrator configuration.
#[derive(Debug, Clone)]
pub struct IntegratorConfig {
    pub method: Method,
    pub t_end: f64,
    /// Record every `stride`-th accepted step (the final state is always
    /// recorded).
    pub stride: usize,
}

impl IntegratorConfig {
    pub fn rk4(step: f64, t_end: f64) -> Self {
        Self {
            method: Method::Rk4 { step },
            t_end,
            stride: 1,
        }
    }

    pub fn with_stride(mut self, stride: usize) -> Self {
        self.stride = stride.max(1);
        self
    }

    fn validate(&self) -> Result<()> {
        let ok = match self.method {
            Method::Rk4 { step } => step > 0.0,
            Method::Rkf45 {
                rel_tol,
                abs_tol,
                initial_step,
            } => rel_tol > 0.0 && abs_tol > 0.0 && initial_step > 0.0,
        };
        if !ok || !(self.t_end > 0.0) {
            return Err(Error::Config(
                "integrator requires positive step/tolerances and t_end".into(),
            ));
        }
        Ok(())
    }
}

/// Provenance of a trajectory.
#[derive(Debug, Clone, Default)]
pub struct TrajectoryMeta {
    pub model: String,
    pub method: String,
    pub projection: bool,
    pub seed: Option<u64>,
    /// Largest displacement introduced by a single projection step.
    pub max_projection_displacement: f64,
}

/// A sampled solution. Times are strictly increasing; `taus` is filled when
/// the trajectory was produced with an auxiliary clock.
#[derive(Debug, Clone)]
pub struct Trajectory {
    pub times: Vec<f64>,
    pub states: Vec<DVector<f64>>,
    pub taus: Option<Vec<f64>>,
    pub meta: TrajectoryMeta,
}

impl Trajectory {
    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_state(&self) -> &DVector<f64> {
        self.states.last().expect("trajectory is never empty")
    }

    /// Maximum over samples of `|q(state) - q(state_0)| / (1 + |q(state_0)|)`
    /// for a scalar quantity q: the relative drift measure used by every
    /// conservation check in the crate.
    pub fn relative_drift(&self, q: &dyn Fn(&DVector<f64>) -> f64) -> f64 {
        let q0 = q(&self.states[0]);
        let scale = 1.0 + q0.abs();
        self.states
            .iter()
            .map(|s| (q(s) - q0).abs() / scale)
            .fold(0.0, f64::max)
    }
}

fn rk4_step(
    rhs: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    y: &DVector<f64>,
    h: f64,
) -> DVector<f64> {
    let k1 = rhs(y);
    let k2 = rhs(&(y + (h / 2.0) * &k1));
    let k3 = rhs(&(y + (h / 2.0) * &k2));
    let k4 = rhs(&(y + h * &k3));
    y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
}

/// Integrates the autonomous system `ẏ = rhs(y)` from `y0` to `t_end`.
///
/// When a projector is supplied it is applied after every accepted step;
/// the largest displacement it introduces is recorded in the metadata.
pub fn integrate(
    rhs: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    y0: &DVector<f64>,
    cfg: &IntegratorConfig,
    projector: Option<&dyn Fn(&mut DVector<f64>)>,
) -> Result<Trajectory> {
    cfg.validate()?;
    match cfg.method {
        Method::Rk4 { step } => integrate_rk4(rhs, y0, step, cfg, projector),
        Method::Rkf45 {
            rel_tol,
            abs_tol,
            initial_step,
        } => integrate_rkf45(rhs, y0, rel_tol, abs_tol, initial_step, cfg, projector),
    }
}

fn push_sample(
    times: &mut Vec<f64>,
    states: &mut Vec<DVector<f64>>,
    t: f64,
    y: &DVector<f64>,
) {
    times.push(t);
    states.push(y.clone());
}

fn integrate_rk4(
    rhs: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    y0: &DVector<f64>,
    step: f64,
    cfg: &IntegratorConfig,
    projector: Option<&dyn Fn(&mut DVector<f64>)>,
) -> Result<Trajectory> {
    let mut t = 0.0;
    let mut y = y0.clone();
    let mut times = Vec::new();
    let mut states = Vec::new();
    push_sample(&mut times, &mut states, t, &y);
    let mut max_disp: f64 = 0.0;
    let mut accepted: usize = 0;

    while t < cfg.t_end - 1e-14 * cfg.t_end {
        let h = step.min(cfg.t_end - t);
        let mut y_next = rk4_step(rhs, &y, h);
        if y_next.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteRhs { t });
        }
        if let Some(proj) = projector {
            let before = y_next.clone();
            proj(&mut y_next);
            max_disp = max_disp.max((&y_next - before).norm());
        }
        t += h;
        y = y_next;
        accepted += 1;
        if accepted % cfg.stride == 0 || t >= cfg.t_end - 1e-14 * cfg.t_end {
            push_sample(&mut times, &mut states, t, &y);
        }
    }

    Ok(Trajectory {
        times,
        states,
        taus: None,
        meta: TrajectoryMeta {
            method: format!("rk4(h={step})"),
            projection: projector.is_some(),
            max_projection_displacement: max_disp,
            ..Default::default()
        },
    })
}

// Fehlberg 4(5) tableau.
const B5: [f64; 6] = [
    16.0 / 135.0,
    0.0,
    6656.0 / 12825.0,
    28561.0 / 56430.0,
    -9.0 / 50.0,
    2.0 / 55.0,
];
const B4: [f64; 6] = [
    25.0 / 216.0,
    0.0,
    1408.0 / 2565.0,
    2197.0 / 4104.0,
    -1.0 / 5.0,
    0.0,
];

#[allow(clippy::too_many_arguments)]
fn integrate_rkf45(
    rhs: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    y0: &DVector<f64>,
    rel_tol: f64,
    abs_tol: f64,
    initial_step: f64,
    cfg: &IntegratorConfig,
    projector: Option<&dyn Fn(&mut DVector<f64>)>,
) -> Result<Trajectory> {
    let mut t = 0.0;
    let mut y = y0.clone();
    let mut h = initial_step.min(cfg.t_end);
    let min_step = 1e-14 * cfg.t_end;
    let mut times = Vec::new();
    let mut states = Vec::new();
    push_sample(&mut times, &mut states, t, &y);
    let mut max_disp: f64 = 0.0;
    let mut accepted: usize = 0;
    let mut prev_err_ratio: f64 = 1.0;
    let mut rejections_in_a_row = 0;

    while t < cfg.t_end - min_step {
        h = h.min(cfg.t_end - t);
        let k1 = rhs(&y);
        let k2 = rhs(&(&y + (h * 0.25) * &k1));
        let k3 = rhs(&(&y + h * (3.0 / 32.0) * &k1 + h * (9.0 / 32.0) * &k2));
        let k4 = rhs(&(&y
            + h * (1932.0 / 2197.0) * &k1
            + h * (-7200.0 / 2197.0) * &k2
            + h * (7296.0 / 2197.0) * &k3));
        let k5 = rhs(&(&y
            + h * (439.0 / 216.0) * &k1
            + h * (-8.0) * &k2
            + h * (3680.0 / 513.0) * &k3
            + h * (-845.0 / 4104.0) * &k4));
        let k6 = rhs(&(&y
            + h * (-8.0 / 27.0) * &k1
            + h * 2.0 * &k2
            + h * (-3544.0 / 2565.0) * &k3
            + h * (1859.0 / 4104.0) * &k4
            + h * (-11.0 / 40.0) * &k5));
        let ks = [&k1, &k2, &k3, &k4, &k5, &k6];
        let mut y5 = y.clone();
        let mut y4 = y.clone();
        for (i, k) in ks.iter().enumerate() {
            y5 += h * B5[i] * *k;
            y4 += h * B4[i] * *k;
        }
        if y5.iter().any(|v| !v.is_finite()) {
            return Err(Error::NonFiniteRhs { t });
        }
        // Scaled error norm: err <= 1 means acceptable.
        let mut err: f64 = 0.0;
        for i in 0..y.len() {
            let scale = abs_tol + rel_tol * y[i].abs().max(y5[i].abs());
            err = err.max((y5[i] - y4[i]).abs() / scale);
        }
        if err <= 1.0 {
            t += h;
            let mut y_next = y5;
            if let Some(proj) = projector {
                let before = y_next.clone();
                proj(&mut y_next);
                max_disp = max_disp.max((&y_next - before).norm());
            }
            y = y_next;
            accepted += 1;
            rejections_in_a_row = 0;
            if accepted % cfg.stride == 0 || t >= cfg.t_end - min_step {
                push_sample(&mut times, &mut states, t, &y);
            }
            // PI controller (orders 0.7/5 and 0.4/5).
            let e = err.max(1e-10);
            let factor = 0.9 * e.powf(-0.14) * prev_err_ratio.powf(0.08);
            h *= factor.clamp(0.2, 5.0);
            prev_err_ratio = e;
        } else {
            rejections_in_a_row += 1;
            h *= (0.9 * err.powf(-0.2)).clamp(0.1, 0.9);
            if h < min_step || rejections_in_a_row > 60 {
                return Err(Error::StepRejectionCascade { t, min_step });
            }
        }
    }

    Ok(Trajectory {
        times,
        states,
        taus: None,
        meta: TrajectoryMeta {
            method: format!("rkf45(rel={rel_tol},abs={abs_tol})"),
            projection: projector.is_some(),
            max_projection_displacement: max_disp,
            ..Default::default()
        },
    })
}

/// Integrates `ẏ = rhs(y)` together with the monotone clock
/// `τ̇ = rate(y) > 0`, so the clock is obtained with the same quadrature
/// order as the integrator itself. The returned trajectory has `taus`
/// populated (τ(0) = 0).
pub fn integrate_with_clock(
    rhs: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    rate: &dyn Fn(&DVector<f64>) -> f64,
    y0: &DVector<f64>,
    cfg: &IntegratorConfig,
    projector: Option<&dyn Fn(&mut DVector<f64>)>,
) -> Result<Trajectory> {
    let dim = y0.len();
    let mut aug0 = DVector::zeros(dim + 1);
    aug0.rows_mut(0, dim).copy_from(y0);
    let aug_rhs = |ya: &DVector<f64>| -> DVector<f64> {
        let y = ya.rows(0, dim).into_owned();
        let dy = rhs(&y);
        let mut out = DVector::zeros(dim + 1);
        out.rows_mut(0, dim).copy_from(&dy);
        out[dim] = rate(&y);
        out
    };
    let aug_proj = projector.map(|proj| {
        move |ya: &mut DVector<f64>| {
            let mut y = ya.rows(0, dim).into_owned();
            proj(&mut y);
            ya.rows_mut(0, dim).copy_from(&y);
        }
    });
    let traj = match &aug_proj {
        Some(p) => integrate(&aug_rhs, &aug0, cfg, Some(p))?,
        None => integrate(&aug_rhs, &aug0, cfg, None)?,
    };
    let taus: Vec<f64> = traj.states.iter().map(|s| s[dim]).collect();
    let states: Vec<DVector<f64>> = traj
        .states
        .iter()
        .map(|s| s.rows(0, dim).into_owned())
        .collect();
    Ok(Trajectory {
        times: traj.times,
        states,
        taus: Some(taus),
        meta: traj.meta,
    })
}

/// Cubic Hermite interpolation on one interval from endpoint values and
/// derivatives.
pub fn hermite_eval(
    t0: f64,
    y0: &DVector<f64>,
    f0: &DVector<f64>,
    t1: f64,
    y1: &DVector<f64>,
    f1: &DVector<f64>,
    t: f64,
) -> DVector<f64> {
    let h = t1 - t0;
    let s = (t - t0) / h;
    let s2 = s * s;
    let s3 = s2 * s;
    let h00 = 2.0 * s3 - 3.0 * s2 + 1.0;
    let h10 = s3 - 2.0 * s2 + s;
    let h01 = -2.0 * s3 + 3.0 * s2;
    let h11 = s3 - s2;
    h00 * y0 + (h10 * h) * f0 + h01 * y1 + (h11 * h) * f1
}

/// Interpolates a trajectory at time `t` with cubic Hermite, recomputing
/// endpoint derivatives from the vector field. `t` must lie inside the
/// sampled range.
pub fn interpolate(
    traj: &Trajectory,
    rhs: &dyn Fn(&DVector<f64>) -> DVector<f64>,
    t: f64,
) -> DVector<f64> {
    let times = &traj.times;
    let idx = match times.binary_search_by(|x| x.partial_cmp(&t).unwrap()) {
        Ok(i) => return traj.states[i].clone(),
        Err(i) => i,
    };
    assert!(
        idx > 0 && idx < times.len(),
        "interpolation time {t} outside sampled range [{}, {}]",
        times[0],
        times[times.len() - 1]
    );
    let (t0, t1) = (times[idx - 1], times[idx]);
    let (y0, y1) = (&traj.states[idx - 1], &traj.states[idx]);
    hermite_eval(t0, y0, &rhs(y0), t1, y1, &rhs(y1), t)
}

#[cfg(test)]
mod tests {
    use super::*;
    use approx::assert_relative_eq;

    fn harmonic(y: &DVector<f64>) -> DVector<f64> {
        DVector::from_vec(vec![y[1], -y[0]])
    }

    fn harmonic_exact(t: f64) -> DVector<f64> {
        DVector::from_vec(vec![t.cos(), -t.sin()])
    }

    #[test]
    fn rk4_fourth_order_by_step_halving() {
        let y0 = DVector::from_vec(vec![1.0, 0.0]);
        let t_end = 2.0;
        let err = |h: f64| {
            let cfg = IntegratorConfig::rk4(h, t_end);
            let traj = integrate(&harmonic, &y0, &cfg, None).unwrap();
            (traj.last_state() - harmonic_exact(t_end)).norm()
        };
        let ratio = err(0.05) / err(0.025);
        assert!(
            (14.4..=17.6).contains(&ratio),
            "step-halving ratio {ratio} not within 16 ± 10%"
        );
        let order = ratio.log2();
        assert!((3.8..=4.2).contains(&order), "observed order {order}");
    }

    #[test]
    fn rkf45_meets_tolerance_on_harmonic() {
        let y0 = DVector::from_vec(vec![1.0, 0.0]);
        let cfg = IntegratorConfig {
            method: Method::Rkf45 {
                rel_tol: 1e-10,
                abs_tol: 1e-12,
                initial_step: 0.1,
            },
            t_end: 10.0,
            stride: 1,
        };
        let traj = integrate(&harmonic, &y0, &cfg, None).unwrap();
        let err = (traj.last_state() - harmonic_exact(10.0)).norm();
        assert!(err < 1e-7, "rkf45 error {err}");
        assert_relative_eq!(*traj.times.last().unwrap(), 10.0, epsilon = 1e-12);
    }

    #[test]
    fn projection_of_feasible_state_is_tiny() {
        // Projecting an already-feasible state must be a no-op to 1e-15.
        let y0 = DVector::from_vec(vec![1.0, 0.0]);
        let proj = |y: &mut DVector<f64>| {
            let n = (y[0] * y[0] + y[1] * y[1]).sqrt();
            y[0] /= n;
            y[1] /= n;
        };
        let circle = |y: &DVector<f64>| DVector::from_vec(vec![-y[1], y[0]]);
        let cfg = IntegratorConfig::rk4(1e-3, 1.0);
        let traj = integrate(&circle, &y0, &cfg, Some(&proj)).unwrap();
        assert!(traj.meta.max_projection_displacement < 1e-12);
        let mut y = traj.last_state().clone();
        let before = y.clone();
        proj(&mut y);
        assert!((y - before).norm() <= 1e-15);
    }

    #[test]
    fn deterministic_repeat_is_bit_identical() {
        let y0 = DVector::from_vec(vec![0.3, 0.7]);
        let cfg = IntegratorConfig::rk4(1e-2, 3.0);
        let a = integrate(&harmonic, &y0, &cfg, None).unwrap();
        let b = integrate(&harmonic, &y0, &cfg, None).unwrap();
        assert_eq!(a.states.len(), b.states.len());
        for (x, y) in a.states.iter().zip(b.states.iter()) {
            assert_eq!(x, y);
        }
    }

    #[test]
    fn clock_matches_quadrature_of_constant_rate() {
        let y0 = DVector::from_vec(vec![1.0, 0.0]);
        let cfg = IntegratorConfig::rk4(1e-2, 2.0);
        let traj =
            integrate_with_clock(&harmonic, &|_| 0.25, &y0, &cfg, None).unwrap();
        let taus = traj.taus.as_ref().unwrap();
        for (t, tau) in traj.times.iter().zip(taus.iter()) {
            assert_relative_eq!(*tau, 0.25 * t, epsilon = 1e-13);
        }
    }

    #[test]
    fn hermite_interpolation_is_fourth_order_accurate() {
        let t0 = 0.0;
        let t1 = 0.1;
        let y0 = harmonic_exact(t0);
        let y1 = harmonic_exact(t1);
        let f0 = harmonic(&y0);
        let f1 = harmonic(&y1);
        let mid = hermite_eval(t0, &y0, &f0, t1, &y1, &f1, 0.05);
        assert!((mid - harmonic_exact(0.05)).norm() < 1e-7);
    }

    #[test]
    fn strides_keep_endpoints() {
        let y0 = DVector::from_vec(vec![1.0, 0.0]);
        let cfg = IntegratorConfig::rk4(1e-2, 1.0).with_stride(7);
        let traj = integrate(&harmonic, &y0, &cfg, None).unwrap();
        assert_eq!(traj.times[0], 0.0);
        assert_relative_eq!(*traj.times.last().unwrap(), 1.0, epsilon = 1e-12);
        for w in traj.times.windows(2) {
            assert!(w[1] > w[0]);
        }
    }
}
