//! Integration, finite-difference oracles, sampling and trajectory
//! comparison utilities.
//!
//! The integrators are deliberately classical (RK4 and RKF45): every claim
//! verified by this crate is a conservation or equivalence statement at desk
//! scale, and drift statistics must reflect the vector field, not a
//! structure-preserving integrator. Constraint projection is available but
//! off by default in drift measurements.

pub mod compare;
pub mod expm;
pub mod fd;
pub mod integrator;
pub mod sampling;

pub use compare::{curve_distance, sup_distance_time_mapped, CompareReport};
pub use expm::expm;
pub use fd::{fd_divergence, fd_gradient, liouville_residual_analytic, liouville_residual_fd};
pub use integrator::{
    hermite_eval, integrate, integrate_with_clock, IntegratorConfig, Method, Trajectory,
    TrajectoryMeta,
};
