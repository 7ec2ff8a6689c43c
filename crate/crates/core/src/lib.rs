//! Numerical laboratory for the reduced n-dimensional Chaplygin sphere, its
//! Hamiltonization by time reparametrization, and the associated Veselova
//! problem.
//!
//! The library is organized around the reduction ladder of the rolling-ball
//! problem:
//!
//! - [`son`] — exact linear algebra on `so(n)`: wedge products, the invariant
//!   scalar product, projections onto `h^γ = R^n ∧ γ`, the adjoint action and
//!   the 3-D hat-map isomorphism.
//! - [`inertia`] — inertia operators diagonal in the `E_i ∧ E_j` basis, with
//!   the Chaplygin, Veselova and Lagrange specializations and the 3-D
//!   principal-axis and Fedorov parameter maps.
//! - [`chaplygin`] — right-hand sides, Hamiltonians, conserved quantities and
//!   measure densities at every reduction level: `so(n)* × S^{n-1}`,
//!   `T*S^{n-1}` (generic inertia and the closed form), the classical 3-D
//!   ball, and attitude/contact reconstruction.
//! - [`hamiltonization`] — the reducing multiplier `N = 1/(D √(γ, A⁻¹γ))`, the
//!   momentum rescaling `p̃ = N p`, the Dirac-bracket geodesic flow in the new
//!   time `τ`, and the t ↔ τ trajectory-equivalence machinery.
//! - [`veselova`] — the reduced n-dimensional Veselova flow, the classical
//!   3-D Veselova system, the Fedorov transformation to the Chaplygin ball,
//!   and the ellipsoid-geodesic Gauss-map equivalence.
//! - [`integrability`] — spheroconical coordinates, the commuting quadratic
//!   family, linear and Lagrange-case integrals, and the shared-foliation
//!   verifications.
//! - [`numerics`] — fixed-step and adaptive integrators with optional
//!   constraint projection, finite-difference oracles, the Liouville measure
//!   verifier and trajectory comparison utilities.
//! - [`scenario`] — the scenario-driven front end behind the `chaplab`
//!   binary: TOML configs, named conservation checks, machine-readable
//!   trajectory tables and pass/fail reports.
//!
//! Every formula exposed here is covered by unit tests against independently
//! computed values, and the `acceptance` integration test runs the full
//! verification suite.
//!
//! See the `examples/` directory for one runnable example per capability.

pub mod chaplygin;
pub mod error;
pub mod hamiltonization;
pub mod inertia;
pub mod integrability;
pub mod numerics;
pub mod scenario;
pub mod son;
pub mod state;
pub mod veselova;

pub use error::Error;
