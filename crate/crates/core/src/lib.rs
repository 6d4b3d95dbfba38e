//! Cavity field coupled to a movable mirror.
//!
//! The crate builds the joint field–mirror states produced by the
//! radiation-pressure Hamiltonian `H/(ħω_m) = r a†a + b†b − k a†a (b + b†)`
//! in closed form, certifies the nonclassical states they contain
//! (multicomponent cats, entangled multimode cats, near-Fock states, mirror
//! cats), solves the mirror-damped master equation analytically, and
//! cross-checks everything against brute-force integrators in [`oracle`].
//!
//! Conventions used everywhere:
//! - scaled time `t` is physical time times `ω_m`; `gamma` is the damping
//!   rate divided by `ω_m`;
//! - tensor products list field modes first and the mirror last;
//! - quadratures are `x = b + b†`, `y = −i(b − b†)` (vacuum variance 1).

pub mod analysis;
pub mod catalog;
pub mod decoherence;
pub mod error;
pub mod evolution;
pub mod fock;
pub mod measurement;
pub mod metrics;
pub mod oracle;
pub mod params;
pub mod state;

pub use num_complex::Complex64 as C64;

pub use error::{Error, Result};
pub use fock::{coherent_state, ModeSpec, Truncated, Truncation};
pub use metrics::{fidelity, linear_entropy, trace_distance};
pub use params::{coupling_from_physical, Coupling, PhysicalParams, ScaledParams};
pub use state::{kron, tensor_states, DensityOperator, StateVector};

pub(crate) const ONE: C64 = C64::new(1.0, 0.0);
pub(crate) const I: C64 = C64::new(0.0, 1.0);
