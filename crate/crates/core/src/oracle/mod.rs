//! Independent ground truth for the closed forms: Hamiltonians built from
//! ladder operators, dense exponentials, ODE integrators for the
//! Schrödinger and Lindblad equations, and the alternating-step damping
//! construction. Nothing here uses the closed-form modules.

pub mod dynamics;
pub mod hamiltonian;
pub mod ode;
pub mod trotter;

pub use dynamics::{integrate_lindblad, integrate_schrodinger, integrate_schrodinger_with, OracleRun};
pub use hamiltonian::{
    dense_propagator, hamiltonian_matrix, hamiltonian_sparse, multimode_hamiltonian_sparse, operator_norm,
    unitary_exp, SparseMatrix,
};
pub use ode::{IntegrationStats, IntegratorConfig, Method};
pub use trotter::{trotter_evolve, CoherentBlockState};

use crate::C64;
use nalgebra::DMatrix;

/// `(γ/2) ∫_0^t |φ_n − φ_m|² dt'` obtained by integrating the damped mirror
/// amplitude equations `dφ/dt = −(i + γ/2) φ + i k n` from `φ(0) = 0`
/// together with the integrand, using `steps` RK4 steps.
pub fn decoherence_integral(n: usize, m: usize, k: f64, gamma: f64, t: f64, steps: usize) -> f64 {
    let rate = C64::new(gamma / 2.0, 1.0);
    let (dn, dm) = (C64::new(0.0, k * n as f64), C64::new(0.0, k * m as f64));
    let y0 = DMatrix::zeros(3, 1);
    let rhs = |_t: f64, y: &DMatrix<C64>, out: &mut DMatrix<C64>| {
        out[0] = -rate * y[0] + dn;
        out[1] = -rate * y[1] + dm;
        out[2] = C64::new(0.5 * gamma * (y[0] - y[1]).norm_sqr(), 0.0);
    };
    let cfg = IntegratorConfig::rk4(t / steps.max(1) as f64);
    let (y, _) = ode::integrate(rhs, &y0, 0.0, t, &cfg).expect("fixed-step run within budget");
    y[2].re
}
