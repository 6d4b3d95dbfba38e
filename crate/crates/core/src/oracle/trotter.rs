//! Alternating unitary / damping steps on states of the form
//! `ρ = Σ_{n,m} c_nm |n><m| ⊗ |u_n><u_m|` with normalized mirror coherent
//! states `|u_n>`. Both steps map this form to itself exactly, so the only
//! error is the splitting error, first order in the step.

use nalgebra::DMatrix;

use crate::error::{param_err, Error, Result};
use crate::fock::{coherent_amplitudes, coherent_dim, Truncated};
use crate::params::ScaledParams;
use crate::state::DensityOperator;
use crate::C64;

#[derive(Debug, Clone, PartialEq)]
pub struct CoherentBlockState {
    /// `c_nm`, field_dim × field_dim.
    pub coeffs: DMatrix<C64>,
    /// Mirror amplitude `u_n` attached to field level `n`.
    pub amps: Vec<C64>,
}

impl CoherentBlockState {
    /// `ρ_field ⊗ |β><β|` for a single-mode field density operator.
    pub fn product(field: &DensityOperator, beta: C64) -> Result<Self> {
        if field.dims().len() != 1 {
            return Err(Error::UnsupportedState(format!(
                "alternating evolution needs a single field mode, got dims {:?}",
                field.dims()
            )));
        }
        let d = field.dim();
        Ok(Self { coeffs: field.matrix().clone(), amps: vec![beta; d] })
    }

    pub fn field_dim(&self) -> usize {
        self.amps.len()
    }

    fn overlap(&self, m: usize, n: usize) -> C64 {
        let (a, b) = (self.amps[m], self.amps[n]);
        (a.conj() * b - 0.5 * a.norm_sqr() - 0.5 * b.norm_sqr()).exp()
    }

    /// Reduced field density `c_nm <u_m|u_n>`.
    pub fn field_density(&self) -> Result<DensityOperator> {
        let d = self.field_dim();
        let m = DMatrix::from_fn(d, d, |n, m| self.coeffs[(n, m)] * self.overlap(m, n));
        DensityOperator::from_matrix_unchecked(vec![d], m)
    }

    /// Expand on `mirror_dim` mirror levels; the result is renormalized and
    /// the discarded weight reported.
    pub fn to_density(&self, mirror_dim: usize, tolerance: f64) -> Result<Truncated<DensityOperator>> {
        let (nf, nm) = (self.field_dim(), mirror_dim);
        let vecs: Vec<Vec<C64>> = self.amps.iter().map(|&u| coherent_amplitudes(u, nm)).collect();
        let mut rho = DMatrix::zeros(nf * nm, nf * nm);
        for n in 0..nf {
            for m in 0..nf {
                let c = self.coeffs[(n, m)];
                if c == C64::new(0.0, 0.0) {
                    continue;
                }
                for j in 0..nm {
                    for l in 0..nm {
                        rho[(n * nm + j, m * nm + l)] = c * vecs[n][j] * vecs[m][l].conj();
                    }
                }
            }
        }
        let trace: f64 = (0..nf * nm).map(|i| rho[(i, i)].re).sum();
        let full: f64 = (0..nf).map(|n| self.coeffs[(n, n)].re).sum();
        let loss = (1.0 - trace / full).max(0.0);
        if loss > tolerance {
            let worst = self.amps.iter().map(|u| u.norm()).fold(0.0, f64::max);
            return Err(Error::Truncation {
                what: "coherent-block state".into(),
                dim: nm,
                needed: coherent_dim(worst, tolerance),
                loss,
                tolerance,
            });
        }
        rho /= C64::new(trace, 0.0);
        Ok(Truncated { value: DensityOperator::from_matrix_unchecked(vec![nf, nm], rho)?, loss })
    }

    /// Exact evolution under `b†b − k n (b + b†)` in each block for `dt`.
    fn unitary_step(&mut self, k: f64, dt: f64) {
        let rot = C64::from_polar(1.0, -dt);
        let phases: Vec<f64> = self
            .amps
            .iter_mut()
            .enumerate()
            .map(|(n, u)| {
                let lambda = k * n as f64;
                let w = (*u - lambda) * rot + lambda;
                let phase = lambda * lambda * dt + lambda * (u.im - w.im);
                *u = w;
                phase
            })
            .collect();
        for n in 0..phases.len() {
            for m in 0..phases.len() {
                self.coeffs[(n, m)] *= C64::from_polar(1.0, phases[n] - phases[m]);
            }
        }
    }

    /// Exact zero-temperature amplitude damping of the mirror for `dt`:
    /// `|u><v| → <v|u>^{1−e^{−γdt}} |u e^{−γdt/2}><v e^{−γdt/2}|`.
    fn damping_step(&mut self, gamma: f64, dt: f64) {
        let lost = -(-gamma * dt).exp_m1();
        let d = self.field_dim();
        for n in 0..d {
            for m in 0..d {
                let (u, v) = (self.amps[n], self.amps[m]);
                let log_overlap = v.conj() * u - 0.5 * u.norm_sqr() - 0.5 * v.norm_sqr();
                self.coeffs[(n, m)] *= (log_overlap * lost).exp();
            }
        }
        let shrink = (-gamma * dt / 2.0).exp();
        for u in &mut self.amps {
            *u *= shrink;
        }
    }
}

/// Evolve for scaled time `t` in `steps` alternating unitary/damping steps
/// (interaction picture, `γ = params.gamma`).
pub fn trotter_evolve(
    state: &CoherentBlockState,
    params: &ScaledParams,
    t: f64,
    steps: usize,
) -> Result<CoherentBlockState> {
    params.validate()?;
    if steps == 0 {
        return Err(param_err("steps", "must be >= 1"));
    }
    let dt = t / steps as f64;
    let mut s = state.clone();
    for _ in 0..steps {
        s.unitary_step(params.k, dt);
        if params.gamma != 0.0 {
            s.damping_step(params.gamma, dt);
        }
    }
    Ok(s)
}
