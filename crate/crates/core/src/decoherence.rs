//! Mirror damping at zero temperature.
//!
//! With the mirror starting in vacuum, the master equation
//! `dρ/dt = −i[H, ρ] + (γ/2)(2bρb† − b†bρ − ρb†b)` keeps the joint state in
//! the form
//! `ρ(t) = Σ_{n,m} c_n c_m* e^{iθ(t)(n²−m²)} e^{−D(n,m,γ,t)} |n><m| ⊗ |φ_n><φ_m|`
//! with damped mirror amplitudes `φ_n(γ,t) = ikn(1 − e^{−zt})/z`, `z = i + γ/2`.

use nalgebra::DMatrix;

use crate::analysis::CoherentMixture;
use crate::error::{param_err, Error, Result};
use crate::evolution::branch_linear_entropy;
use crate::fock::{coherent_amplitudes, coherent_dim, Truncated, Truncation};
use crate::params::{coupling_from_physical, PhysicalParams, ScaledParams};
use crate::state::DensityOperator;
use crate::{C64, I, ONE};

fn z(gamma: f64) -> C64 {
    C64::new(gamma / 2.0, 1.0)
}

/// `φ_n(γ,t) = ikn(1 − e^{−(i+γ/2)t}) / (i + γ/2)`.
pub fn damped_mirror_amplitude(n: usize, k: f64, gamma: f64, t: f64) -> C64 {
    let z = z(gamma);
    I * (k * n as f64) * (ONE - (-z * t).exp()) / z
}

/// `(1 − e^{−γt})/γ`, continuous at `γ = 0`.
fn relaxed_time(gamma: f64, t: f64) -> f64 {
    if gamma == 0.0 {
        t
    } else {
        -(-gamma * t).exp_m1() / gamma
    }
}

/// Decoherence exponent
/// `D = k²(n−m)² γ / (2(1+γ²/4)) · [t + (1−e^{−γt})/γ − 2 Re((e^{(i−γ/2)t} − 1)/(i − γ/2))]`,
/// equal to `(γ/2) ∫_0^t |φ_n − φ_m|² dt'`.
pub fn decoherence_exponent(n: usize, m: usize, k: f64, gamma: f64, t: f64) -> f64 {
    if n == m || gamma == 0.0 {
        return 0.0;
    }
    let d = n as f64 - m as f64;
    let w = C64::new(-gamma / 2.0, 1.0);
    let osc = ((w * t).exp() - ONE) / w;
    let bracket = t + relaxed_time(gamma, t) - 2.0 * osc.re;
    k * k * d * d * gamma / (2.0 * (1.0 + gamma * gamma / 4.0)) * bracket
}

/// How the Kerr-like phase `e^{iθ(n²−m²)}` of the damped solution is evaluated.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum PhaseModel {
    /// `θ = k² Re[(i/z)(t − (1 − e^{−zt})/z)]`, which solves the master
    /// equation for every `γ`.
    #[default]
    Exact,
    /// `θ = k²(t − sin t)`, the undamped value; only correct at `γ = 0`.
    Undamped,
}

/// `θ` such that block `(n, m)` carries the phase `e^{iθ(n²−m²)}`.
pub fn kerr_phase(k: f64, gamma: f64, t: f64, model: PhaseModel) -> f64 {
    match model {
        PhaseModel::Undamped => k * k * (t - t.sin()),
        PhaseModel::Exact => {
            let z = z(gamma);
            k * k * ((I / z) * (t - (ONE - (-z * t).exp()) / z)).re
        }
    }
}

fn require_vacuum_mirror(params: &ScaledParams) -> Result<()> {
    params.validate()?;
    if params.beta != C64::new(0.0, 0.0) {
        return Err(Error::UnsupportedState(format!(
            "the damped closed form needs the mirror to start in vacuum (beta = {})",
            params.beta
        )));
    }
    Ok(())
}

/// Joint field ⊗ mirror density at scaled time `t`, interaction picture.
///
/// Only `alpha`, `k` and `gamma` are used; `beta` must be 0. The result is
/// renormalized on the truncated basis and the discarded weight returned as
/// `loss`.
pub fn damped_density(params: &ScaledParams, t: f64, trunc: &Truncation) -> Result<Truncated<DensityOperator>> {
    damped_density_with(params, t, trunc, PhaseModel::Exact)
}

pub fn damped_density_with(
    params: &ScaledParams,
    t: f64,
    trunc: &Truncation,
    phase: PhaseModel,
) -> Result<Truncated<DensityOperator>> {
    require_vacuum_mirror(params)?;
    trunc.validate()?;
    let (nf, nm) = (trunc.field, trunc.mirror);
    let (k, gamma) = (params.k, params.gamma);
    let theta = kerr_phase(k, gamma, t, phase);
    let c = coherent_amplitudes(params.alpha, nf);
    let vecs: Vec<Vec<C64>> =
        (0..nf).map(|n| coherent_amplitudes(damped_mirror_amplitude(n, k, gamma, t), nm)).collect();

    let dim = nf * nm;
    let mut rho = DMatrix::zeros(dim, dim);
    for n in 0..nf {
        for m in 0..nf {
            let nn = (n * n) as f64 - (m * m) as f64;
            let amp = c[n] * c[m].conj()
                * C64::from_polar((-decoherence_exponent(n, m, k, gamma, t)).exp(), theta * nn);
            if amp == C64::new(0.0, 0.0) {
                continue;
            }
            for j in 0..nm {
                let left = amp * vecs[n][j];
                for l in 0..nm {
                    rho[(n * nm + j, m * nm + l)] = left * vecs[m][l].conj();
                }
            }
        }
    }
    let trace: f64 = (0..dim).map(|i| rho[(i, i)].re).sum();
    let loss = (1.0 - trace).max(0.0);
    if loss > trunc.tolerance {
        let worst = damped_mirror_amplitude(nf - 1, k, gamma, t).norm();
        return Err(Error::Truncation {
            what: format!("damped joint state (|phi_max| = {worst:.3})"),
            dim: nm,
            needed: coherent_dim(worst, trunc.tolerance / 2.0),
            loss,
            tolerance: trunc.tolerance,
        });
    }
    rho /= C64::new(trace, 0.0);
    Ok(Truncated { value: DensityOperator::from_matrix_unchecked(vec![nf, nm], rho)?, loss })
}

/// Overlap `<φ_m|φ_n>` of two normalized coherent states.
pub(crate) fn coherent_overlap(phi_m: C64, phi_n: C64) -> C64 {
    (phi_m.conj() * phi_n - 0.5 * phi_m.norm_sqr() - 0.5 * phi_n.norm_sqr()).exp()
}

/// Reduced field density of the damped solution. The mirror is traced out
/// analytically, so only the field truncation matters.
pub fn damped_field_density(
    params: &ScaledParams,
    t: f64,
    field_dim: usize,
    phase: PhaseModel,
) -> Result<Truncated<DensityOperator>> {
    require_vacuum_mirror(params)?;
    if field_dim == 0 {
        return Err(param_err("field_dim", "must be >= 1"));
    }
    let (k, gamma) = (params.k, params.gamma);
    let theta = kerr_phase(k, gamma, t, phase);
    let c = coherent_amplitudes(params.alpha, field_dim);
    let phi: Vec<C64> = (0..field_dim).map(|n| damped_mirror_amplitude(n, k, gamma, t)).collect();
    let mut rho = DMatrix::from_fn(field_dim, field_dim, |n, m| {
        let nn = (n * n) as f64 - (m * m) as f64;
        c[n] * c[m].conj()
            * C64::from_polar((-decoherence_exponent(n, m, k, gamma, t)).exp(), theta * nn)
            * coherent_overlap(phi[m], phi[n])
    });
    let trace: f64 = (0..field_dim).map(|i| rho[(i, i)].re).sum();
    rho /= C64::new(trace, 0.0);
    Ok(Truncated { value: DensityOperator::from_matrix_unchecked(vec![field_dim], rho)?, loss: (1.0 - trace).max(0.0) })
}

/// Linear entropy of the reduced mirror state,
/// `1 − Σ_{n,m} p_n p_m |<φ_n|φ_m>|²` with Poisson weights `p_n`.
///
/// Damping does not change the mirror's reduced state beyond the amplitudes
/// themselves, so this needs no mirror truncation at all.
pub fn damped_mirror_entropy(params: &ScaledParams, t: f64, field_dim: usize) -> Result<f64> {
    require_vacuum_mirror(params)?;
    let p: Vec<f64> = coherent_amplitudes(params.alpha, field_dim).iter().map(|c| c.norm_sqr()).collect();
    let phi: Vec<C64> = (0..field_dim).map(|n| damped_mirror_amplitude(n, params.k, params.gamma, t)).collect();
    Ok(branch_linear_entropy(&p, &phi))
}

/// Reduced mirror state under damping as the exact mixture
/// `Σ_n p_n |φ_n(γ,t)><φ_n(γ,t)|`.
pub fn damped_mirror_mixture(params: &ScaledParams, t: f64, field_dim: usize) -> Result<CoherentMixture> {
    require_vacuum_mirror(params)?;
    if field_dim == 0 {
        return Err(param_err("field_dim", "must be >= 1"));
    }
    let p: Vec<f64> = coherent_amplitudes(params.alpha, field_dim).iter().map(|c| c.norm_sqr()).collect();
    let phi: Vec<C64> = (0..field_dim).map(|n| damped_mirror_amplitude(n, params.k, params.gamma, t)).collect();
    CoherentMixture::mixture(phi, &p)?.normalized()
}

/// Absolute time (seconds) at which `D(0, 1)` first reaches 1 for mirror
/// damping rate `gamma_absolute` (s⁻¹). Returns `f64::INFINITY` when the
/// damping rate is zero.
///
/// For `t ≫ 1` the bracket of `D` grows like `2t`, so `τ_d ≈ ω_m / (k²Γ)`
/// in absolute units, and since `k ∝ ω_m^{−3/2}` this gives `τ_d ∝ ω_m³`.
pub fn decoherence_timescale(p: &PhysicalParams, gamma_absolute: f64) -> Result<f64> {
    if !(gamma_absolute.is_finite() && gamma_absolute >= 0.0) {
        return Err(param_err("gamma_absolute", "must be finite and >= 0"));
    }
    if gamma_absolute == 0.0 {
        return Ok(f64::INFINITY);
    }
    let c = coupling_from_physical(p)?;
    let gamma = gamma_absolute / p.omega_m;
    if c.k == 0.0 {
        return Ok(f64::INFINITY);
    }
    let f = |t: f64| decoherence_exponent(0, 1, c.k, gamma, t) - 1.0;
    // D is non-decreasing in t: bracket by doubling, then bisect.
    let mut hi = 1.0;
    while f(hi) < 0.0 {
        hi *= 2.0;
        if !hi.is_finite() {
            return Ok(f64::INFINITY);
        }
    }
    let mut lo = 0.0;
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if f(mid) < 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
        if hi - lo <= 1e-14 * hi {
            break;
        }
    }
    Ok(0.5 * (lo + hi) / p.omega_m)
}

/// `e^{−D(n,m,γ,π)}`: how much a coherence between field levels `n` and `m`
/// has shrunk by the usual measurement time `t = π`.
pub fn coherence_attenuation_at_measurement(n: usize, m: usize, k: f64, gamma: f64) -> f64 {
    (-decoherence_exponent(n, m, k, gamma, std::f64::consts::PI)).exp()
}
