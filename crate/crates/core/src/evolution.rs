//! Undamped dynamics in closed form.
//!
//! The propagator factorizes as
//! `U(t) = e^{−i r a†a t} e^{i k² (a†a)² (t − sin t)} e^{k a†a (η b† − η* b)} e^{−i b†b t}`
//! with `η = 1 − e^{−it}`. It is block diagonal in the photon number `n`, and
//! in block `n` the mirror sees a displacement of amplitude `k n η`. Starting
//! from `|α> ⊗ |β>` every field level `n` therefore drags the mirror into the
//! coherent state `φ_n(t) = β e^{−it} + k n (1 − e^{−it})`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::error::{param_err, Error, Result};
use crate::fock::{coherent_amplitudes, coherent_dim, displacement, Truncated, Truncation};
use crate::params::ScaledParams;
use crate::analysis::CoherentMixture;
use crate::decoherence::coherent_overlap;
use crate::state::{DensityOperator, StateVector};
use crate::{C64, ONE};

/// Whether the trivial free-field rotation `e^{−i r a†a t}` is kept.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Picture {
    /// Drop `e^{−i r a†a t}`; the mirror's own rotation is kept.
    #[default]
    Interaction,
    Full,
}

/// Scalars entering the factorized propagator at scaled time `t`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PropagatorFactors {
    pub t: f64,
    /// `η = 1 − e^{−it}`.
    pub eta: C64,
    /// `k² (t − sin t)`.
    pub kerr_phase_exponent: f64,
    /// `r t`.
    pub free_field_phase: f64,
}

impl PropagatorFactors {
    pub fn new(params: &ScaledParams, t: f64) -> Self {
        Self {
            t,
            eta: ONE - C64::from_polar(1.0, -t),
            kerr_phase_exponent: params.k * params.k * (t - t.sin()),
            free_field_phase: params.r * t,
        }
    }

    /// Phase multiplying photon-number block `n`.
    pub fn block_phase(&self, n: usize, picture: Picture) -> C64 {
        let nf = n as f64;
        let mut arg = self.kerr_phase_exponent * nf * nf;
        if picture == Picture::Full {
            arg -= self.free_field_phase * nf;
        }
        C64::from_polar(1.0, arg)
    }
}

/// `φ_n(t) = β e^{−it} + k n (1 − e^{−it})`.
pub fn mirror_amplitude(n: usize, params: &ScaledParams, t: f64) -> C64 {
    let rot = C64::from_polar(1.0, -t);
    params.beta * rot + params.k * n as f64 * (ONE - rot)
}

/// Phase picked up by the branch whose mirror is pushed by `kn`: acting with
/// `D(knη)` on the rotated `|β e^{−it}>` gives `e^{i Im(knη β* e^{it})} |φ_n>`.
/// Zero whenever `β = 0` or at the revivals.
pub fn branch_phase(kn: f64, beta: C64, t: f64) -> f64 {
    let rotated = beta * C64::from_polar(1.0, -t);
    (C64::new(kn, 0.0) * (ONE - C64::from_polar(1.0, -t)) * rotated.conj()).im
}

/// Linear entropy `1 − Σ p_n p_m e^{−|φ_n − φ_m|²} / (Σ p)²` of a mirror
/// left in `Σ_n √p_n e^{iχ_n} |n> ⊗ |φ_n>` (pure or dephased in `n` alike).
pub(crate) fn branch_linear_entropy(p: &[f64], phi: &[C64]) -> f64 {
    let total: f64 = p.iter().sum();
    let mut purity = 0.0;
    for (pn, fn_) in p.iter().zip(phi) {
        for (pm, fm) in p.iter().zip(phi) {
            purity += pn * pm * (-(fn_ - fm).norm_sqr()).exp();
        }
    }
    1.0 - purity / (total * total)
}

/// Linear entropy of the reduced mirror state of [`joint_state`] at `t`.
///
/// For a pure joint state the mirror and field purities coincide, and the
/// field's only needs the branch overlaps, so no mirror truncation enters.
pub fn mirror_entropy(params: &ScaledParams, t: f64, field_dim: usize) -> Result<f64> {
    params.validate()?;
    if field_dim == 0 {
        return Err(param_err("field_dim", "must be >= 1"));
    }
    let p: Vec<f64> = coherent_amplitudes(params.alpha, field_dim).iter().map(|c| c.norm_sqr()).collect();
    let phi: Vec<C64> = (0..field_dim).map(|n| mirror_amplitude(n, params, t)).collect();
    Ok(branch_linear_entropy(&p, &phi))
}

/// Reduced field state of [`joint_state`] at `t`, traced over the mirror
/// analytically: `ρ_nm = c_n c_m* e^{i(θ_n − θ_m)} <φ_m|φ_n>`. Only the field
/// truncation enters; the result is renormalized and the field loss returned.
pub fn field_density(params: &ScaledParams, t: f64, field_dim: usize) -> Result<Truncated<DensityOperator>> {
    params.validate()?;
    if field_dim == 0 {
        return Err(param_err("field_dim", "must be >= 1"));
    }
    let f = PropagatorFactors::new(params, t);
    let c: Vec<C64> = coherent_amplitudes(params.alpha, field_dim)
        .into_iter()
        .enumerate()
        .map(|(n, cn)| {
            cn * f.block_phase(n, Picture::Interaction)
                * C64::from_polar(1.0, branch_phase(params.k * n as f64, params.beta, t))
        })
        .collect();
    let phi: Vec<C64> = (0..field_dim).map(|n| mirror_amplitude(n, params, t)).collect();
    let mut rho = DMatrix::from_fn(field_dim, field_dim, |n, m| c[n] * c[m].conj() * coherent_overlap(phi[m], phi[n]));
    let trace: f64 = (0..field_dim).map(|i| rho[(i, i)].re).sum();
    rho /= C64::new(trace, 0.0);
    Ok(Truncated { value: DensityOperator::from_matrix_unchecked(vec![field_dim], rho)?, loss: (1.0 - trace).max(0.0) })
}

/// Reduced mirror state `Σ_n p_n |φ_n><φ_n|` of [`joint_state`] at `t` on
/// `mirror_dim` levels; `loss` is the discarded weight before renormalizing.
pub fn mirror_density(
    params: &ScaledParams,
    t: f64,
    field_dim: usize,
    mirror_dim: usize,
) -> Result<Truncated<DensityOperator>> {
    params.validate()?;
    if field_dim == 0 || mirror_dim == 0 {
        return Err(param_err("dims", "must be >= 1"));
    }
    let p: Vec<f64> = coherent_amplitudes(params.alpha, field_dim).iter().map(|c| c.norm_sqr()).collect();
    let mut rho = DMatrix::zeros(mirror_dim, mirror_dim);
    for (n, pn) in p.iter().enumerate() {
        let v = DVector::from_vec(coherent_amplitudes(mirror_amplitude(n, params, t), mirror_dim));
        rho += &v * v.adjoint() * C64::new(*pn, 0.0);
    }
    let trace: f64 = (0..mirror_dim).map(|i| rho[(i, i)].re).sum();
    rho /= C64::new(trace, 0.0);
    Ok(Truncated { value: DensityOperator::from_matrix_unchecked(vec![mirror_dim], rho)?, loss: (1.0 - trace).max(0.0) })
}

/// Reduced mirror state of [`joint_state`] at `t` as the exact mixture
/// `Σ_n p_n |φ_n><φ_n|`, with Poisson weights renormalized over `field_dim`.
pub fn mirror_mixture(params: &ScaledParams, t: f64, field_dim: usize) -> Result<CoherentMixture> {
    params.validate()?;
    if field_dim == 0 {
        return Err(param_err("field_dim", "must be >= 1"));
    }
    let p: Vec<f64> = coherent_amplitudes(params.alpha, field_dim).iter().map(|c| c.norm_sqr()).collect();
    let phi: Vec<C64> = (0..field_dim).map(|n| mirror_amplitude(n, params, t)).collect();
    CoherentMixture::mixture(phi, &p)?.normalized()
}

/// The factorized propagator on `field ⊗ mirror`, built block by block.
///
/// Each mirror block uses the exact matrix elements of the displacement
/// operator, so the result equals the first `trunc.mirror` mirror levels of
/// the untruncated propagator.
pub fn propagator_matrix(params: &ScaledParams, t: f64, trunc: &Truncation, picture: Picture) -> DMatrix<C64> {
    let (nf, nm) = (trunc.field, trunc.mirror);
    let f = PropagatorFactors::new(params, t);
    let rot: Vec<C64> = (0..nm).map(|j| C64::from_polar(1.0, -(j as f64) * t)).collect();
    let mut u = DMatrix::zeros(nf * nm, nf * nm);
    for n in 0..nf {
        let d = displacement(f.eta * (params.k * n as f64), nm);
        let phase = f.block_phase(n, picture);
        for i in 0..nm {
            for j in 0..nm {
                u[(n * nm + i, n * nm + j)] = phase * d[(i, j)] * rot[j];
            }
        }
    }
    u
}

fn truncation_error(what: String, dim: usize, needed: usize, loss: f64, tolerance: f64) -> Error {
    Error::Truncation { what, dim, needed, loss, tolerance }
}

/// Joint state `Σ_n c_n(α) e^{i k² n² (t − sin t)} e^{iχ_n} |n> ⊗ |φ_n(t)>`
/// in the interaction picture, renormalized on the truncated basis. `χ_n` is
/// the [`branch_phase`], which vanishes for a mirror starting in vacuum.
pub fn joint_state(params: &ScaledParams, t: f64, trunc: &Truncation) -> Result<Truncated<StateVector>> {
    joint_state_in(params, t, trunc, Picture::Interaction)
}

pub fn joint_state_in(
    params: &ScaledParams,
    t: f64,
    trunc: &Truncation,
    picture: Picture,
) -> Result<Truncated<StateVector>> {
    params.validate()?;
    trunc.validate()?;
    let (nf, nm) = (trunc.field, trunc.mirror);
    let f = PropagatorFactors::new(params, t);
    let field = coherent_amplitudes(params.alpha, nf);
    let mut amps = DVector::zeros(nf * nm);
    let mut worst = (0.0, 0usize);
    for (n, cn) in field.iter().enumerate() {
        let phi = mirror_amplitude(n, params, t);
        let weight = cn.norm_sqr();
        let mirror = coherent_amplitudes(phi, nm);
        let kept: f64 = mirror.iter().map(|z| z.norm_sqr()).sum();
        if weight * (1.0 - kept) > worst.0 {
            worst = (weight * (1.0 - kept), n);
        }
        let pre = cn * f.block_phase(n, picture) * C64::from_polar(1.0, branch_phase(params.k * n as f64, params.beta, t));
        for (j, mj) in mirror.into_iter().enumerate() {
            amps[n * nm + j] = pre * mj;
        }
    }
    let norm2 = amps.norm_squared();
    let loss = (1.0 - norm2).max(0.0);
    if loss > trunc.tolerance {
        let phi = mirror_amplitude(worst.1, params, t);
        let field_loss = 1.0 - field.iter().map(|z| z.norm_sqr()).sum::<f64>();
        let (what, dim, needed) = if field_loss > trunc.tolerance / 2.0 {
            ("field".to_string(), nf, coherent_dim(params.alpha.norm(), trunc.tolerance / 2.0))
        } else {
            (format!("mirror (|phi_{}| = {:.3})", worst.1, phi.norm()), nm, coherent_dim(phi.norm(), trunc.tolerance / 2.0))
        };
        return Err(truncation_error(what, dim, needed, loss, trunc.tolerance));
    }
    amps /= C64::new(norm2.sqrt(), 0.0);
    Ok(Truncated { value: StateVector::new(vec![nf, nm], amps)?, loss })
}

/// Several field modes sharing one mirror. Mode `j` has frequency
/// `η_j ω_1`, hence scaled coupling `k_j = η_j k_1`.
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodeConfig {
    pub etas: Vec<u32>,
    pub k1: f64,
    pub alphas: Vec<C64>,
    /// Exponent of the `(a_1 ⋯ a_N)^p` eigenstate construction, when the
    /// coupling was chosen as `2π k_1² = π / p`.
    pub p: Option<u32>,
}

impl MultimodeConfig {
    pub fn new(etas: Vec<u32>, k1: f64, alphas: Vec<C64>) -> Result<Self> {
        let cfg = Self { etas, k1, alphas, p: None };
        cfg.validate()?;
        Ok(cfg)
    }

    /// Coupling `k_1 = 1/sqrt(2p)`, for which the revival state is an
    /// eigenstate of `(a_1 ⋯ a_N)^p`.
    pub fn eigenstate(etas: Vec<u32>, alphas: Vec<C64>, p: u32) -> Result<Self> {
        if p == 0 {
            return Err(param_err("p", "must be >= 1"));
        }
        let mut cfg = Self::new(etas, (1.0 / (2.0 * p as f64)).sqrt(), alphas)?;
        cfg.p = Some(p);
        Ok(cfg)
    }

    pub fn validate(&self) -> Result<()> {
        if self.etas.is_empty() {
            return Err(param_err("etas", "need at least one field mode"));
        }
        if self.etas.len() != self.alphas.len() {
            return Err(param_err("alphas", format!("{} amplitudes for {} modes", self.alphas.len(), self.etas.len())));
        }
        if self.etas.contains(&0) {
            return Err(param_err("etas", "frequency multipliers must be positive integers"));
        }
        if !(self.k1.is_finite() && self.k1 >= 0.0) {
            return Err(param_err("k1", "must be finite and >= 0"));
        }
        Ok(())
    }

    pub fn n_modes(&self) -> usize {
        self.etas.len()
    }

    /// `Σ_j η_j n_j`, the excitation count the mirror responds to.
    pub fn weighted_count(&self, levels: &[usize]) -> f64 {
        self.etas.iter().zip(levels).map(|(&e, &n)| e as f64 * n as f64).sum()
    }
}

/// Truncation for [`multimode_joint_state`].
#[derive(Debug, Clone, PartialEq)]
pub struct MultimodeTruncation {
    pub field: Vec<usize>,
    pub mirror: usize,
    pub tolerance: f64,
}

/// Joint state of N field modes and the mirror at scaled time `t`.
///
/// Block `(n_1, …, n_N)` behaves like single-mode block `S = Σ η_j n_j` with
/// coupling `k_1`: Kerr phase `k_1² S² (t − sin t)` and mirror amplitude
/// `β e^{−it} + k_1 S (1 − e^{−it})`.
pub fn multimode_joint_state(
    config: &MultimodeConfig,
    beta: C64,
    t: f64,
    trunc: &MultimodeTruncation,
) -> Result<Truncated<StateVector>> {
    config.validate()?;
    if trunc.field.len() != config.n_modes() {
        return Err(Error::DimensionMismatch(format!(
            "{} field truncations for {} modes",
            trunc.field.len(),
            config.n_modes()
        )));
    }
    let single: Vec<Vec<C64>> =
        config.alphas.iter().zip(&trunc.field).map(|(&a, &d)| coherent_amplitudes(a, d)).collect();
    let rot = C64::from_polar(1.0, -t);
    let kerr = config.k1 * config.k1 * (t - t.sin());
    let nm = trunc.mirror;
    let mut dims = trunc.field.clone();
    dims.push(nm);
    let field_len: usize = trunc.field.iter().product();
    let mut amps = DVector::zeros(field_len * nm);
    let mut levels = vec![0usize; config.n_modes()];
    for block in 0..field_len {
        let mut rem = block;
        for m in (0..levels.len()).rev() {
            levels[m] = rem % trunc.field[m];
            rem /= trunc.field[m];
        }
        let s = config.weighted_count(&levels);
        let ks = config.k1 * s;
        let coeff = levels
            .iter()
            .enumerate()
            .fold(C64::from_polar(1.0, kerr * s * s + branch_phase(ks, beta, t)), |acc, (m, &n)| acc * single[m][n]);
        if coeff.norm() == 0.0 {
            continue;
        }
        let phi = beta * rot + (ONE - rot) * ks;
        for (j, mj) in coherent_amplitudes(phi, nm).into_iter().enumerate() {
            amps[block * nm + j] = coeff * mj;
        }
    }
    let norm2 = amps.norm_squared();
    let loss = (1.0 - norm2).max(0.0);
    if loss > trunc.tolerance {
        return Err(truncation_error(
            format!("multimode joint state ({} modes)", config.n_modes()),
            nm,
            nm + 1,
            loss,
            trunc.tolerance,
        ));
    }
    amps /= C64::new(norm2.sqrt(), 0.0);
    Ok(Truncated { value: StateVector::new(dims, amps)?, loss })
}

/// Field state of all modes at the revival `t = 2π`, where the mirror has
/// returned to `|β>`:
/// `Σ e^{i 2π k_1² (Σ η_j n_j)²} ∏_j α_j^{n_j}/sqrt(n_j!) |n_j>`, normalized.
pub fn revival_field_state(config: &MultimodeConfig, field_dims: &[usize]) -> Result<StateVector> {
    config.validate()?;
    if field_dims.len() != config.n_modes() {
        return Err(Error::DimensionMismatch(format!("{} dims for {} modes", field_dims.len(), config.n_modes())));
    }
    let single: Vec<Vec<C64>> =
        config.alphas.iter().zip(field_dims).map(|(&a, &d)| coherent_amplitudes(a, d)).collect();
    let two_pi_k2 = 2.0 * PI * config.k1 * config.k1;
    StateVector::from_fn(field_dims.to_vec(), |levels| {
        let s = config.weighted_count(levels);
        levels
            .iter()
            .enumerate()
            .fold(C64::from_polar(1.0, two_pi_k2 * s * s), |acc, (m, &n)| acc * single[m][n])
    })?
    .normalized()
}

/// State of mode 2 at the revival, conditioned on mode 1 holding `m` photons:
/// `Σ_n (α_2 e^{i 4π k_1² η_1 η_2 m})^n / sqrt(n!) e^{i 2π k_1² η_2² n²} |n>`.
pub fn conditional_mode_state(m: usize, config: &MultimodeConfig, dim: usize) -> Result<StateVector> {
    config.validate()?;
    if config.n_modes() != 2 {
        return Err(param_err("etas", "conditional state needs exactly two modes"));
    }
    let k2 = config.k1 * config.k1;
    let (e1, e2) = (config.etas[0] as f64, config.etas[1] as f64);
    let amp = config.alphas[1] * C64::from_polar(1.0, 4.0 * PI * k2 * e1 * e2 * m as f64);
    let base = coherent_amplitudes(amp, dim);
    let v = DVector::from_fn(dim, |n, _| {
        let nf = n as f64;
        base[n] * C64::from_polar(1.0, 2.0 * PI * k2 * e2 * e2 * nf * nf)
    });
    StateVector::new(vec![dim], v)?.normalized()
}
