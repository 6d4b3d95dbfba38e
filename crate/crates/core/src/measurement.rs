//! Conditional states from ideal quadrature measurements on the joint
//! field ⊗ mirror state.
//!
//! Position wavefunctions use `x = b + b†`, so `<x|0>` has variance 1 and a
//! coherent state `|φ>` has a Gaussian density centred at `2 Re φ`.

use std::f64::consts::PI;

use nalgebra::{DMatrix, DVector};

use crate::analysis::CoherentMixture;
use crate::decoherence::{coherent_overlap, damped_mirror_amplitude, decoherence_exponent, kerr_phase, PhaseModel};
use crate::error::{param_err, Error, Result};
use crate::evolution::{branch_phase, mirror_amplitude, PropagatorFactors};
use crate::fock::{coherent_amplitudes, coherent_dim};
use crate::params::ScaledParams;
use crate::state::{DensityOperator, StateVector};
use crate::C64;

/// Below this Born density an outcome is treated as impossible.
pub const MIN_OUTCOME_DENSITY: f64 = 1e-300;
/// Largest tolerated missing probability mass in [`outcome_density`].
pub const MASS_DEFICIT_TOL: f64 = 1e-3;

/// `<x|n>` for `n = 0..dim`.
pub fn hermite_position_amplitudes(x: f64, dim: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(dim);
    if dim == 0 {
        return out;
    }
    out.push((2.0 * PI).powf(-0.25) * (-x * x / 4.0).exp());
    if dim > 1 {
        out.push(x * out[0]);
    }
    for n in 1..dim.saturating_sub(1) {
        let next = (x * out[n] - (n as f64).sqrt() * out[n - 1]) / ((n + 1) as f64).sqrt();
        out.push(next);
    }
    out
}

/// `<x|n>`.
pub fn hermite_position_amplitude(x: f64, n: usize) -> f64 {
    hermite_position_amplitudes(x, n + 1)[n]
}

/// `<x|φ> = (2π)^{−1/4} exp(−x²/4 + xφ − φ²/2 − |φ|²/2)`, with the phase
/// convention of the Fock expansion.
pub fn coherent_position_amplitude(x: f64, phi: C64) -> C64 {
    let arg = -x * x / 4.0 + phi * x - phi * phi * 0.5 - phi.norm_sqr() * 0.5;
    arg.exp() * (2.0 * PI).powf(-0.25)
}

/// Which subsystem is measured.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Target {
    /// Mirror position `x = b + b†`; leaves a field state.
    MirrorPosition,
    /// Field quadrature `x = a + a†`; leaves a mirror state.
    FieldQuadrature,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeasurementRecord {
    pub target: Target,
    pub x: f64,
    pub t: f64,
    /// Born probability density of the outcome.
    pub norm: f64,
}

/// Normalized post-measurement state of the unmeasured subsystem.
#[derive(Debug, Clone, PartialEq)]
pub struct Projection {
    pub state: StateVector,
    pub record: MeasurementRecord,
}

fn split_dims(joint: &StateVector) -> Result<(usize, usize)> {
    match joint.dims() {
        [f, m] => Ok((*f, *m)),
        d => Err(Error::DimensionMismatch(format!("expected field ⊗ mirror, got dims {d:?}"))),
    }
}

fn unmeasured_amplitudes(joint: &StateVector, target: Target, x: f64) -> Result<DVector<C64>> {
    let (nf, nm) = split_dims(joint)?;
    let psi = joint.amplitudes();
    Ok(match target {
        Target::MirrorPosition => {
            let h = hermite_position_amplitudes(x, nm);
            DVector::from_fn(nf, |n, _| (0..nm).map(|j| psi[n * nm + j] * h[j]).sum())
        }
        Target::FieldQuadrature => {
            let h = hermite_position_amplitudes(x, nf);
            DVector::from_fn(nm, |j, _| (0..nf).map(|n| psi[n * nm + j] * h[n]).sum())
        }
    })
}

fn finish(amps: DVector<C64>, dim: usize, target: Target, x: f64, t: f64, joint_norm2: f64) -> Result<Projection> {
    let density = amps.norm_squared() / joint_norm2;
    if !(density > MIN_OUTCOME_DENSITY) {
        return Err(Error::ZeroProbability { x, density });
    }
    let state = StateVector::new(vec![dim], amps)?.normalized()?;
    Ok(Projection { state, record: MeasurementRecord { target, x, t, norm: density } })
}

fn project(joint: &StateVector, target: Target, x: f64, t: f64) -> Result<Projection> {
    let (nf, nm) = split_dims(joint)?;
    let amps = unmeasured_amplitudes(joint, target, x)?;
    let dim = if target == Target::MirrorPosition { nf } else { nm };
    finish(amps, dim, target, x, t, joint.amplitudes().norm_squared())
}

/// Project the mirror onto position `x`; `t` is recorded only.
pub fn project_mirror_position(joint: &StateVector, x: f64, t: f64) -> Result<Projection> {
    project(joint, Target::MirrorPosition, x, t)
}

/// Project the field onto quadrature value `x`; `t` is recorded only.
pub fn project_field_quadrature(joint: &StateVector, x: f64, t: f64) -> Result<Projection> {
    project(joint, Target::FieldQuadrature, x, t)
}

fn field_weights(params: &ScaledParams, t: f64, field_dim: usize) -> Vec<C64> {
    let f = PropagatorFactors::new(params, t);
    coherent_amplitudes(params.alpha, field_dim)
        .into_iter()
        .enumerate()
        .map(|(n, c)| {
            c * f.block_phase(n, Default::default()) * C64::from_polar(1.0, branch_phase(params.k * n as f64, params.beta, t))
        })
        .collect()
}

/// Field state after finding the mirror at `x`, evaluated in closed form:
/// amplitudes `c_n e^{ik²n²(t − sin t)} e^{iχ_n} <x|φ_n(t)>`. Exact in the mirror, so
/// only the field truncation `field_dim` matters.
pub fn near_fock_state(params: &ScaledParams, x: f64, t: f64, field_dim: usize) -> Result<Projection> {
    params.validate()?;
    if field_dim == 0 {
        return Err(param_err("field_dim", "must be >= 1"));
    }
    let w = field_weights(params, t, field_dim);
    let amps = DVector::from_fn(field_dim, |n, _| w[n] * coherent_position_amplitude(x, mirror_amplitude(n, params, t)));
    let norm2: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    finish(amps, field_dim, Target::MirrorPosition, x, t, norm2)
}

/// Mirror state after finding the field quadrature at `x`:
/// `Σ_n c_n e^{ik²n²(t − sin t)} <x|n> |φ_n(t)>`, built on `mirror_dim`
/// levels. Fails if a contributing `|φ_n>` leaks more than `tolerance`.
pub fn mirror_cat_state(
    params: &ScaledParams,
    x: f64,
    t: f64,
    field_dim: usize,
    mirror_dim: usize,
    tolerance: f64,
) -> Result<Projection> {
    params.validate()?;
    if field_dim == 0 || mirror_dim == 0 {
        return Err(param_err("dims", "must be >= 1"));
    }
    let w = field_weights(params, t, field_dim);
    let h = hermite_position_amplitudes(x, field_dim);
    let mut amps = DVector::zeros(mirror_dim);
    for n in 0..field_dim {
        let coeff = w[n] * h[n];
        if coeff == C64::new(0.0, 0.0) {
            continue;
        }
        let phi = mirror_amplitude(n, params, t);
        let mirror = coherent_amplitudes(phi, mirror_dim);
        let kept: f64 = mirror.iter().map(|z| z.norm_sqr()).sum();
        if coeff.norm_sqr() * (1.0 - kept) > tolerance {
            return Err(Error::Truncation {
                what: format!("mirror component |phi_{n}| = {:.3}", phi.norm()),
                dim: mirror_dim,
                needed: coherent_dim(phi.norm(), tolerance),
                loss: 1.0 - kept,
                tolerance,
            });
        }
        for (j, m) in mirror.into_iter().enumerate() {
            amps[j] += coeff * m;
        }
    }
    let norm2: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    finish(amps, mirror_dim, Target::FieldQuadrature, x, t, norm2)
}

/// Mixed mirror state after a field-quadrature outcome `x` under damping
/// (mirror starting in vacuum): coherences between branches `n, m` are
/// multiplied by `e^{−D(n,m,γ,t)}`.
pub fn damped_mirror_cat(
    params: &ScaledParams,
    x: f64,
    t: f64,
    field_dim: usize,
    mirror_dim: usize,
) -> Result<(DensityOperator, MeasurementRecord)> {
    params.validate()?;
    if params.beta != C64::new(0.0, 0.0) {
        return Err(Error::UnsupportedState("damped mirror cat needs beta = 0".into()));
    }
    let (k, gamma) = (params.k, params.gamma);
    let theta = kerr_phase(k, gamma, t, PhaseModel::Exact);
    let h = hermite_position_amplitudes(x, field_dim);
    let c = coherent_amplitudes(params.alpha, field_dim);
    let f: Vec<C64> = (0..field_dim)
        .map(|n| c[n] * h[n] * C64::from_polar(1.0, theta * (n * n) as f64))
        .collect();
    let phi: Vec<C64> = (0..field_dim).map(|n| damped_mirror_amplitude(n, k, gamma, t)).collect();
    let vecs: Vec<DVector<C64>> = phi.iter().map(|&p| DVector::from_vec(coherent_amplitudes(p, mirror_dim))).collect();
    let mut rho = DMatrix::zeros(mirror_dim, mirror_dim);
    let mut density = 0.0;
    for n in 0..field_dim {
        for m in 0..field_dim {
            let w = f[n] * f[m].conj() * (-decoherence_exponent(n, m, k, gamma, t)).exp();
            if w == C64::new(0.0, 0.0) {
                continue;
            }
            density += (w * coherent_overlap(phi[m], phi[n])).re;
            rho += &vecs[n] * vecs[m].adjoint() * w;
        }
    }
    density /= c.iter().map(|z| z.norm_sqr()).sum::<f64>();
    if !(density > MIN_OUTCOME_DENSITY) {
        return Err(Error::ZeroProbability { x, density });
    }
    let trace: f64 = rho.diagonal().iter().map(|z| z.re).sum();
    rho /= C64::new(trace, 0.0);
    let record = MeasurementRecord { target: Target::FieldQuadrature, x, t, norm: density };
    Ok((DensityOperator::from_matrix_unchecked(vec![mirror_dim], rho)?, record))
}

fn cat_record(state: CoherentMixture, x: f64, t: f64, joint_norm2: f64) -> Result<(CoherentMixture, MeasurementRecord)> {
    let density = state.trace() / joint_norm2;
    if !(density > MIN_OUTCOME_DENSITY) {
        return Err(Error::ZeroProbability { x, density });
    }
    let record = MeasurementRecord { target: Target::FieldQuadrature, x, t, norm: density };
    Ok((state.normalized()?, record))
}

/// [`mirror_cat_state`] as an exact superposition of the coherent branches
/// `|φ_n(t)>`, with no mirror truncation.
pub fn mirror_cat_mixture(
    params: &ScaledParams,
    x: f64,
    t: f64,
    field_dim: usize,
) -> Result<(CoherentMixture, MeasurementRecord)> {
    params.validate()?;
    if field_dim == 0 {
        return Err(param_err("field_dim", "must be >= 1"));
    }
    let w = field_weights(params, t, field_dim);
    let h = hermite_position_amplitudes(x, field_dim);
    let coeffs: Vec<C64> = w.iter().zip(&h).map(|(w, h)| w * h).collect();
    let phi: Vec<C64> = (0..field_dim).map(|n| mirror_amplitude(n, params, t)).collect();
    let norm2: f64 = w.iter().map(|c| c.norm_sqr()).sum();
    cat_record(CoherentMixture::pure(phi, &coeffs)?, x, t, norm2)
}

/// [`damped_mirror_cat`] as an exact operator on the damped coherent
/// branches, with no mirror truncation.
pub fn damped_mirror_cat_mixture(
    params: &ScaledParams,
    x: f64,
    t: f64,
    field_dim: usize,
) -> Result<(CoherentMixture, MeasurementRecord)> {
    params.validate()?;
    if params.beta != C64::new(0.0, 0.0) {
        return Err(Error::UnsupportedState("damped mirror cat needs beta = 0".into()));
    }
    if field_dim == 0 {
        return Err(param_err("field_dim", "must be >= 1"));
    }
    let (k, gamma) = (params.k, params.gamma);
    let theta = kerr_phase(k, gamma, t, PhaseModel::Exact);
    let h = hermite_position_amplitudes(x, field_dim);
    let c = coherent_amplitudes(params.alpha, field_dim);
    let f: Vec<C64> = (0..field_dim)
        .map(|n| c[n] * h[n] * C64::from_polar(1.0, theta * (n * n) as f64))
        .collect();
    let phi: Vec<C64> = (0..field_dim).map(|n| damped_mirror_amplitude(n, k, gamma, t)).collect();
    let coeffs = DMatrix::from_fn(field_dim, field_dim, |n, m| {
        f[n] * f[m].conj() * (-decoherence_exponent(n, m, k, gamma, t)).exp()
    });
    let norm2: f64 = c.iter().map(|z| z.norm_sqr()).sum();
    cat_record(CoherentMixture::new(phi, coeffs)?, x, t, norm2)
}

fn check_grid(xs: &[f64]) -> Result<()> {
    if xs.len() < 2 || xs.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(param_err("grid", "need at least two strictly increasing points"));
    }
    Ok(())
}

fn trapezoid(xs: &[f64], ys: &[f64]) -> f64 {
    xs.windows(2).zip(ys.windows(2)).map(|(x, y)| 0.5 * (x[1] - x[0]) * (y[0] + y[1])).sum()
}

fn checked_density(xs: &[f64], density: Vec<f64>) -> Result<Vec<f64>> {
    let deficit = 1.0 - trapezoid(xs, &density);
    if deficit > MASS_DEFICIT_TOL {
        return Err(Error::GridTooNarrow { deficit });
    }
    Ok(density)
}

/// Born density of outcome `x` for each grid point, for either target.
/// Errors with [`Error::GridTooNarrow`] if the grid misses more than
/// [`MASS_DEFICIT_TOL`] of the probability.
pub fn outcome_density(joint: &StateVector, target: Target, xs: &[f64]) -> Result<Vec<f64>> {
    check_grid(xs)?;
    let norm2 = joint.amplitudes().norm_squared();
    let density = xs
        .iter()
        .map(|&x| Ok(unmeasured_amplitudes(joint, target, x)?.norm_squared() / norm2))
        .collect::<Result<Vec<_>>>()?;
    checked_density(xs, density)
}

/// Mirror-position density `Σ_n |c_n|² |<x|φ_n(t)>|²` in closed form.
pub fn mirror_position_density(params: &ScaledParams, t: f64, field_dim: usize, xs: &[f64]) -> Result<Vec<f64>> {
    params.validate()?;
    check_grid(xs)?;
    let p: Vec<f64> = coherent_amplitudes(params.alpha, field_dim).iter().map(|c| c.norm_sqr()).collect();
    let total: f64 = p.iter().sum();
    let phi: Vec<C64> = (0..field_dim).map(|n| mirror_amplitude(n, params, t)).collect();
    let density = xs
        .iter()
        .map(|&x| p.iter().zip(&phi).map(|(pn, &f)| pn * coherent_position_amplitude(x, f).norm_sqr()).sum::<f64>() / total)
        .collect();
    checked_density(xs, density)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::joint_state;
    use crate::fock::{coherent_state, Truncation};
    use crate::metrics::fidelity;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    fn grid(a: f64, b: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| a + (b - a) * i as f64 / (n - 1) as f64).collect()
    }

    #[test]
    fn cat_mixtures_match_fock_constructions() {
        let p = ScaledParams::new(0.3, c(1.2, 0.0), c(0.0, 0.0)).unwrap();
        let t = 2.1;
        let pure = mirror_cat_state(&p, 0.4, t, 14, 80, 1e-12).unwrap();
        let (mix, record) = mirror_cat_mixture(&p, 0.4, t, 14).unwrap();
        assert!((record.norm - pure.record.norm).abs() < 1e-12);
        let rho = mix.to_density(80).unwrap().value;
        assert!((fidelity(&pure.state, &rho).unwrap() - 1.0).abs() < 1e-10);

        let damped = p.with_gamma(0.3).unwrap();
        let (fock, r1) = damped_mirror_cat(&damped, -0.5, t, 14, 80).unwrap();
        let (mix, r2) = damped_mirror_cat_mixture(&damped, -0.5, t, 14).unwrap();
        assert!((r1.norm - r2.norm).abs() < 1e-12);
        let rho = mix.to_density(80).unwrap().value;
        assert!((fock.matrix() - rho.matrix()).camax() < 1e-10);
    }

    #[test]
    fn hermite_functions_are_orthonormal() {
        let xs = grid(-20.0, 20.0, 8001);
        let h: Vec<Vec<f64>> = xs.iter().map(|&x| hermite_position_amplitudes(x, 11)).collect();
        for n in 0..11 {
            for m in 0..11 {
                let ys: Vec<f64> = h.iter().map(|v| v[n] * v[m]).collect();
                let want = if n == m { 1.0 } else { 0.0 };
                assert!((trapezoid(&xs, &ys) - want).abs() < 1e-8, "({n}, {m})");
            }
        }
        assert_eq!(hermite_position_amplitude(0.0, 1), 0.0);
    }

    #[test]
    fn hermite_series_reproduces_coherent_wavefunction() {
        let phi = c(1.2, -0.7);
        let amps = coherent_amplitudes(phi, 60);
        for x in [-3.0, -0.5, 0.0, 1.1, 2.4, 5.0] {
            let h = hermite_position_amplitudes(x, 60);
            let series: C64 = amps.iter().zip(&h).map(|(a, hn)| a * hn).sum();
            let closed = coherent_position_amplitude(x, phi);
            assert!((series - closed).norm() < 1e-8, "x = {x}");
            let gauss = (2.0 * PI).powf(-0.5) * (-(x - 2.0 * phi.re).powi(2) / 2.0).exp();
            assert!((closed.norm_sqr() - gauss).abs() < 1e-12);
        }
    }

    fn fig4_params() -> ScaledParams {
        ScaledParams::new(1.0, c(2.0, 0.0), c(2.0, 0.0)).unwrap()
    }

    #[test]
    fn near_fock_at_origin() {
        let proj = near_fock_state(&fig4_params(), 0.0, PI, 30).unwrap();
        let one = StateVector::basis(vec![30], &[1]).unwrap();
        assert!(fidelity(&proj.state, &one).unwrap() > 0.999);
        // coefficient ratios of the unnormalized state: e^{-4} : -2 : 2√2 e^{-4}
        let a = proj.state.amplitudes();
        assert!(((a[0] / a[1]).re + (-4.0f64).exp() / 2.0).abs() < 1e-6);
        assert!(((a[2] / a[1]).re + 2f64.sqrt() * (-4.0f64).exp()).abs() < 1e-6);
    }

    #[test]
    fn midpoint_gives_two_level_superposition() {
        let proj = near_fock_state(&fig4_params(), 2.0, PI, 30).unwrap();
        let a = proj.state.amplitudes();
        let w1 = a[1].norm_sqr();
        let w2 = a[2].norm_sqr();
        assert!(w1 + w2 > 0.99);
        // −2|1> + 2√2|2>
        assert!(((a[2] / a[1]).re + 2f64.sqrt()).abs() < 1e-6);
    }

    #[test]
    fn closed_form_matches_joint_projection() {
        let p = fig4_params();
        let trunc = Truncation::for_coherent_dynamics(p.k, p.alpha, p.beta, 1e-14);
        let joint = joint_state(&p, PI, &trunc).unwrap().value;
        for x in [0.0, 2.0, 8.0, 16.0] {
            let a = project_mirror_position(&joint, x, PI).unwrap();
            let b = near_fock_state(&p, x, PI, trunc.field).unwrap();
            assert!(fidelity(&a.state, &b.state).unwrap() > 1.0 - 1e-10, "x = {x}");
            assert!((a.record.norm / b.record.norm - 1.0).abs() < 1e-6);
        }
    }

    #[test]
    fn mirror_cat_closed_form_matches_projection() {
        let p = ScaledParams::new(1.0, c(0.8, 0.0), c(2.0, 0.0)).unwrap();
        let trunc = Truncation::for_coherent_dynamics(p.k, p.alpha, p.beta, 1e-14);
        let joint = joint_state(&p, PI, &trunc).unwrap().value;
        let a = project_field_quadrature(&joint, 0.0, PI).unwrap();
        let b = mirror_cat_state(&p, 0.0, PI, trunc.field, trunc.mirror, 1e-10).unwrap();
        assert!(fidelity(&a.state, &b.state).unwrap() > 1.0 - 1e-10);
        assert!((a.state.norm() - 1.0).abs() < 1e-10);
    }

    #[test]
    fn vacuum_field_leaves_coherent_mirror() {
        let p = ScaledParams::new(1.0, c(0.0, 0.0), c(2.0, 0.0)).unwrap();
        let b = mirror_cat_state(&p, 0.3, PI, 5, 40, 1e-12).unwrap();
        let coh = coherent_state(mirror_amplitude(0, &p, PI), 40, 1e-12).unwrap().value;
        assert!(fidelity(&b.state, &coh).unwrap() > 1.0 - 1e-12);
    }

    #[test]
    fn position_density_peaks_and_mass() {
        let p = fig4_params();
        let xs = grid(-12.0, 100.0, 5601);
        let d = mirror_position_density(&p, PI, 30, &xs).unwrap();
        assert!((trapezoid(&xs, &d) - 1.0).abs() < 1e-6);
        // branches sit at x_n = 4n − 4; the Poisson(4) weights peak at n = 3, 4
        let imax = d.iter().enumerate().max_by(|a, b| a.1.total_cmp(b.1)).unwrap().0;
        let xmax = xs[imax];
        assert!((xmax - 8.0).abs() < 0.1 || (xmax - 12.0).abs() < 0.1, "peak at {xmax}");
        let narrow = grid(-2.0, 2.0, 101);
        assert!(matches!(mirror_position_density(&p, PI, 30, &narrow), Err(Error::GridTooNarrow { .. })));
    }

    #[test]
    fn outcome_density_of_product_state() {
        let field = StateVector::basis(vec![3], &[0]).unwrap();
        let mirror = coherent_state(c(1.5, 0.2), 40, 1e-12).unwrap().value;
        let joint = field.tensor(&mirror);
        let xs = grid(-10.0, 14.0, 1201);
        let d = outcome_density(&joint, Target::MirrorPosition, &xs).unwrap();
        assert!((trapezoid(&xs, &d) - 1.0).abs() < 1e-6);
        for (x, v) in xs.iter().zip(&d) {
            let g = (2.0 * PI).powf(-0.5) * (-(x - 3.0).powi(2) / 2.0).exp();
            assert!((v - g).abs() < 1e-10);
        }
    }

    #[test]
    fn impossible_outcome() {
        let joint = StateVector::basis(vec![2, 2], &[1, 1]).unwrap();
        let err = project_mirror_position(&joint, 0.0, 0.0).unwrap_err();
        assert!(matches!(err, Error::ZeroProbability { .. }));
    }

    #[test]
    fn damped_cat_reduces_to_pure_cat() {
        let p = ScaledParams::new(0.3, c(0.8, 0.0), c(0.0, 0.0)).unwrap();
        let pure = mirror_cat_state(&p, 0.0, PI, 10, 70, 1e-12).unwrap();
        let (rho, rec) = damped_mirror_cat(&p, 0.0, PI, 10, 70).unwrap();
        assert!(fidelity(&pure.state, &rho).unwrap() > 1.0 - 1e-10);
        assert!((rec.norm - pure.record.norm).abs() < 1e-10);
        let damped = damped_mirror_cat(&p.with_gamma(0.5).unwrap(), 0.0, PI, 10, 70).unwrap().0;
        assert!(damped.purity() < 1.0 - 1e-3);
    }
}
