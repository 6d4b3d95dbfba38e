//! The field states that appear at the revival `t = 2π`, and the
//! superpositions of coherent states they are equal to.

use std::f64::consts::PI;

use nalgebra::DVector;

use crate::error::{param_err, Error, Result};
use crate::evolution::MultimodeConfig;
use crate::fock::{coherent_amplitudes, coherent_dim, Truncated};
use crate::state::StateVector;
use crate::{C64, I, ONE};

/// `Σ_n c_n(α) e^{i 2π k² n²} |n>`, the field at the revival.
pub fn zeta_state(alpha: C64, k: f64, dim: usize, tolerance: f64) -> Result<Truncated<StateVector>> {
    if dim == 0 {
        return Err(param_err("dim", "truncation dimension must be >= 1"));
    }
    let amps = coherent_amplitudes(alpha, dim);
    let kept: f64 = amps.iter().map(|z| z.norm_sqr()).sum();
    let loss = (1.0 - kept).max(0.0);
    if loss > tolerance {
        return Err(Error::Truncation {
            what: format!("zeta state with alpha = {alpha}"),
            dim,
            needed: coherent_dim(alpha.norm(), tolerance),
            loss,
            tolerance,
        });
    }
    let scale = 1.0 / kept.sqrt();
    let two_pi_k2 = 2.0 * PI * k * k;
    let v = DVector::from_fn(dim, |n, _| {
        let nf = n as f64;
        amps[n] * C64::from_polar(scale, two_pi_k2 * nf * nf)
    });
    Ok(Truncated { value: StateVector::new(vec![dim], v)?, loss })
}

/// Superposition `Σ_i c_i |a_i>` of single-mode coherent states.
#[derive(Debug, Clone, PartialEq)]
pub struct CatSpec {
    pub components: Vec<(C64, C64)>,
}

impl CatSpec {
    pub fn new(components: Vec<(C64, C64)>) -> Result<Self> {
        if components.len() < 2 {
            return Err(param_err("components", "a cat needs at least two components"));
        }
        Ok(Self { components })
    }

    pub fn even(alpha: C64) -> Self {
        Self { components: vec![(ONE, alpha), (ONE, -alpha)] }
    }

    pub fn odd(alpha: C64) -> Self {
        Self { components: vec![(ONE, alpha), (-ONE, -alpha)] }
    }

    /// Revival state for `k = 1/2`: `((1+i)/2)|α> + ((1−i)/2)|−α>`.
    pub fn kerr_two(alpha: C64) -> Self {
        Self { components: vec![((ONE + I) * 0.5, alpha), ((ONE - I) * 0.5, -alpha)] }
    }

    /// Revival state for `k = 1/√6`:
    /// `|−α> + e^{i2π/3} |α e^{iπ/3}> + e^{i2π/3} |α e^{−iπ/3}>`.
    ///
    /// These coefficients solve `Σ_j c_j ω_j^n = e^{iπn²/3}` for the three
    /// cube roots `ω_j` of −1.
    pub fn kerr_three(alpha: C64) -> Self {
        let c = C64::from_polar(1.0, 2.0 * PI / 3.0);
        let w = C64::from_polar(1.0, PI / 3.0);
        Self { components: vec![(ONE, -alpha), (c, alpha * w), (c, alpha * w.conj())] }
    }

    /// The three-component coefficients in their commonly quoted form
    /// `c_1 = 1`, `c_2 = −c_3 = (1 + e^{iπ/3}) / (2i sin(π/3))`.
    ///
    /// This is *not* the `k = 1/√6` revival state (overlap ≈ 0.11 at α = 2);
    /// it is kept so the discrepancy stays testable. Use [`CatSpec::kerr_three`].
    pub fn kerr_three_as_printed(alpha: C64) -> Self {
        let w = C64::from_polar(1.0, PI / 3.0);
        let c2 = (ONE + w) / (I * 2.0 * (PI / 3.0).sin());
        Self { components: vec![(ONE, -alpha), (c2, alpha * w), (-c2, alpha * w.conj())] }
    }

    /// Revival state for `k = 1/(2√2)`:
    /// `(e^{iπ/4}/2)(|α> − |−α>) + ½(|iα> + |−iα>)`.
    pub fn kerr_four(alpha: C64) -> Self {
        let e = C64::from_polar(0.5, PI / 4.0);
        let h = C64::new(0.5, 0.0);
        Self { components: vec![(e, alpha), (-e, -alpha), (h, I * alpha), (h, -I * alpha)] }
    }
}

/// `Σ_i c_i |a_i>` in the first `dim` Fock levels, without normalization.
pub fn cat_superposition_unnormalized(spec: &CatSpec, dim: usize) -> StateVector {
    let mut v = DVector::zeros(dim);
    for &(coeff, amp) in &spec.components {
        for (n, a) in coherent_amplitudes(amp, dim).into_iter().enumerate() {
            v[n] += coeff * a;
        }
    }
    StateVector::new(vec![dim.max(1)], v).expect("dimension checked by caller")
}

/// Normalized `Σ_i c_i |a_i>`.
pub fn cat_superposition(spec: &CatSpec, dim: usize) -> Result<StateVector> {
    if spec.components.len() < 2 {
        return Err(param_err("components", "a cat needs at least two components"));
    }
    if dim == 0 {
        return Err(param_err("dim", "truncation dimension must be >= 1"));
    }
    let raw = cat_superposition_unnormalized(spec, dim);
    let scale: f64 = spec.components.iter().map(|(c, _)| c.norm()).sum();
    if raw.norm() <= 1e-12 * scale {
        return Err(Error::ZeroVector("cat components cancel".into()));
    }
    raw.normalized()
}

/// Superposition of products of coherent states, one amplitude per mode.
#[derive(Debug, Clone, PartialEq)]
pub struct EntangledCatSpec {
    pub terms: Vec<(C64, Vec<C64>)>,
}

impl EntangledCatSpec {
    /// Two-mode revival state for `k = 1/2`:
    /// `(1+i)|α_1>|α_2> + (1−i)|−α_1>|−α_2>`.
    pub fn two_mode_kerr(alpha1: C64, alpha2: C64) -> Self {
        Self { terms: vec![(ONE + I, vec![alpha1, alpha2]), (ONE - I, vec![-alpha1, -alpha2])] }
    }
}

/// Normalized `Σ_i c_i ⊗_j |a_ij>`.
pub fn entangled_cat(spec: &EntangledCatSpec, dims: &[usize]) -> Result<StateVector> {
    let mut total: Option<DVector<C64>> = None;
    for (coeff, amps) in &spec.terms {
        if amps.len() != dims.len() {
            return Err(Error::DimensionMismatch(format!("{} amplitudes for {} modes", amps.len(), dims.len())));
        }
        let per_mode: Vec<Vec<C64>> = amps.iter().zip(dims).map(|(&a, &d)| coherent_amplitudes(a, d)).collect();
        let term = StateVector::from_fn(dims.to_vec(), |lv| {
            lv.iter().enumerate().fold(*coeff, |acc, (m, &n)| acc * per_mode[m][n])
        })?
        .into_amplitudes();
        total = Some(match total {
            Some(t) => t + term,
            None => term,
        });
    }
    let v = total.ok_or_else(|| param_err("terms", "empty superposition"))?;
    StateVector::new(dims.to_vec(), v)?.normalized()
}

/// Outcome of [`eigenstate_residual`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct EigenResidual {
    /// `(α_1 ⋯ α_N)^p e^{iπ p (Σ η_j)²}` when the coupling satisfies
    /// `2π k_1² = π/p`; `None` otherwise.
    pub predicted: Option<C64>,
    /// `<ψ|O ψ> / <ψ|ψ>` on the guarded components.
    pub rayleigh: C64,
    /// `‖Oψ − λψ‖ / ‖λψ‖` on the guarded components, with `λ` the predicted
    /// eigenvalue (or the Rayleigh quotient when there is no prediction).
    pub relative_residual: f64,
    pub guarded_components: usize,
}

/// Apply `O = (a_1 a_2 ⋯ a_N)^p` and measure how far `state` is from an
/// eigenvector. Only output components with every `n_j ≤ dim_j − p − 1`
/// are compared; those read input levels `n_j + p` that exist in the
/// truncated state, so truncation does not pollute the check.
pub fn eigenstate_residual(state: &StateVector, config: &MultimodeConfig) -> Result<EigenResidual> {
    config.validate()?;
    let p = config.p.ok_or_else(|| param_err("p", "eigenstate check needs the exponent p"))? as usize;
    let dims = state.dims();
    if dims.len() != config.n_modes() {
        return Err(Error::DimensionMismatch(format!("state has {} modes, config {}", dims.len(), config.n_modes())));
    }
    if dims.iter().any(|&d| d < p + 1) {
        return Err(Error::GuardExhausted(format!("dims {dims:?} leave no levels below dim - p for p = {p}")));
    }
    let matched = (2.0 * PI * config.k1 * config.k1 - PI / p as f64).abs() < 1e-12;
    let predicted = matched.then(|| {
        let prod = config.alphas.iter().fold(ONE, |acc, a| acc * a);
        let e: f64 = config.etas.iter().map(|&e| e as f64).sum();
        prod.powu(p as u32) * C64::from_polar(1.0, PI * p as f64 * e * e)
    });

    let guard: Vec<usize> = dims.iter().map(|&d| d - p).collect();
    let count: usize = guard.iter().product();
    let mut applied = Vec::with_capacity(count);
    let mut original = Vec::with_capacity(count);
    let mut lv = vec![0usize; dims.len()];
    let mut shifted = vec![0usize; dims.len()];
    for idx in 0..count {
        let mut rem = idx;
        for m in (0..lv.len()).rev() {
            lv[m] = rem % guard[m];
            rem /= guard[m];
        }
        let mut factor = 1.0;
        for (m, &n) in lv.iter().enumerate() {
            shifted[m] = n + p;
            for j in n + 1..=n + p {
                factor *= (j as f64).sqrt();
            }
        }
        applied.push(state.amplitude(&shifted) * factor);
        original.push(state.amplitude(&lv));
    }
    let norm2: f64 = original.iter().map(|z| z.norm_sqr()).sum();
    if norm2 == 0.0 {
        return Err(Error::GuardExhausted("state vanishes on the guarded components".into()));
    }
    let rayleigh = original.iter().zip(&applied).map(|(o, a)| o.conj() * a).sum::<C64>() / norm2;
    let lambda = predicted.unwrap_or(rayleigh);
    let diff: f64 = applied.iter().zip(&original).map(|(a, o)| (a - lambda * o).norm_sqr()).sum();
    let denom = lambda.norm() * norm2.sqrt();
    let relative_residual = if denom > 0.0 { diff.sqrt() / denom } else { f64::INFINITY };
    Ok(EigenResidual { predicted, rayleigh, relative_residual, guarded_components: count })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::evolution::revival_field_state;
    use crate::metrics::fidelity;

    fn c(re: f64, im: f64) -> C64 {
        C64::new(re, im)
    }

    #[test]
    fn unit_k_gives_coherent_state() {
        let alpha = c(1.5, -0.5);
        let z = zeta_state(alpha, 1.0, 40, 1e-12).unwrap().value;
        let z0 = zeta_state(alpha, 0.0, 40, 1e-12).unwrap().value;
        let coh = crate::fock::coherent_state(alpha, 40, 1e-12).unwrap().value;
        assert!((z.amplitudes() - coh.amplitudes()).norm() < 1e-12);
        assert!((z0.amplitudes() - coh.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn kerr_cat_identities() {
        let alpha = c(2.0, 0.0);
        let dim = 40;
        let cases = [
            (0.5, CatSpec::kerr_two(alpha)),
            (1.0 / 6f64.sqrt(), CatSpec::kerr_three(alpha)),
            (1.0 / (2.0 * 2f64.sqrt()), CatSpec::kerr_four(alpha)),
        ];
        for (k, spec) in cases {
            let z = zeta_state(alpha, k, dim, 1e-12).unwrap().value;
            let cat = cat_superposition(&spec, dim).unwrap();
            assert!(fidelity(&z, &cat).unwrap() > 1.0 - 1e-10, "k = {k}");
        }
    }

    #[test]
    fn printed_three_component_coefficients_miss() {
        let alpha = c(2.0, 0.0);
        let z = zeta_state(alpha, 1.0 / 6f64.sqrt(), 40, 1e-12).unwrap().value;
        let cat = cat_superposition(&CatSpec::kerr_three_as_printed(alpha), 40).unwrap();
        let f = fidelity(&z, &cat).unwrap();
        assert!((f - 0.1117).abs() < 1e-3, "fidelity {f}");
    }

    #[test]
    fn even_cat_has_no_odd_photons() {
        let s = cat_superposition(&CatSpec::even(c(1.7, 0.4)), 30).unwrap();
        for n in (1..30).step_by(2) {
            assert!(s.amplitudes()[n].norm() < 1e-12);
        }
        let o = cat_superposition(&CatSpec::odd(c(1.7, 0.4)), 30).unwrap();
        for n in (0..30).step_by(2) {
            assert!(o.amplitudes()[n].norm() < 1e-12);
        }
    }

    #[test]
    fn cancelling_components_are_rejected() {
        let spec = CatSpec::new(vec![(ONE, c(1.0, 0.0)), (-ONE, c(1.0, 0.0))]).unwrap();
        assert!(matches!(cat_superposition(&spec, 20), Err(Error::ZeroVector(_))));
        assert!(CatSpec::new(vec![(ONE, c(1.0, 0.0))]).is_err());
    }

    #[test]
    fn two_mode_entangled_cat() {
        let (a1, a2) = (c(1.0, 0.0), c(0.8, 0.3));
        let cfg = MultimodeConfig::new(vec![1, 1], 0.5, vec![a1, a2]).unwrap();
        let dims = [24, 24];
        let rev = revival_field_state(&cfg, &dims).unwrap();
        let cat = entangled_cat(&EntangledCatSpec::two_mode_kerr(a1, a2), &dims).unwrap();
        assert!(fidelity(&rev, &cat).unwrap() > 1.0 - 1e-10);
    }

    #[test]
    fn eigenstate_of_pair_annihilation() {
        let alphas = vec![c(1.0, 0.0), c(1.0, 0.0)];
        let cfg = MultimodeConfig::eigenstate(vec![1, 1], alphas, 2).unwrap();
        let s = revival_field_state(&cfg, &[20, 20]).unwrap();
        let r = eigenstate_residual(&s, &cfg).unwrap();
        let lambda = r.predicted.unwrap();
        assert!((lambda - ONE).norm() < 1e-12);
        assert!(r.relative_residual < 1e-6, "{}", r.relative_residual);
        assert_eq!(r.guarded_components, 18 * 18);
    }

    #[test]
    fn single_mode_even_odd_eigenvalue() {
        let alpha = c(1.3, 0.0);
        let cfg = MultimodeConfig::eigenstate(vec![1], vec![alpha], 2).unwrap();
        let s = revival_field_state(&cfg, &[30]).unwrap();
        let r = eigenstate_residual(&s, &cfg).unwrap();
        let want = alpha * alpha * C64::from_polar(1.0, 2.0 * PI);
        assert!((r.predicted.unwrap() - want).norm() < 1e-12);
        assert!(r.relative_residual < 1e-10);
    }

    #[test]
    fn non_eigenstate_has_large_residual() {
        let cfg = MultimodeConfig::eigenstate(vec![1, 1], vec![c(1.0, 0.0), c(1.0, 0.0)], 2).unwrap();
        let s = StateVector::from_fn(vec![12, 12], |lv| {
            c(((lv[0] * 7 + lv[1] * 3) as f64).sin(), ((lv[0] + 5 * lv[1]) as f64).cos())
        })
        .unwrap()
        .normalized()
        .unwrap();
        let r = eigenstate_residual(&s, &cfg).unwrap();
        assert!(r.relative_residual > 0.1);
    }

    #[test]
    fn mismatched_coupling_makes_no_claim() {
        let mut cfg = MultimodeConfig::eigenstate(vec![1], vec![c(1.0, 0.0)], 2).unwrap();
        cfg.k1 = 0.3;
        let s = revival_field_state(&cfg, &[20]).unwrap();
        let r = eigenstate_residual(&s, &cfg).unwrap();
        assert!(r.predicted.is_none());
    }

    #[test]
    fn guard_exhausted() {
        let cfg = MultimodeConfig::eigenstate(vec![1], vec![c(1.0, 0.0)], 3).unwrap();
        let s = StateVector::basis(vec![3], &[0]).unwrap();
        assert!(matches!(eigenstate_residual(&s, &cfg), Err(Error::GuardExhausted(_))));
    }
}
