//! Single-mode Fock-space building blocks: ladder matrices, coherent states,
//! displacement matrix elements and the truncation rule.

use nalgebra::{DMatrix, DVector};

use crate::error::{param_err, Error, Result};
use crate::state::StateVector;
use crate::C64;

/// Default bound on the probability lost to truncation before a constructor
/// refuses to renormalize.
pub const DEFAULT_TRUNCATION_TOL: f64 = 1e-10;

/// Default Poisson tail targeted by the automatic truncation rule.
pub const DEFAULT_TAIL: f64 = 1e-12;

/// A single oscillator mode in a tensor product.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ModeSpec {
    pub dim: usize,
    pub label: String,
}

impl ModeSpec {
    pub fn new(dim: usize, label: impl Into<String>) -> Result<Self> {
        if dim == 0 {
            return Err(param_err("dim", "truncation dimension must be >= 1"));
        }
        Ok(Self { dim, label: label.into() })
    }
}

/// A value built in a truncated basis together with the probability weight
/// that the truncation discarded before renormalization.
#[derive(Debug, Clone)]
pub struct Truncated<T> {
    pub value: T,
    pub loss: f64,
}

impl<T> Truncated<T> {
    pub fn into_inner(self) -> T {
        self.value
    }

    pub fn map<U>(self, f: impl FnOnce(T) -> U) -> Truncated<U> {
        Truncated { value: f(self.value), loss: self.loss }
    }
}

/// Truncation dimensions for a single field mode and the mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Truncation {
    pub field: usize,
    pub mirror: usize,
    pub tolerance: f64,
}

impl Truncation {
    pub fn new(field: usize, mirror: usize) -> Self {
        Self { field, mirror, tolerance: DEFAULT_TRUNCATION_TOL }
    }

    pub fn with_tolerance(mut self, tolerance: f64) -> Self {
        self.tolerance = tolerance;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.field == 0 || self.mirror == 0 {
            return Err(param_err("dims", "truncation dimensions must be >= 1"));
        }
        if !(self.tolerance >= 0.0) {
            return Err(param_err("tolerance", "must be >= 0"));
        }
        Ok(())
    }

    /// Automatic truncation for the undamped dynamics started from
    /// `|alpha> ⊗ |beta>`.
    ///
    /// The field dimension keeps the Poisson tail of `|alpha|²` below `tail`.
    /// The mirror dimension keeps the Poisson-weighted tail of every mirror
    /// component below `tail`; field level `n` drives the mirror to at most
    /// `|beta| + 2 k n`.
    pub fn for_coherent_dynamics(k: f64, alpha: C64, beta: C64, tail: f64) -> Self {
        let field = coherent_dim(alpha.norm(), tail);
        let weights: Vec<f64> =
            coherent_amplitudes(alpha, field).iter().map(|c| c.norm_sqr()).collect();
        let mut mirror = coherent_dim(beta.norm(), tail);
        loop {
            let lost: f64 = weights
                .iter()
                .enumerate()
                .map(|(n, w)| w * poisson_tail((beta.norm() + 2.0 * k * n as f64).powi(2), mirror))
                .sum();
            if lost < tail {
                break;
            }
            mirror += 1 + mirror / 16;
        }
        Self { field, mirror, tolerance: DEFAULT_TRUNCATION_TOL.max(10.0 * tail) }
    }
}

/// Poisson weights `e^{−mean} mean^n / n!` for `n = 0, 1, ...` until they
/// become negligible.
///
/// Built by the ratio recursion outward from the mode `n₀ = ⌊mean⌋` and
/// normalized by their own sum, so the full list sums to 1 to rounding and
/// no factorial or large exponent is ever formed.
fn poisson_weights(mean: f64) -> Vec<f64> {
    if mean == 0.0 {
        return vec![1.0];
    }
    let r = mean.sqrt();
    let n0 = mean.floor() as usize;
    // relative amplitudes sqrt(p_n / p_{n0})
    let mut rel = vec![0.0; n0 + 1];
    rel[n0] = 1.0;
    for n in (1..=n0).rev() {
        rel[n - 1] = rel[n] * (n as f64).sqrt() / r;
    }
    let mut n = n0;
    while rel[n] > 1e-170 {
        n += 1;
        rel.push(rel[n - 1] * r / (n as f64).sqrt());
    }
    let w: Vec<f64> = rel.iter().map(|a| a * a).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// `P(N >= dim)` for a Poisson distribution of the given mean.
pub fn poisson_tail(mean: f64, dim: usize) -> f64 {
    let w = poisson_weights(mean);
    // smallest terms first
    w.iter().skip(dim).rev().sum()
}

/// Smallest dimension whose coherent-state tail `P(N >= dim)` is below `tail`.
pub fn coherent_dim(amp_abs: f64, tail: f64) -> usize {
    let w = poisson_weights(amp_abs * amp_abs);
    let mut suffix = 0.0;
    let mut dim = w.len();
    for (n, p) in w.iter().enumerate().rev() {
        suffix += p;
        if suffix >= tail {
            break;
        }
        dim = n;
    }
    dim.max(1)
}

/// Annihilation operator: `<n-1| a |n> = sqrt(n)`.
pub fn annihilation(dim: usize) -> DMatrix<C64> {
    let mut a = DMatrix::zeros(dim, dim);
    for n in 1..dim {
        a[(n - 1, n)] = C64::new((n as f64).sqrt(), 0.0);
    }
    a
}

pub fn creation(dim: usize) -> DMatrix<C64> {
    annihilation(dim).adjoint()
}

/// Number operator, diagonal `0, 1, ..., dim-1`.
pub fn number(dim: usize) -> DMatrix<C64> {
    DMatrix::from_diagonal(&DVector::from_fn(dim, |n, _| C64::new(n as f64, 0.0)))
}

/// Fock amplitudes `e^{-|a|²/2} a^n / sqrt(n!)` for `n < dim`. Large
/// amplitudes neither overflow nor underflow (see [`poisson_weights`]).
pub fn coherent_amplitudes(amp: C64, dim: usize) -> Vec<C64> {
    let w = poisson_weights(amp.norm_sqr());
    let theta = amp.arg();
    (0..dim)
        .map(|n| match w.get(n) {
            Some(&p) if p > 0.0 => C64::from_polar(p.sqrt(), n as f64 * theta),
            _ => C64::new(0.0, 0.0),
        })
        .collect()
}

/// Truncated coherent state, renormalized; the discarded weight is reported.
pub fn coherent_state(amp: C64, dim: usize, tolerance: f64) -> Result<Truncated<StateVector>> {
    if dim == 0 {
        return Err(param_err("dim", "truncation dimension must be >= 1"));
    }
    let amps = coherent_amplitudes(amp, dim);
    let kept: f64 = amps.iter().map(|c| c.norm_sqr()).sum();
    let loss = (1.0 - kept).max(0.0);
    if loss > tolerance {
        return Err(Error::Truncation {
            what: format!("coherent state |{amp}>"),
            dim,
            needed: coherent_dim(amp.norm(), tolerance),
            loss,
            tolerance,
        });
    }
    let scale = 1.0 / kept.sqrt();
    let v = DVector::from_iterator(dim, amps.into_iter().map(|c| c * scale));
    Ok(Truncated { value: StateVector::new(vec![dim], v)?, loss })
}

/// Matrix elements `<m| D(amp) |n>` of the exact displacement operator,
/// restricted to the first `dim` Fock levels.
///
/// Columns follow `D|n+1> = (b† − amp*) D|n> / sqrt(n+1)`, which only couples
/// rows `m` and `m−1`, so every retained element is exact.
pub fn displacement(amp: C64, dim: usize) -> DMatrix<C64> {
    let mut d = DMatrix::zeros(dim, dim);
    if dim == 0 {
        return d;
    }
    for (m, c) in coherent_amplitudes(amp, dim).into_iter().enumerate() {
        d[(m, 0)] = c;
    }
    let conj = amp.conj();
    for n in 0..dim - 1 {
        let inv = 1.0 / ((n + 1) as f64).sqrt();
        for m in 0..dim {
            let raised = if m > 0 { d[(m - 1, n)] * (m as f64).sqrt() } else { C64::new(0.0, 0.0) };
            d[(m, n + 1)] = (raised - conj * d[(m, n)]) * inv;
        }
    }
    d
}
