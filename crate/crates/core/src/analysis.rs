//! Phase-space and entropy diagnostics.
//!
//! Wigner functions use `x = a + a†`, `y = −i(a − a†)`, so the vacuum is
//! `W = e^{−(x²+y²)/2} / 2π` and `∫∫ W dx dy = 1`.

use crate::decoherence::damped_mirror_entropy;
use crate::error::{param_err, Error, Result};
use crate::evolution::mirror_entropy;
use crate::decoherence::coherent_overlap;
use crate::fock::{coherent_amplitudes, Truncated, Truncation};
use crate::metrics::StateRef;
use crate::params::ScaledParams;
use crate::state::DensityOperator;
use crate::C64;

use nalgebra::{DMatrix, DVector};

/// Largest tolerated `|1 − ∫∫W|` before a grid counts as too narrow.
pub const WIGNER_MASS_TOL: f64 = 1e-2;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct GridSpec {
    pub x_min: f64,
    pub x_max: f64,
    pub nx: usize,
    pub y_min: f64,
    pub y_max: f64,
    pub ny: usize,
}

impl Default for GridSpec {
    fn default() -> Self {
        Self { x_min: -6.0, x_max: 6.0, nx: 121, y_min: -6.0, y_max: 6.0, ny: 121 }
    }
}

impl GridSpec {
    pub fn square(half_width: f64, points: usize) -> Self {
        Self { x_min: -half_width, x_max: half_width, nx: points, y_min: -half_width, y_max: half_width, ny: points }
    }

    pub fn validate(&self) -> Result<()> {
        if self.nx < 2 || self.ny < 2 || !(self.x_max > self.x_min) || !(self.y_max > self.y_min) {
            return Err(param_err("grid", "need at least 2 points per axis on a non-empty range"));
        }
        Ok(())
    }

    fn axis(min: f64, max: f64, n: usize) -> Vec<f64> {
        (0..n).map(|i| min + (max - min) * i as f64 / (n - 1) as f64).collect()
    }

    /// Same spacing, every side pushed out by `factor` of the half-width.
    fn widened(&self, factor: f64) -> Self {
        let grow = |min: f64, max: f64, n: usize| {
            let step = (max - min) / (n - 1) as f64;
            let (c, half) = (0.5 * (min + max), 0.5 * (max - min) * factor);
            let n_new = ((2.0 * half / step).round() as usize) + 1;
            (c - half, c + half, n_new)
        };
        let (x_min, x_max, nx) = grow(self.x_min, self.x_max, self.nx);
        let (y_min, y_max, ny) = grow(self.y_min, self.y_max, self.ny);
        Self { x_min, x_max, nx, y_min, y_max, ny }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct WignerGrid {
    pub x: Vec<f64>,
    pub y: Vec<f64>,
    /// `values[(i, j)] = W(x[i], y[j])`.
    pub values: DMatrix<f64>,
}

impl WignerGrid {
    /// Trapezoid-rule integral over the grid.
    pub fn integral(&self) -> f64 {
        let wx = trapezoid_weights(&self.x);
        let wy = trapezoid_weights(&self.y);
        let mut s = 0.0;
        for (i, a) in wx.iter().enumerate() {
            for (j, b) in wy.iter().enumerate() {
                s += a * b * self.values[(i, j)];
            }
        }
        s
    }

    /// `∫ W(x, y) dy` for every `x`.
    pub fn x_marginal(&self) -> Vec<f64> {
        let wy = trapezoid_weights(&self.y);
        (0..self.x.len()).map(|i| wy.iter().enumerate().map(|(j, w)| w * self.values[(i, j)]).sum()).collect()
    }

    /// Value at the grid point nearest to `(x, y)`.
    pub fn nearest(&self, x: f64, y: f64) -> f64 {
        let idx = |axis: &[f64], v: f64| {
            axis.iter().enumerate().min_by(|a, b| (a.1 - v).abs().total_cmp(&(b.1 - v).abs())).map(|p| p.0).unwrap_or(0)
        };
        self.values[(idx(&self.x, x), idx(&self.y, y))]
    }
}

fn trapezoid_weights(axis: &[f64]) -> Vec<f64> {
    let n = axis.len();
    (0..n)
        .map(|i| {
            let left = if i > 0 { axis[i] - axis[i - 1] } else { 0.0 };
            let right = if i + 1 < n { axis[i + 1] - axis[i] } else { 0.0 };
            0.5 * (left + right)
        })
        .collect()
}

/// Diagonals `c_L[i] = f ρ[i, i+L]` (with `f = 2` off the main diagonal), the
/// coefficients of the Laguerre series for `W`.
fn wigner_diagonals(rho: &DMatrix<C64>) -> Vec<Vec<C64>> {
    let d = rho.nrows();
    (0..d)
        .map(|l| {
            let f = if l == 0 { 1.0 } else { 2.0 };
            (0..d - l).map(|i| rho[(i, i + l)] * f).collect()
        })
        .collect()
}

/// Clenshaw sum of `Σ_i c_i L_i^{(l)}(x)` over normalized associated
/// Laguerre polynomials.
fn laguerre_series(l: usize, x: f64, c: &[C64]) -> C64 {
    let l = l as f64;
    let n = c.len();
    let (mut y0, mut y1) = match n {
        1 => (c[0], C64::new(0.0, 0.0)),
        2 => (c[0], c[1]),
        _ => (c[n - 2], c[n - 1]),
    };
    if n > 2 {
        let mut k = n as f64;
        for i in 3..=n {
            k -= 1.0;
            let prev = y0;
            y0 = c[n - i] - y1 * ((k - 1.0) * (l + k - 1.0) / ((l + k) * k)).sqrt();
            y1 = prev - y1 * ((l + 2.0 * k - 1.0) - x) / ((l + k) * k).sqrt();
        }
    }
    y0 - y1 * ((l + 1.0) - x) / (l + 1.0).sqrt()
}

/// `W(x, y)` of a single-mode state at one phase-space point, stable for
/// large truncations.
fn wigner_point(diags: &[Vec<C64>], x: f64, y: f64) -> f64 {
    let a2 = C64::new(x, y);
    let b = a2.norm_sqr();
    let m = diags.len();
    let mut w0 = diags[m - 1][0];
    for l in (0..m - 1).rev() {
        w0 = laguerre_series(l, b, &diags[l]) + w0 * a2 / ((l + 1) as f64).sqrt();
    }
    w0.re * (-b / 2.0).exp() / (2.0 * std::f64::consts::PI)
}

/// Wigner function on `spec`; errors with [`Error::GridTooNarrow`] if the
/// grid integral misses 1 by more than [`WIGNER_MASS_TOL`].
pub fn wigner(rho: &DensityOperator, spec: &GridSpec) -> Result<WignerGrid> {
    checked(wigner_unchecked(rho, spec)?, rho.trace())
}

fn checked(grid: WignerGrid, total: f64) -> Result<WignerGrid> {
    let deficit = (total - grid.integral()).abs();
    if deficit > WIGNER_MASS_TOL {
        return Err(Error::GridTooNarrow { deficit });
    }
    Ok(grid)
}

fn widening(spec: &GridSpec, f: impl Fn(&GridSpec) -> Result<WignerGrid>) -> Result<WignerGrid> {
    let mut spec = *spec;
    for attempt in 0..5 {
        match f(&spec) {
            Err(Error::GridTooNarrow { .. }) if attempt < 4 => spec = spec.widened(1.5),
            other => return other,
        }
    }
    unreachable!("loop returns on the last attempt")
}

/// Like [`wigner`], but widens the grid (same spacing) up to four times
/// when it is too narrow.
pub fn wigner_auto(rho: &DensityOperator, spec: &GridSpec) -> Result<WignerGrid> {
    widening(spec, |s| wigner(rho, s))
}

/// Wigner function without the mass check.
pub fn wigner_unchecked(rho: &DensityOperator, spec: &GridSpec) -> Result<WignerGrid> {
    spec.validate()?;
    if rho.dims().len() != 1 {
        return Err(Error::DimensionMismatch(format!(
            "Wigner function needs a single mode; trace out the others first (dims {:?})",
            rho.dims()
        )));
    }
    let x = GridSpec::axis(spec.x_min, spec.x_max, spec.nx);
    let y = GridSpec::axis(spec.y_min, spec.y_max, spec.ny);
    let m = rho.matrix();
    let diags = wigner_diagonals(m);
    let values = DMatrix::from_fn(x.len(), y.len(), |i, j| wigner_point(&diags, x[i], y[j]));
    Ok(WignerGrid { x, y, values })
}

/// An operator `Σ_{nm} c_nm |a_n><a_m|` written on coherent states `|a_n>`,
/// which need not be orthogonal. Mirror states of the model take this form
/// exactly, so their Wigner functions need no Fock truncation.
#[derive(Debug, Clone, PartialEq)]
pub struct CoherentMixture {
    pub amps: Vec<C64>,
    pub coeffs: DMatrix<C64>,
}

impl CoherentMixture {
    pub fn new(amps: Vec<C64>, coeffs: DMatrix<C64>) -> Result<Self> {
        if coeffs.nrows() != amps.len() || coeffs.ncols() != amps.len() {
            return Err(Error::DimensionMismatch(format!(
                "{}×{} coefficients for {} coherent states",
                coeffs.nrows(),
                coeffs.ncols(),
                amps.len()
            )));
        }
        if amps.is_empty() {
            return Err(param_err("amps", "need at least one coherent state"));
        }
        Ok(Self { amps, coeffs })
    }

    /// `|ψ><ψ|` for `|ψ> = Σ c_n |a_n>`.
    pub fn pure(amps: Vec<C64>, c: &[C64]) -> Result<Self> {
        let coeffs = DMatrix::from_fn(c.len(), c.len(), |n, m| c[n] * c[m].conj());
        Self::new(amps, coeffs)
    }

    /// `Σ w_n |a_n><a_n|`.
    pub fn mixture(amps: Vec<C64>, weights: &[f64]) -> Result<Self> {
        let coeffs = DMatrix::from_fn(weights.len(), weights.len(), |n, m| {
            if n == m {
                C64::new(weights[n], 0.0)
            } else {
                C64::new(0.0, 0.0)
            }
        });
        Self::new(amps, coeffs)
    }

    /// `Σ c_nm <a_m|a_n>`.
    pub fn trace(&self) -> f64 {
        let mut s = C64::new(0.0, 0.0);
        for (n, &an) in self.amps.iter().enumerate() {
            for (m, &am) in self.amps.iter().enumerate() {
                let c = self.coeffs[(n, m)];
                if c != C64::new(0.0, 0.0) {
                    s += c * coherent_overlap(am, an);
                }
            }
        }
        s.re
    }

    fn overlaps(&self) -> DMatrix<C64> {
        let a = &self.amps;
        DMatrix::from_fn(a.len(), a.len(), |i, j| coherent_overlap(a[i], a[j]))
    }

    /// `Tr ρ²` relative to `(Tr ρ)²`: `Tr(CSCS) / Tr(CS)²` with overlaps
    /// `S_ij = <a_i|a_j>`.
    pub fn purity(&self) -> f64 {
        let cs = &self.coeffs * self.overlaps();
        (&cs * &cs).trace().re / cs.trace().re.powi(2)
    }

    /// Scaled to unit trace.
    pub fn normalized(mut self) -> Result<Self> {
        let tr = self.trace();
        if !(tr > 0.0) {
            return Err(Error::ZeroVector(format!("coherent mixture has trace {tr:.3e}")));
        }
        self.coeffs /= C64::new(tr, 0.0);
        Ok(self)
    }

    /// Fock representation on `dim` levels, renormalized, with the
    /// discarded weight as `loss`.
    pub fn to_density(&self, dim: usize) -> Result<Truncated<DensityOperator>> {
        if dim == 0 {
            return Err(param_err("dim", "must be >= 1"));
        }
        let vecs: Vec<DVector<C64>> =
            self.amps.iter().map(|&a| DVector::from_vec(coherent_amplitudes(a, dim))).collect();
        let mut rho = DMatrix::zeros(dim, dim);
        for n in 0..vecs.len() {
            for m in 0..vecs.len() {
                let c = self.coeffs[(n, m)];
                if c != C64::new(0.0, 0.0) {
                    rho += &vecs[n] * vecs[m].adjoint() * c;
                }
            }
        }
        let trace: f64 = (0..dim).map(|i| rho[(i, i)].re).sum();
        let loss = (self.trace() - trace).max(0.0) / self.trace();
        rho /= C64::new(trace, 0.0);
        Ok(Truncated { value: DensityOperator::from_matrix_unchecked(vec![dim], rho)?, loss })
    }

    /// `W(x, y)` at one point: each `|a><b|` contributes
    /// `(1/2π) exp(−2i Im(α a*) − |b|²/2 − |2α − a|²/2 + b*(2α − a))` with
    /// `α = (x + iy)/2`.
    fn wigner_at(&self, x: f64, y: f64) -> f64 {
        let alpha = C64::new(x, y) * 0.5;
        let mut s = C64::new(0.0, 0.0);
        for (n, &a) in self.amps.iter().enumerate() {
            let shifted = alpha * 2.0 - a;
            let base = C64::new(0.0, -2.0 * (alpha * a.conj()).im) - 0.5 * shifted.norm_sqr();
            for (m, &b) in self.amps.iter().enumerate() {
                let c = self.coeffs[(n, m)];
                if c != C64::new(0.0, 0.0) {
                    s += c * (base - 0.5 * b.norm_sqr() + b.conj() * shifted).exp();
                }
            }
        }
        s.re / (2.0 * std::f64::consts::PI)
    }
}

/// Exact Wigner function of a [`CoherentMixture`] on `spec`, without the
/// mass check.
pub fn coherent_wigner_unchecked(state: &CoherentMixture, spec: &GridSpec) -> Result<WignerGrid> {
    spec.validate()?;
    let x = GridSpec::axis(spec.x_min, spec.x_max, spec.nx);
    let y = GridSpec::axis(spec.y_min, spec.y_max, spec.ny);
    let values = DMatrix::from_fn(x.len(), y.len(), |i, j| state.wigner_at(x[i], y[j]));
    Ok(WignerGrid { x, y, values })
}

/// [`coherent_wigner_unchecked`] with the same mass check as [`wigner`].
pub fn coherent_wigner(state: &CoherentMixture, spec: &GridSpec) -> Result<WignerGrid> {
    checked(coherent_wigner_unchecked(state, spec)?, state.trace())
}

/// [`coherent_wigner`] with the widening of [`wigner_auto`].
pub fn coherent_wigner_auto(state: &CoherentMixture, spec: &GridSpec) -> Result<WignerGrid> {
    widening(spec, |s| coherent_wigner(state, s))
}

/// Where a Wigner grid is most negative.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct NegativityCertificate {
    pub min: f64,
    pub x: f64,
    pub y: f64,
    /// `min < −eps`.
    pub negative: bool,
}

pub fn negativity(grid: &WignerGrid, eps: f64) -> NegativityCertificate {
    let mut best = (f64::INFINITY, 0, 0);
    for i in 0..grid.x.len() {
        for j in 0..grid.y.len() {
            let v = grid.values[(i, j)];
            if v < best.0 {
                best = (v, i, j);
            }
        }
    }
    NegativityCertificate { min: best.0, x: grid.x[best.1], y: grid.y[best.2], negative: best.0 < -eps }
}

/// Photon-number distribution of mode `mode`.
pub fn number_distribution<'a>(state: impl Into<StateRef<'a>>, mode: usize) -> Result<Vec<f64>> {
    let reduced = match state.into() {
        StateRef::Pure(s) => s.reduced(&[mode])?,
        StateRef::Mixed(r) => r.partial_trace(&[mode])?,
    };
    let diag = reduced.diagonal();
    let total: f64 = diag.iter().sum();
    Ok(diag.into_iter().map(|p| p / total).collect())
}

/// Scenario for [`entropy_curve`].
#[derive(Debug, Clone, PartialEq)]
pub struct EntropyScenario {
    pub params: ScaledParams,
    pub trunc: Truncation,
}

/// Linear entropy of the reduced mirror state at each time.
///
/// Both branches use the closed-form overlaps of the mirror branches, so only
/// `trunc.field` matters; damping requires `beta = 0`.
pub fn entropy_curve(scenario: &EntropyScenario, times: &[f64]) -> Result<Vec<(f64, f64)>> {
    let p = &scenario.params;
    times
        .iter()
        .map(|&t| {
            let s = if p.gamma > 0.0 {
                damped_mirror_entropy(p, t, scenario.trunc.field)?
            } else {
                mirror_entropy(p, t, scenario.trunc.field)?
            };
            Ok((t, s))
        })
        .collect()
}
