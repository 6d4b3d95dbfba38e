//! Pure and mixed states on tensor products of truncated Fock spaces.
//!
//! Composite indices are row-major over the mode list: the first mode is the
//! most significant digit. Field modes come first and the mirror last.

use nalgebra::{DMatrix, DVector};

use crate::error::{Error, Result};
use crate::C64;

/// Hermiticity tolerance for [`DensityOperator`].
pub const HERMITIAN_TOL: f64 = 1e-10;
/// Unit-trace tolerance for [`DensityOperator`].
pub const TRACE_TOL: f64 = 1e-8;
/// Normalization tolerance for [`StateVector`].
pub const NORM_TOL: f64 = 1e-10;

fn check_dims(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!("invalid mode dims {dims:?}")));
    }
    Ok(dims.iter().product())
}

/// Row-major strides for a mode list.
fn strides(dims: &[usize]) -> Vec<usize> {
    let mut s = vec![1; dims.len()];
    for i in (0..dims.len().saturating_sub(1)).rev() {
        s[i] = s[i + 1] * dims[i + 1];
    }
    s
}

/// Split every composite index into (kept index, traced index).
struct Split {
    kept_dim: usize,
    traced_dim: usize,
    // buckets[t] lists (full index, kept index) pairs sharing traced index t
    buckets: Vec<Vec<(usize, usize)>>,
    kept_dims: Vec<usize>,
}

impl Split {
    fn new(dims: &[usize], keep: &[usize]) -> Result<Self> {
        let mut sorted = keep.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        if sorted.len() != keep.len() || sorted.iter().any(|&m| m >= dims.len()) {
            return Err(Error::DimensionMismatch(format!(
                "cannot keep modes {keep:?} of a {}-mode system",
                dims.len()
            )));
        }
        let traced: Vec<usize> = (0..dims.len()).filter(|m| !sorted.contains(m)).collect();
        let kept_dims: Vec<usize> = sorted.iter().map(|&m| dims[m]).collect();
        let traced_dims: Vec<usize> = traced.iter().map(|&m| dims[m]).collect();
        let (kept_dim, traced_dim) = (kept_dims.iter().product(), traced_dims.iter().product());
        let (ks, ts) = (strides(&kept_dims), strides(&traced_dims));
        let full = strides(dims);
        let total: usize = dims.iter().product();
        let mut buckets = vec![Vec::with_capacity(kept_dim); traced_dim];
        for i in 0..total {
            let (mut ki, mut ti) = (0, 0);
            for (pos, &m) in sorted.iter().enumerate() {
                ki += (i / full[m]) % dims[m] * ks[pos];
            }
            for (pos, &m) in traced.iter().enumerate() {
                ti += (i / full[m]) % dims[m] * ts[pos];
            }
            buckets[ti].push((i, ki));
        }
        Ok(Self { kept_dim, traced_dim, buckets, kept_dims })
    }
}

/// Kronecker product of two matrices.
pub fn kron(a: &DMatrix<C64>, b: &DMatrix<C64>) -> DMatrix<C64> {
    let (ar, ac) = a.shape();
    let (br, bc) = b.shape();
    DMatrix::from_fn(ar * br, ac * bc, |i, j| a[(i / br, j / bc)] * b[(i % br, j % bc)])
}

/// Complex amplitudes over a tensor product of truncated Fock spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct StateVector {
    dims: Vec<usize>,
    amps: DVector<C64>,
}

impl StateVector {
    pub fn new(dims: Vec<usize>, amps: DVector<C64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if amps.len() != len {
            return Err(Error::DimensionMismatch(format!(
                "{} amplitudes for mode dims {dims:?} (need {len})",
                amps.len()
            )));
        }
        Ok(Self { dims, amps })
    }

    pub fn from_fn(dims: Vec<usize>, mut f: impl FnMut(&[usize]) -> C64) -> Result<Self> {
        let len = check_dims(&dims)?;
        let s = strides(&dims);
        let mut idx = vec![0; dims.len()];
        let amps = DVector::from_fn(len, |i, _| {
            for (m, slot) in idx.iter_mut().enumerate() {
                *slot = i / s[m] % dims[m];
            }
            f(&idx)
        });
        Ok(Self { dims, amps })
    }

    /// Fock basis state `|n_1, n_2, ...>`.
    pub fn basis(dims: Vec<usize>, levels: &[usize]) -> Result<Self> {
        if levels.len() != dims.len() || levels.iter().zip(&dims).any(|(l, d)| l >= d) {
            return Err(Error::DimensionMismatch(format!("level {levels:?} outside dims {dims:?}")));
        }
        Self::from_fn(dims, |idx| if idx == levels { C64::new(1.0, 0.0) } else { C64::new(0.0, 0.0) })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn len(&self) -> usize {
        self.amps.len()
    }

    pub fn is_empty(&self) -> bool {
        self.amps.is_empty()
    }

    pub fn amplitudes(&self) -> &DVector<C64> {
        &self.amps
    }

    pub fn into_amplitudes(self) -> DVector<C64> {
        self.amps
    }

    /// Amplitude of the basis state with the given per-mode levels.
    pub fn amplitude(&self, levels: &[usize]) -> C64 {
        let s = strides(&self.dims);
        self.amps[levels.iter().zip(&s).map(|(l, s)| l * s).sum::<usize>()]
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    pub fn is_normalized(&self) -> bool {
        (self.amps.norm_squared() - 1.0).abs() <= NORM_TOL
    }

    pub fn normalized(mut self) -> Result<Self> {
        let n = self.amps.norm();
        if n == 0.0 || !n.is_finite() {
            return Err(Error::ZeroVector(format!("state with dims {:?}", self.dims)));
        }
        self.amps /= C64::new(n, 0.0);
        Ok(self)
    }

    /// `<self|other>`.
    pub fn inner(&self, other: &StateVector) -> Result<C64> {
        if self.dims != other.dims {
            return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", self.dims, other.dims)));
        }
        Ok(self.amps.dotc(&other.amps))
    }

    pub fn tensor(&self, other: &StateVector) -> StateVector {
        let n = other.amps.len();
        let amps = DVector::from_fn(self.amps.len() * n, |i, _| self.amps[i / n] * other.amps[i % n]);
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        StateVector { dims, amps }
    }

    pub fn apply(&self, op: &DMatrix<C64>) -> Result<StateVector> {
        if op.shape() != (self.len(), self.len()) {
            return Err(Error::DimensionMismatch(format!(
                "operator {:?} on state of length {}",
                op.shape(),
                self.len()
            )));
        }
        Ok(StateVector { dims: self.dims.clone(), amps: op * &self.amps })
    }

    pub fn to_density(&self) -> DensityOperator {
        DensityOperator { dims: self.dims.clone(), matrix: &self.amps * self.amps.adjoint() }
    }

    /// Reduced density operator of the modes in `keep` (sorted mode order).
    pub fn reduced(&self, keep: &[usize]) -> Result<DensityOperator> {
        let split = Split::new(&self.dims, keep)?;
        let mut out = DMatrix::zeros(split.kept_dim, split.kept_dim);
        for bucket in &split.buckets {
            for &(i, ki) in bucket {
                let ai = self.amps[i];
                for &(j, kj) in bucket {
                    out[(ki, kj)] += ai * self.amps[j].conj();
                }
            }
        }
        Ok(DensityOperator { dims: split.kept_dims, matrix: out })
    }
}

/// Tensor product of several pure states, in order.
pub fn tensor_states(states: &[&StateVector]) -> Result<StateVector> {
    let (first, rest) = states
        .split_first()
        .ok_or_else(|| Error::DimensionMismatch("empty tensor product".into()))?;
    Ok(rest.iter().fold((*first).clone(), |acc, s| acc.tensor(s)))
}

/// Hermitian, unit-trace matrix on a tensor product of truncated Fock spaces.
#[derive(Debug, Clone, PartialEq)]
pub struct DensityOperator {
    dims: Vec<usize>,
    matrix: DMatrix<C64>,
}

impl DensityOperator {
    /// Validates Hermiticity and unit trace. Positivity is checked on demand
    /// with [`DensityOperator::min_eigenvalue`].
    pub fn new(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        let rho = Self::from_matrix_unchecked(dims, matrix)?;
        let herm = rho.hermiticity_error();
        if herm > HERMITIAN_TOL {
            return Err(Error::UnsupportedState(format!("not Hermitian (error {herm:.3e})")));
        }
        let tr = rho.trace();
        if (tr - 1.0).abs() > TRACE_TOL {
            return Err(Error::UnsupportedState(format!("trace {tr} != 1")));
        }
        Ok(rho)
    }

    /// Shape-checked only; for intermediate, unnormalized operators.
    pub fn from_matrix_unchecked(dims: Vec<usize>, matrix: DMatrix<C64>) -> Result<Self> {
        let len = check_dims(&dims)?;
        if matrix.shape() != (len, len) {
            return Err(Error::DimensionMismatch(format!(
                "matrix {:?} for mode dims {dims:?}",
                matrix.shape()
            )));
        }
        Ok(Self { dims, matrix })
    }

    pub fn dims(&self) -> &[usize] {
        &self.dims
    }

    pub fn matrix(&self) -> &DMatrix<C64> {
        &self.matrix
    }

    pub fn into_matrix(self) -> DMatrix<C64> {
        self.matrix
    }

    pub fn dim(&self) -> usize {
        self.matrix.nrows()
    }

    pub fn trace(&self) -> f64 {
        self.matrix.trace().re
    }

    /// Largest entry of `|ρ − ρ†|`.
    pub fn hermiticity_error(&self) -> f64 {
        let n = self.dim();
        let mut worst: f64 = 0.0;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.matrix[(i, j)] - self.matrix[(j, i)].conj()).norm());
            }
        }
        worst
    }

    /// Rescale to unit trace, returning the trace before rescaling.
    pub fn renormalize(&mut self) -> Result<f64> {
        let tr = self.trace();
        if !(tr > 0.0) {
            return Err(Error::ZeroVector(format!("density operator with trace {tr}")));
        }
        self.matrix /= C64::new(tr, 0.0);
        Ok(tr)
    }

    /// `Tr ρ²`.
    pub fn purity(&self) -> f64 {
        // Tr(ρ ρ) = Σ_ij ρ_ij ρ_ji = Σ_ij |ρ_ij|² for Hermitian ρ
        self.matrix.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn eigenvalues(&self) -> Vec<f64> {
        hermitian_eigenvalues(&self.matrix)
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.eigenvalues().first().copied().unwrap_or(0.0)
    }

    pub fn tensor(&self, other: &DensityOperator) -> DensityOperator {
        let mut dims = self.dims.clone();
        dims.extend_from_slice(&other.dims);
        DensityOperator { dims, matrix: kron(&self.matrix, &other.matrix) }
    }

    /// Trace out every mode not listed in `keep`.
    pub fn partial_trace(&self, keep: &[usize]) -> Result<DensityOperator> {
        let split = Split::new(&self.dims, keep)?;
        let mut out = DMatrix::zeros(split.kept_dim, split.kept_dim);
        debug_assert_eq!(split.buckets.len(), split.traced_dim);
        for bucket in &split.buckets {
            for &(i, ki) in bucket {
                for &(j, kj) in bucket {
                    out[(ki, kj)] += self.matrix[(i, j)];
                }
            }
        }
        Ok(DensityOperator { dims: split.kept_dims, matrix: out })
    }

    /// Diagonal in the composite Fock basis.
    pub fn diagonal(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.matrix[(i, i)].re).collect()
    }
}

pub(crate) fn hermitian_part(m: &DMatrix<C64>) -> DMatrix<C64> {
    (m + m.adjoint()) * C64::new(0.5, 0.0)
}

/// Eigenvalues of the Hermitian part of `m`, ascending.
///
/// The solver can return NaN on sparse matrices of tiny norm, so all-zero
/// rows (each an exact zero eigenvalue) are split off and the rest is
/// rescaled to unit largest entry.
pub(crate) fn hermitian_eigenvalues(m: &DMatrix<C64>) -> Vec<f64> {
    let h = hermitian_part(m);
    let n = h.nrows();
    let scale = h.iter().map(|z| z.norm()).fold(0.0, f64::max);
    let keep: Vec<usize> = (0..n).filter(|&i| h.row(i).iter().any(|z| z.norm() > 0.0)).collect();
    let mut ev = vec![0.0; n - keep.len()];
    if !keep.is_empty() {
        let sub = DMatrix::from_fn(keep.len(), keep.len(), |i, j| h[(keep[i], keep[j])] / scale);
        ev.extend(sub.symmetric_eigenvalues().iter().map(|l| l * scale));
    }
    ev.sort_by(f64::total_cmp);
    ev
}
