//! Hamiltonians in the truncated Fock basis, built directly from ladder
//! operators, and their dense exponentials.

use nalgebra::DMatrix;

use crate::error::{param_err, Error, Result};
use crate::evolution::{MultimodeConfig, Picture};
use crate::fock::Truncation;
use crate::params::ScaledParams;
use crate::C64;

/// Coordinate-list sparse matrix; enough for the ladder-structured operators
/// used here.
#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    pub dim: usize,
    pub entries: Vec<(usize, usize, C64)>,
}

impl SparseMatrix {
    pub fn new(dim: usize) -> Self {
        Self { dim, entries: Vec::new() }
    }

    pub fn push(&mut self, row: usize, col: usize, v: C64) {
        if v != C64::new(0.0, 0.0) {
            self.entries.push((row, col, v));
        }
    }

    pub fn to_dense(&self) -> DMatrix<C64> {
        let mut m = DMatrix::zeros(self.dim, self.dim);
        for &(r, c, v) in &self.entries {
            m[(r, c)] += v;
        }
        m
    }

    pub fn adjoint(&self) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&(r, c, v)| (c, r, v.conj())).collect() }
    }

    pub fn scaled(&self, s: C64) -> Self {
        Self { dim: self.dim, entries: self.entries.iter().map(|&(r, c, v)| (r, c, v * s)).collect() }
    }

    pub fn plus(&self, other: &Self) -> Self {
        let mut entries = self.entries.clone();
        entries.extend_from_slice(&other.entries);
        Self { dim: self.dim, entries }
    }

    /// `out += s · self · x`.
    pub fn mul_add(&self, x: &DMatrix<C64>, s: C64, out: &mut DMatrix<C64>) {
        for j in 0..x.ncols() {
            let (xc, mut oc) = (x.column(j), out.column_mut(j));
            for &(r, c, v) in &self.entries {
                oc[r] += s * v * xc[c];
            }
        }
    }

    /// `out += s · x · self`.
    pub fn right_mul_add(&self, x: &DMatrix<C64>, s: C64, out: &mut DMatrix<C64>) {
        for &(r, c, v) in &self.entries {
            let sv = s * v;
            let (src, mut dst) = (x.column(r), out.column_mut(c));
            for i in 0..x.nrows() {
                dst[i] += sv * src[i];
            }
        }
    }
}

fn level_product(dims: &[usize]) -> Result<usize> {
    if dims.is_empty() || dims.contains(&0) {
        return Err(Error::DimensionMismatch(format!("invalid dims {dims:?}")));
    }
    Ok(dims.iter().product())
}

/// Mirror annihilation operator `b` on `field ⊗ mirror` (mirror last).
pub fn mirror_lowering(field_len: usize, mirror: usize) -> SparseMatrix {
    let mut b = SparseMatrix::new(field_len * mirror);
    for f in 0..field_len {
        for j in 1..mirror {
            b.push(f * mirror + j - 1, f * mirror + j, C64::new((j as f64).sqrt(), 0.0));
        }
    }
    b
}

/// `H = r a†a + b†b − k a†a (b + b†)` on `field ⊗ mirror`; the interaction
/// picture drops `r a†a`.
pub fn hamiltonian_sparse(params: &ScaledParams, trunc: &Truncation, picture: Picture) -> Result<SparseMatrix> {
    params.validate()?;
    let (nf, nm) = (trunc.field, trunc.mirror);
    level_product(&[nf, nm])?;
    let r = if picture == Picture::Full { params.r } else { 0.0 };
    let mut h = SparseMatrix::new(nf * nm);
    for n in 0..nf {
        for j in 0..nm {
            let i = n * nm + j;
            h.push(i, i, C64::new(r * n as f64 + j as f64, 0.0));
            if j + 1 < nm {
                let v = C64::new(-params.k * n as f64 * ((j + 1) as f64).sqrt(), 0.0);
                h.push(i, i + 1, v);
                h.push(i + 1, i, v);
            }
        }
    }
    Ok(h)
}

pub fn hamiltonian_matrix(params: &ScaledParams, trunc: &Truncation, picture: Picture) -> Result<DMatrix<C64>> {
    Ok(hamiltonian_sparse(params, trunc, picture)?.to_dense())
}

/// `H = b†b − Σ_j η_j k_1 a_j†a_j (b + b†)` on `c_1 ⊗ … ⊗ c_N ⊗ mirror`
/// (field free terms omitted).
pub fn multimode_hamiltonian_sparse(config: &MultimodeConfig, field: &[usize], mirror: usize) -> Result<SparseMatrix> {
    config.validate()?;
    if field.len() != config.n_modes() {
        return Err(Error::DimensionMismatch(format!("{} dims for {} modes", field.len(), config.n_modes())));
    }
    let field_len = level_product(field)?;
    level_product(&[mirror])?;
    let mut h = SparseMatrix::new(field_len * mirror);
    let mut levels = vec![0usize; field.len()];
    for block in 0..field_len {
        let mut rem = block;
        for m in (0..field.len()).rev() {
            levels[m] = rem % field[m];
            rem /= field[m];
        }
        let s = config.weighted_count(&levels);
        for j in 0..mirror {
            let i = block * mirror + j;
            h.push(i, i, C64::new(j as f64, 0.0));
            if j + 1 < mirror {
                let v = C64::new(-config.k1 * s * ((j + 1) as f64).sqrt(), 0.0);
                h.push(i, i + 1, v);
                h.push(i + 1, i, v);
            }
        }
    }
    Ok(h)
}

/// `exp(−iHt)` of a Hermitian matrix via its eigendecomposition.
pub fn unitary_exp(h: &DMatrix<C64>, t: f64) -> DMatrix<C64> {
    let eig = h.clone().symmetric_eigen();
    let phases = eig.eigenvalues.map(|e| C64::from_polar(1.0, -e * t));
    let v = &eig.eigenvectors;
    let mut scaled = v.clone();
    for (j, mut col) in scaled.column_iter_mut().enumerate() {
        col *= phases[j];
    }
    scaled * v.adjoint()
}

/// `exp(−iHt)` on `field ⊗ (mirror + pad)`, restricted back to the first
/// `trunc.mirror` mirror levels.
///
/// Padding pushes the artificial top mirror level far away so the retained
/// block converges to the untruncated propagator.
pub fn dense_propagator(
    params: &ScaledParams,
    t: f64,
    trunc: &Truncation,
    picture: Picture,
    pad: usize,
) -> Result<DMatrix<C64>> {
    if !t.is_finite() {
        return Err(param_err("t", "must be finite"));
    }
    let (nf, nm) = (trunc.field, trunc.mirror);
    let big = Truncation { mirror: nm + pad, ..*trunc };
    let u = unitary_exp(&hamiltonian_matrix(params, &big, picture)?, t);
    let nb = nm + pad;
    Ok(DMatrix::from_fn(nf * nm, nf * nm, |i, j| u[((i / nm) * nb + i % nm, (j / nm) * nb + j % nm)]))
}

/// Largest singular value.
pub fn operator_norm(m: &DMatrix<C64>) -> f64 {
    m.clone().singular_values().max()
}
