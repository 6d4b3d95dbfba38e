//! Distances and purities used to certify states.

use nalgebra::DMatrix;

use crate::error::{Error, Result};
use crate::state::{hermitian_eigenvalues, hermitian_part, DensityOperator, StateVector};
use crate::C64;

/// Either kind of state, for metrics that accept both.
#[derive(Debug, Clone, Copy)]
pub enum StateRef<'a> {
    Pure(&'a StateVector),
    Mixed(&'a DensityOperator),
}

impl<'a> From<&'a StateVector> for StateRef<'a> {
    fn from(s: &'a StateVector) -> Self {
        StateRef::Pure(s)
    }
}

impl<'a> From<&'a DensityOperator> for StateRef<'a> {
    fn from(r: &'a DensityOperator) -> Self {
        StateRef::Mixed(r)
    }
}

impl StateRef<'_> {
    fn dims(&self) -> &[usize] {
        match self {
            StateRef::Pure(s) => s.dims(),
            StateRef::Mixed(r) => r.dims(),
        }
    }
}

fn same_dims(a: &StateRef, b: &StateRef) -> Result<()> {
    if a.dims() != b.dims() {
        return Err(Error::DimensionMismatch(format!("{:?} vs {:?}", a.dims(), b.dims())));
    }
    Ok(())
}

/// Fidelity in `[0, 1]`: `|<a|b>|²` for pure pairs, `<ψ|ρ|ψ>` for mixed
/// against pure, and the Uhlmann fidelity `(Tr sqrt(√ρ σ √ρ))²` otherwise.
/// Pure inputs are normalized first.
pub fn fidelity<'a, 'b>(a: impl Into<StateRef<'a>>, b: impl Into<StateRef<'b>>) -> Result<f64> {
    let (a, b) = (a.into(), b.into());
    same_dims(&a, &b)?;
    let f = match (a, b) {
        (StateRef::Pure(x), StateRef::Pure(y)) => {
            let ov = x.inner(y)?.norm_sqr();
            ov / (x.amplitudes().norm_squared() * y.amplitudes().norm_squared())
        }
        (StateRef::Pure(x), StateRef::Mixed(r)) | (StateRef::Mixed(r), StateRef::Pure(x)) => {
            let v = x.amplitudes();
            (v.adjoint() * r.matrix() * v)[(0, 0)].re / (v.norm_squared() * r.trace())
        }
        (StateRef::Mixed(r), StateRef::Mixed(s)) => {
            let root = psd_sqrt(r.matrix());
            let m = &root * s.matrix() * &root;
            let tr: f64 = hermitian_eigenvalues(&m).iter().map(|l| l.max(0.0).sqrt()).sum();
            tr * tr / (r.trace() * s.trace())
        }
    };
    Ok(f.clamp(0.0, 1.0))
}

/// `½ ‖a − b‖₁`.
pub fn trace_distance<'a, 'b>(a: impl Into<StateRef<'a>>, b: impl Into<StateRef<'b>>) -> Result<f64> {
    let (a, b) = (a.into(), b.into());
    same_dims(&a, &b)?;
    if let (StateRef::Pure(x), StateRef::Pure(y)) = (a, b) {
        return Ok((1.0 - fidelity(x, y)?).max(0.0).sqrt());
    }
    let dense = |s: StateRef| match s {
        StateRef::Pure(x) => {
            let v = x.amplitudes() / C64::new(x.norm(), 0.0);
            &v * v.adjoint()
        }
        StateRef::Mixed(r) => r.matrix().clone(),
    };
    let diff = dense(a) - dense(b);
    Ok(0.5 * hermitian_eigenvalues(&diff).iter().map(|l| l.abs()).sum::<f64>())
}

/// `S = 1 − Tr ρ²`.
pub fn linear_entropy(rho: &DensityOperator) -> f64 {
    1.0 - rho.purity()
}

fn psd_sqrt(m: &DMatrix<C64>) -> DMatrix<C64> {
    let eig = hermitian_part(m).symmetric_eigen();
    let roots = eig.eigenvalues.map(|l| C64::new(l.max(0.0).sqrt(), 0.0));
    &eig.eigenvectors * DMatrix::from_diagonal(&roots) * eig.eigenvectors.adjoint()
}
