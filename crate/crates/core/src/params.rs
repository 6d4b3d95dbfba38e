//! Physical and dimensionless system parameters.
//!
//! All dynamics in this crate run in scaled units: time is multiplied by the
//! mirror frequency, damping rates are divided by it, and the Hamiltonian is
//! `H/(ħ ω_m) = r a†a + b†b − k a†a (b + b†)`.

use crate::error::{param_err, Result};
use crate::C64;

/// Reduced Planck constant in J·s (CODATA 2018, exact).
pub const HBAR: f64 = 1.054_571_817e-34;

/// Laboratory parameters of the cavity and the mirror.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct PhysicalParams {
    /// Field angular frequency, rad/s.
    pub omega_0: f64,
    /// Mirror angular frequency, rad/s.
    pub omega_m: f64,
    /// Cavity length, m.
    pub length: f64,
    /// Mirror mass, kg.
    pub mass: f64,
}

impl PhysicalParams {
    pub fn new(omega_0: f64, omega_m: f64, length: f64, mass: f64) -> Result<Self> {
        let p = Self { omega_0, omega_m, length, mass };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [
            ("omega_0", self.omega_0),
            ("omega_m", self.omega_m),
            ("length", self.length),
            ("mass", self.mass),
        ] {
            if !(v.is_finite() && v > 0.0) {
                return Err(param_err(name, format!("must be finite and > 0, got {v}")));
            }
        }
        Ok(())
    }
}

/// Radiation-pressure coupling derived from [`PhysicalParams`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Coupling {
    /// Coupling rate `g` in rad/s.
    pub g: f64,
    /// Scaled coupling `g / ω_m`.
    pub k: f64,
    /// Frequency ratio `ω_0 / ω_m`.
    pub r: f64,
}

/// `g = (ω_0 / L) sqrt(ħ / (2 m ω_m))`, `k = g / ω_m`, `r = ω_0 / ω_m`.
pub fn coupling_from_physical(p: &PhysicalParams) -> Result<Coupling> {
    p.validate()?;
    let g = p.omega_0 / p.length * (HBAR / (2.0 * p.mass * p.omega_m)).sqrt();
    Ok(Coupling { g, k: g / p.omega_m, r: p.omega_0 / p.omega_m })
}

/// Dimensionless model parameters. Scaled time is passed separately to each
/// operation.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ScaledParams {
    pub k: f64,
    pub r: f64,
    pub gamma: f64,
    /// Initial coherent amplitude of the cavity field.
    pub alpha: C64,
    /// Initial coherent amplitude of the mirror.
    pub beta: C64,
}

impl ScaledParams {
    pub fn new(k: f64, alpha: C64, beta: C64) -> Result<Self> {
        let p = Self { k, r: 0.0, gamma: 0.0, alpha, beta };
        p.validate()?;
        Ok(p)
    }

    pub fn with_gamma(mut self, gamma: f64) -> Result<Self> {
        self.gamma = gamma;
        self.validate()?;
        Ok(self)
    }

    pub fn with_r(mut self, r: f64) -> Result<Self> {
        self.r = r;
        self.validate()?;
        Ok(self)
    }

    pub fn with_coupling(mut self, c: &Coupling) -> Result<Self> {
        self.k = c.k;
        self.r = c.r;
        self.validate()?;
        Ok(self)
    }

    pub fn validate(&self) -> Result<()> {
        for (name, v) in [("k", self.k), ("r", self.r), ("gamma", self.gamma)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(param_err(name, format!("must be finite and >= 0, got {v}")));
            }
        }
        for (name, v) in [("alpha", self.alpha), ("beta", self.beta)] {
            if !(v.re.is_finite() && v.im.is_finite()) {
                return Err(param_err(name, "must be finite"));
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::f64::consts::PI;

    fn base() -> PhysicalParams {
        PhysicalParams::new(1e16, 2.0 * PI * 1e3, 1.0, 1e-5).unwrap()
    }

    #[test]
    fn mass_quadrupled_halves_g() {
        let p = base();
        let q = PhysicalParams { mass: 4.0 * p.mass, ..p };
        let (a, b) = (coupling_from_physical(&p).unwrap(), coupling_from_physical(&q).unwrap());
        assert!((b.g / a.g - 0.5).abs() < 1e-14);
    }

    #[test]
    fn length_doubled_halves_g() {
        let p = base();
        let q = PhysicalParams { length: 2.0 * p.length, ..p };
        let (a, b) = (coupling_from_physical(&p).unwrap(), coupling_from_physical(&q).unwrap());
        assert!((b.g / a.g - 0.5).abs() < 1e-14);
    }

    #[test]
    fn quoted_laboratory_values() {
        // omega_0 = 1e16 /s, omega_m = 2π kHz, L = 1 m, m = 10 mg.
        // Direct arithmetic: sqrt(ħ / (2 m ω_m)) = 2.8966e-17 m, so
        // g = 0.28966 rad/s and k = g / ω_m = 4.610e-5, far below unity.
        let c = coupling_from_physical(&base()).unwrap();
        let zpf = (HBAR / (2.0 * 1e-5 * 2.0 * PI * 1e3)).sqrt();
        assert!((c.g - 1e16 * zpf).abs() < 1e-12);
        assert!((c.g - 0.289_66).abs() < 1e-4, "g = {}", c.g);
        assert!((c.k - 4.610e-5).abs() < 1e-7, "k = {}", c.k);
        assert!((c.r - 1e16 / (2.0 * PI * 1e3)).abs() / c.r < 1e-15);
    }

    #[test]
    fn rejects_non_positive() {
        assert!(PhysicalParams::new(1.0, 0.0, 1.0, 1.0).is_err());
        assert!(PhysicalParams::new(1.0, 1.0, -1.0, 1.0).is_err());
        assert!(PhysicalParams::new(f64::NAN, 1.0, 1.0, 1.0).is_err());
        let p = PhysicalParams { omega_0: 1.0, omega_m: 1.0, length: 1.0, mass: 0.0 };
        assert!(coupling_from_physical(&p).is_err());
    }

    #[test]
    fn scaled_rejects_negative_gamma() {
        let p = ScaledParams::new(0.5, C64::new(2.0, 0.0), C64::new(0.0, 0.0)).unwrap();
        assert!(p.with_gamma(-0.1).is_err());
        assert!(ScaledParams::new(-1.0, C64::new(0.0, 0.0), C64::new(0.0, 0.0)).is_err());
    }
}
