//! Explicit Runge–Kutta integrators for complex matrix ODEs `y' = f(t, y)`.

use nalgebra::DMatrix;

use crate::error::{param_err, Error, Result};
use crate::C64;

#[derive(Debug, Clone, Copy, PartialEq)]
pub enum Method {
    /// Classical 4th-order Runge–Kutta with a fixed step (the last step is
    /// shortened to land exactly on the end time).
    Rk4 { dt: f64 },
    /// Dormand–Prince 5(4) with error control per component:
    /// `|err| ≤ atol + rtol·|y|` in the RMS sense.
    Dopri5 { atol: f64, rtol: f64 },
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct IntegratorConfig {
    pub method: Method,
    pub max_steps: usize,
}

impl Default for IntegratorConfig {
    fn default() -> Self {
        Self { method: Method::Dopri5 { atol: 1e-10, rtol: 1e-8 }, max_steps: 1_000_000 }
    }
}

impl IntegratorConfig {
    pub fn rk4(dt: f64) -> Self {
        Self { method: Method::Rk4 { dt }, ..Self::default() }
    }

    pub fn adaptive(atol: f64, rtol: f64) -> Self {
        Self { method: Method::Dopri5 { atol, rtol }, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match self.method {
            Method::Rk4 { dt } => dt.is_finite() && dt > 0.0,
            Method::Dopri5 { atol, rtol } => atol > 0.0 && rtol >= 0.0 && atol.is_finite() && rtol.is_finite(),
        };
        if !ok {
            return Err(param_err("integrator", "step and tolerances must be positive"));
        }
        if self.max_steps == 0 {
            return Err(param_err("max_steps", "must be >= 1"));
        }
        Ok(())
    }
}

/// What an integration did.
#[derive(Debug, Clone, Copy, PartialEq, Default)]
pub struct IntegrationStats {
    pub accepted: usize,
    pub rejected: usize,
    pub evaluations: usize,
}

type Mat = DMatrix<C64>;

/// `y += a·x`.
fn axpy(y: &mut Mat, a: C64, x: &Mat) {
    y.zip_apply(x, |yi, xi| *yi += a * xi);
}

/// Integrate from `t0` to `t1` (`t1 ≥ t0`). `f(t, y, out)` writes `y'` into `out`.
pub fn integrate<F>(mut f: F, y0: &Mat, t0: f64, t1: f64, cfg: &IntegratorConfig) -> Result<(Mat, IntegrationStats)>
where
    F: FnMut(f64, &Mat, &mut Mat),
{
    cfg.validate()?;
    if !(t1 >= t0) {
        return Err(param_err("t", "end time must not precede start time"));
    }
    match cfg.method {
        Method::Rk4 { dt } => rk4(&mut f, y0, t0, t1, dt, cfg.max_steps),
        Method::Dopri5 { atol, rtol } => dopri5(&mut f, y0, t0, t1, atol, rtol, cfg.max_steps),
    }
}

fn rk4<F>(f: &mut F, y0: &Mat, t0: f64, t1: f64, dt: f64, max_steps: usize) -> Result<(Mat, IntegrationStats)>
where
    F: FnMut(f64, &Mat, &mut Mat),
{
    let span = t1 - t0;
    let steps = (span / dt).ceil().max(if span > 0.0 { 1.0 } else { 0.0 }) as usize;
    if steps > max_steps {
        return Err(Error::StepLimit(max_steps));
    }
    let (r, c) = y0.shape();
    let mut y = y0.clone();
    let (mut k1, mut k2, mut k3, mut k4) = (Mat::zeros(r, c), Mat::zeros(r, c), Mat::zeros(r, c), Mat::zeros(r, c));
    let mut tmp = Mat::zeros(r, c);
    let mut stats = IntegrationStats::default();
    for s in 0..steps {
        let t = t0 + s as f64 * dt;
        let h = if s + 1 == steps { t1 - t } else { dt };
        let hc = C64::new(h, 0.0);
        f(t, &y, &mut k1);
        tmp.copy_from(&y);
        axpy(&mut tmp, hc * 0.5, &k1);
        f(t + h / 2.0, &tmp, &mut k2);
        tmp.copy_from(&y);
        axpy(&mut tmp, hc * 0.5, &k2);
        f(t + h / 2.0, &tmp, &mut k3);
        tmp.copy_from(&y);
        axpy(&mut tmp, hc, &k3);
        f(t + h, &tmp, &mut k4);
        let sixth = hc / 6.0;
        axpy(&mut y, sixth, &k1);
        axpy(&mut y, sixth * 2.0, &k2);
        axpy(&mut y, sixth * 2.0, &k3);
        axpy(&mut y, sixth, &k4);
        stats.accepted += 1;
        stats.evaluations += 4;
    }
    Ok((y, stats))
}

// Dormand–Prince 5(4) tableau.
const C: [f64; 7] = [0.0, 1.0 / 5.0, 3.0 / 10.0, 4.0 / 5.0, 8.0 / 9.0, 1.0, 1.0];
const A: [[f64; 6]; 7] = [
    [0.0; 6],
    [1.0 / 5.0, 0.0, 0.0, 0.0, 0.0, 0.0],
    [3.0 / 40.0, 9.0 / 40.0, 0.0, 0.0, 0.0, 0.0],
    [44.0 / 45.0, -56.0 / 15.0, 32.0 / 9.0, 0.0, 0.0, 0.0],
    [19372.0 / 6561.0, -25360.0 / 2187.0, 64448.0 / 6561.0, -212.0 / 729.0, 0.0, 0.0],
    [9017.0 / 3168.0, -355.0 / 33.0, 46732.0 / 5247.0, 49.0 / 176.0, -5103.0 / 18656.0, 0.0],
    [35.0 / 384.0, 0.0, 500.0 / 1113.0, 125.0 / 192.0, -2187.0 / 6784.0, 11.0 / 84.0],
];
// 5th-order weights are the last row of A; E = b5 − b4.
const E: [f64; 7] = [
    71.0 / 57600.0,
    0.0,
    -71.0 / 16695.0,
    71.0 / 1920.0,
    -17253.0 / 339200.0,
    22.0 / 525.0,
    -1.0 / 40.0,
];

#[allow(clippy::too_many_arguments)]
fn dopri5<F>(
    f: &mut F,
    y0: &Mat,
    t0: f64,
    t1: f64,
    atol: f64,
    rtol: f64,
    max_steps: usize,
) -> Result<(Mat, IntegrationStats)>
where
    F: FnMut(f64, &Mat, &mut Mat),
{
    let (r, c) = y0.shape();
    let mut y = y0.clone();
    let mut stats = IntegrationStats::default();
    if t1 == t0 {
        return Ok((y, stats));
    }
    let mut k: Vec<Mat> = (0..7).map(|_| Mat::zeros(r, c)).collect();
    let mut stage = Mat::zeros(r, c);
    let mut err = Mat::zeros(r, c);
    f(t0, &y, &mut k[0]);
    stats.evaluations += 1;

    let scale_norm = |v: &Mat, a: &Mat, b: &Mat| -> f64 {
        let n = v.len() as f64;
        let s: f64 = v
            .iter()
            .zip(a.iter().zip(b.iter()))
            .map(|(e, (x, y))| {
                let sc = atol + rtol * x.norm().max(y.norm());
                (e.norm() / sc).powi(2)
            })
            .sum();
        (s / n).sqrt()
    };

    // Initial step from the usual two-norm heuristic.
    let d0 = scale_norm(&y, &y, &y);
    let d1 = scale_norm(&k[0], &y, &y);
    let mut h = if d0 < 1e-5 || d1 < 1e-5 { 1e-6 } else { 0.01 * d0 / d1 };
    h = h.min(t1 - t0);

    let mut t = t0;
    while t < t1 {
        if stats.accepted + stats.rejected >= max_steps {
            return Err(Error::StepLimit(max_steps));
        }
        let last = t + h >= t1;
        if last {
            h = t1 - t;
        }
        if h <= 1e-14 * t.abs().max(1.0) {
            return Err(Error::StepUnderflow(t));
        }
        let hc = C64::new(h, 0.0);
        for s in 1..7 {
            stage.copy_from(&y);
            for (j, &a) in A[s].iter().enumerate().take(s) {
                if a != 0.0 {
                    axpy(&mut stage, hc * a, &k[j]);
                }
            }
            f(t + C[s] * h, &stage, &mut k[s]);
        }
        stats.evaluations += 6;
        // stage now holds the 5th-order solution (FSAL: k[6] = f(t+h, y_new)).
        err.fill(C64::new(0.0, 0.0));
        for (j, &e) in E.iter().enumerate() {
            if e != 0.0 {
                axpy(&mut err, hc * e, &k[j]);
            }
        }
        let en = scale_norm(&err, &y, &stage);
        if en <= 1.0 {
            t = if last { t1 } else { t + h };
            y.copy_from(&stage);
            k.swap(0, 6);
            stats.accepted += 1;
            let fac = if en == 0.0 { 5.0 } else { (0.9 * en.powf(-0.2)).clamp(0.2, 5.0) };
            h *= fac;
        } else {
            stats.rejected += 1;
            h *= (0.9 * en.powf(-0.2)).clamp(0.2, 1.0);
        }
    }
    Ok((y, stats))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn decay(lambda: C64) -> impl FnMut(f64, &Mat, &mut Mat) {
        move |_t, y, out| {
            out.copy_from(y);
            *out *= lambda;
        }
    }

    #[test]
    fn exponential_both_methods() {
        let lambda = C64::new(-0.3, 2.0);
        let y0 = Mat::from_element(2, 1, C64::new(1.0, 0.5));
        let want = &y0 * (lambda * 3.0).exp();
        for cfg in [IntegratorConfig::default(), IntegratorConfig::rk4(1e-3)] {
            let (y, _) = integrate(decay(lambda), &y0, 0.0, 3.0, &cfg).unwrap();
            assert!((y - &want).norm() < 1e-8);
        }
    }

    #[test]
    fn rk4_is_fourth_order() {
        let lambda = C64::new(0.0, 1.0);
        let y0 = Mat::from_element(1, 1, C64::new(1.0, 0.0));
        let want = (lambda * 5.0).exp();
        let err = |dt: f64| {
            let (y, _) = integrate(decay(lambda), &y0, 0.0, 5.0, &IntegratorConfig::rk4(dt)).unwrap();
            (y[(0, 0)] - want).norm()
        };
        let ratio = err(0.1) / err(0.05);
        assert!((ratio - 16.0).abs() < 1.0, "ratio {ratio}");
    }

    #[test]
    fn zero_span_and_limits() {
        let y0 = Mat::from_element(1, 1, C64::new(1.0, 0.0));
        let (y, s) = integrate(decay(C64::new(1.0, 0.0)), &y0, 1.0, 1.0, &IntegratorConfig::default()).unwrap();
        assert_eq!(y, y0);
        assert_eq!(s.accepted, 0);
        let cfg = IntegratorConfig { max_steps: 3, ..IntegratorConfig::rk4(0.01) };
        assert!(matches!(integrate(decay(C64::new(1.0, 0.0)), &y0, 0.0, 1.0, &cfg), Err(Error::StepLimit(3))));
        assert!(IntegratorConfig::rk4(-1.0).validate().is_err());
    }
}
