//! Acceptance suite: one PASS/FAIL line per criterion, exit status 1 if any
//! criterion fails. Tolerances are fixed; nothing here is tuned to pass.

use std::f64::consts::{PI, SQRT_2};
use std::time::{Duration, Instant};

use cavmirror::analysis::{
    coherent_wigner_auto, entropy_curve, negativity, wigner_unchecked, EntropyScenario, GridSpec,
};
use cavmirror::catalog::{cat_superposition, eigenstate_residual, entangled_cat, zeta_state, CatSpec, EntangledCatSpec};
use cavmirror::decoherence::{
    damped_density, damped_field_density, decoherence_exponent, decoherence_timescale, PhaseModel,
};
use cavmirror::evolution::{
    joint_state, multimode_joint_state, propagator_matrix, revival_field_state, MultimodeConfig, MultimodeTruncation,
    Picture,
};
use cavmirror::measurement::{mirror_cat_mixture, near_fock_state};
use cavmirror::oracle::{
    decoherence_integral, dense_propagator, integrate_lindblad, integrate_schrodinger, operator_norm,
    IntegratorConfig,
};
use cavmirror::{
    fidelity, trace_distance, PhysicalParams, Result, ScaledParams, StateVector, Truncation, C64,
};

fn c(re: f64) -> C64 {
    C64::new(re, 0.0)
}

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Result<Outcome> {
    Ok(Outcome { pass, detail: detail.into() })
}

/// Propagator factorization on 4×8 against a padded dense exponential.
fn propagator_factorization() -> Result<Outcome> {
    let p = ScaledParams::new(0.5, c(0.0), c(0.0))?;
    let trunc = Truncation::new(4, 8);
    let mut worst: f64 = 0.0;
    for t in [0.3, PI / 2.0, PI, 2.0 * PI] {
        let dense = dense_propagator(&p, t, &trunc, Picture::Full, 60)?;
        let fact = propagator_matrix(&p, t, &trunc, Picture::Full);
        worst = worst.max(operator_norm(&(dense - fact)));
    }
    outcome(worst <= 1e-8, format!("max ‖U_fact − exp(−iHt)‖ = {worst:.2e} (≤ 1e-8)"))
}

/// Closed-form joint state against direct Schrödinger integration.
fn closed_form_vs_schrodinger() -> Result<Outcome> {
    let p = ScaledParams::new(0.5, c(2.0), c(2.0))?;
    let trunc = Truncation::for_coherent_dynamics(p.k, p.alpha, p.beta, 1e-12);
    let mut psi = joint_state(&p, 0.0, &trunc)?.value;
    let (mut worst, mut loss, mut now): (f64, f64, f64) = (1.0, 0.0, 0.0);
    // H is time independent, so each leg continues from the previous time
    for t in [PI / 2.0, PI, 2.0 * PI] {
        psi = integrate_schrodinger(&psi, &p, t - now, Picture::Interaction, &IntegratorConfig::default())?.value;
        now = t;
        let closed = joint_state(&p, t, &trunc)?;
        loss = loss.max(closed.loss);
        worst = worst.min(fidelity(&closed.value, &psi)?);
    }
    outcome(
        worst >= 1.0 - 1e-6 && loss < 1e-8,
        format!("min fidelity = 1 − {:.2e} (≥ 1 − 1e-6), dims {}×{}, loss {loss:.1e}", 1.0 - worst, trunc.field, trunc.mirror),
    )
}

/// Mirror entropy peaks at t = π and returns to zero at t = 2π.
fn entanglement_cycle() -> Result<Outcome> {
    let mut pass = true;
    let mut parts = Vec::new();
    let points = 200;
    let step = 2.0 * PI / points as f64;
    let times: Vec<f64> = (0..points).map(|j| j as f64 * step).collect();
    for k in [0.2, 0.5, 1.0] {
        let params = ScaledParams::new(k, c(2.0), c(2.0))?;
        let trunc = Truncation::for_coherent_dynamics(k, params.alpha, params.beta, 1e-12);
        let scenario = EntropyScenario { params, trunc };
        let curve = entropy_curve(&scenario, &times)?;
        let (t_max, _) = curve.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).expect("non-empty grid");
        let s_end = entropy_curve(&scenario, &[2.0 * PI])?[0].1;
        let ok = s_end <= 1e-8 && (t_max - PI).abs() <= step + 1e-12;
        pass &= ok;
        parts.push(format!("k={k}: S(2π)={s_end:.1e}, argmax t={t_max:.4}"));
    }
    outcome(pass, format!("{} (S ≤ 1e-8, |argmax − π| ≤ {step:.4})", parts.join("; ")))
}

/// ζ state against the printed two-, three- and four-component cats.
fn cat_identities() -> Result<Outcome> {
    let alpha = c(2.0);
    let dim = 40;
    let cases = [
        ("k=1/2", 0.5, CatSpec::kerr_two(alpha)),
        ("k=1/√6", 1.0 / 6f64.sqrt(), CatSpec::kerr_three_as_printed(alpha)),
        ("k=1/(2√2)", 1.0 / (2.0 * SQRT_2), CatSpec::kerr_four(alpha)),
    ];
    let mut pass = true;
    let mut parts = Vec::new();
    for (label, k, spec) in cases {
        let zeta = zeta_state(alpha, k, dim, 1e-12)?.value;
        let f = fidelity(&zeta, &cat_superposition(&spec, dim)?)?;
        pass &= f >= 1.0 - 1e-10;
        parts.push(format!("{label}: F={f:.12}"));
    }
    outcome(pass, format!("{} (≥ 1 − 1e-10)", parts.join("; ")))
}

/// Two-mode entangled cat at the revival, and the disentangled case k = 1.
fn two_mode_entangled_cat() -> Result<Outcome> {
    let (a1, a2) = (c(1.5), c(1.0));
    let dims = [28, 24];
    let trunc = MultimodeTruncation { field: dims.to_vec(), mirror: 30, tolerance: 1e-10 };
    let entangled = MultimodeConfig::new(vec![1, 1], 0.5, vec![a1, a2])?;
    let joint = multimode_joint_state(&entangled, c(1.0), 2.0 * PI, &trunc)?.value;
    let fields = joint.reduced(&[0, 1])?;
    let want = entangled_cat(&EntangledCatSpec::two_mode_kerr(a1, a2), &dims)?;
    let f = fidelity(&fields, &want)?;

    let product = MultimodeConfig::new(vec![1, 1], 1.0, vec![a1, a2])?;
    let joint = multimode_joint_state(&product, c(1.0), 2.0 * PI, &trunc)?.value;
    let purity = joint.reduced(&[0])?.purity();
    outcome(
        f >= 1.0 - 1e-10 && purity >= 1.0 - 1e-10,
        format!(
            "F(k=1/2) = 1 − {:.1e}, mode-1 purity(k=1) = 1 − {:.1e} (both ≥ 1 − 1e-10)",
            (1.0 - f).max(0.0),
            (1.0 - purity).max(0.0)
        ),
    )
}

/// Revival states are eigenstates of (a_1 a_2)^p; a detuned coupling is not.
fn eigenstate_property() -> Result<Outcome> {
    let alphas = vec![c(1.0), c(1.0)];
    let dims = [30, 30];
    let mut pass = true;
    let mut parts = Vec::new();
    for etas in [vec![1, 1], vec![1, 2]] {
        let cfg = MultimodeConfig::eigenstate(etas.clone(), alphas.clone(), 2)?;
        let state = revival_field_state(&cfg, &dims)?;
        let r = eigenstate_residual(&state, &cfg)?.relative_residual;
        pass &= r <= 1e-6;
        parts.push(format!("η={etas:?}: {r:.1e}"));
    }
    let mut detuned = MultimodeConfig::eigenstate(vec![1, 1], alphas, 2)?;
    detuned.k1 = 0.4;
    let control = eigenstate_residual(&revival_field_state(&detuned, &dims)?, &detuned)?.relative_residual;
    pass &= control >= 0.1;
    outcome(pass, format!("residual {} (≤ 1e-6); control {control:.3} (≥ 0.1)", parts.join(", ")))
}

/// Mirror-position outcomes select near-Fock field states.
fn near_fock_preparation() -> Result<Outcome> {
    let p = ScaledParams::new(1.0, c(2.0), c(2.0))?;
    let at0 = near_fock_state(&p, 0.0, PI, 40)?.state;
    let f1 = fidelity(&at0, &StateVector::basis(vec![40], &[1])?)?;
    let at16 = near_fock_state(&p, 16.0, PI, 40)?.state;
    let w5 = at16.amplitudes()[5].norm_sqr();
    let dominant = at16.amplitudes().iter().map(|z| z.norm_sqr()).enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).map(|p| p.0);
    outcome(
        f1 >= 0.999 && w5 >= 0.99 && dominant == Some(5),
        format!("x=0: F(|1⟩)={f1:.6} (≥ 0.999); x=16: weight(|5⟩)={w5:.6} (≥ 0.99), dominant n={dominant:?}"),
    )
}

/// A field-quadrature outcome leaves the mirror in a cat with negative Wigner values.
fn mirror_cat() -> Result<Outcome> {
    let p = ScaledParams::new(1.0, c(0.8), c(2.0))?;
    // exact in the mirror: the cat is a superposition of coherent branches
    let (cat, _) = mirror_cat_mixture(&p, 0.0, PI, 14)?;
    let grid = coherent_wigner_auto(&cat, &GridSpec::default())?;
    let cert = negativity(&grid, 0.0);
    let half = grid.x.last().copied().unwrap_or(0.0);
    outcome(
        cert.negative,
        format!("min W = {:.4e} at ({:.2}, {:.2}) (< 0), grid ±{half:.1}, mass {:.6}", cert.min, cert.x, cert.y, grid.integral()),
    )
}

/// Damped closed form against the Lindblad integrator on 10×24.
fn damped_vs_lindblad() -> Result<Outcome> {
    let p = ScaledParams::new(0.5, c(1.0), c(0.0))?.with_gamma(0.1)?;
    let trunc = Truncation::new(10, 24).with_tolerance(1.0);
    let rho0 = damped_density(&p, 0.0, &trunc)?.value;
    let mut worst: f64 = 0.0;
    let mut loss: f64 = 0.0;
    for t in [PI, 2.0 * PI] {
        let closed = damped_density(&p, t, &trunc)?;
        loss = loss.max(closed.loss);
        let run = integrate_lindblad(&rho0, &p, t, Picture::Interaction, &IntegratorConfig::default())?;
        worst = worst.max(trace_distance(&closed.value, &run.value)?);
    }
    outcome(
        worst <= 1e-5,
        format!("max trace distance = {worst:.2e} (≤ 1e-5); closed-form truncation loss {loss:.1e}"),
    )
}

/// Closed-form decoherence exponent against direct quadrature.
fn decoherence_integral_identity() -> Result<Outcome> {
    let mut worst: f64 = 0.0;
    for k in [0.5, 1.0] {
        for gamma in [0.1, 1.0] {
            for t in [PI, 2.0 * PI] {
                for n in 0..=6 {
                    for m in 0..=6 {
                        let closed = decoherence_exponent(n, m, k, gamma, t);
                        let quad = decoherence_integral(n, m, k, gamma, t, 4000);
                        worst = worst.max((closed - quad).abs());
                    }
                }
            }
        }
    }
    outcome(worst <= 1e-8, format!("max |D − quadrature| = {worst:.2e} (≤ 1e-8)"))
}

/// Damping leaves the photon-number distribution Poissonian.
fn number_distribution_preserved() -> Result<Outcome> {
    let alpha: f64 = 2.0;
    let dim = 40;
    let mean = alpha * alpha;
    let mut poisson = vec![(-mean).exp()];
    for n in 1..dim {
        let prev = poisson[n - 1];
        poisson.push(prev * mean / n as f64);
    }
    let mut worst: f64 = 0.0;
    for gamma in [0.01, 1.0] {
        let p = ScaledParams::new(0.5, c(alpha), c(0.0))?.with_gamma(gamma)?;
        for j in 0..=16 {
            let t = 2.0 * PI * j as f64 / 16.0;
            let rho = damped_field_density(&p, t, dim, PhaseModel::Exact)?.value;
            for (n, q) in rho.diagonal().iter().enumerate() {
                worst = worst.max((q - poisson[n]).abs());
            }
        }
    }
    outcome(worst <= 1e-10, format!("max |P(n) − Poisson| = {worst:.2e} (≤ 1e-10)"))
}

/// The central interference extremum of the field cat barely notices weak
/// damping and survives strong damping.
fn weak_damping_robustness() -> Result<Outcome> {
    let field = |gamma: f64| -> Result<_> {
        let p = ScaledParams::new(0.5, c(2.0), c(0.0))?.with_gamma(gamma)?;
        let rho = damped_field_density(&p, 2.0 * PI, 40, PhaseModel::Exact)?.value;
        wigner_unchecked(&rho, &GridSpec::default())
    };
    // largest |W| on the strip |x| ≤ 1 between the two components
    let central = |g: &cavmirror::analysis::WignerGrid| {
        let mut best = (0.0f64, 0, 0);
        for (i, &x) in g.x.iter().enumerate() {
            if x.abs() > 1.0 {
                continue;
            }
            for j in 0..g.y.len() {
                if g.values[(i, j)].abs() > best.0.abs() {
                    best = (g.values[(i, j)], i, j);
                }
            }
        }
        best
    };
    let (w0, w_weak, w_strong) = (field(0.0)?, field(0.001)?, field(1.0)?);
    let (v0, i, j) = central(&w0);
    let rel = ((w_weak.values[(i, j)] - v0) / v0).abs();
    let (v_strong, _, _) = central(&w_strong);
    let kept = v_strong.abs() / v0.abs();
    outcome(
        rel < 0.01 && kept >= 1e-3,
        format!(
            "extremum W={v0:.4} at ({:.1}, {:.1}); γ=0.001 change {rel:.2e} (< 1%); γ=1 extremum W={v_strong:.4}, {:.1}% of undamped (nonzero: ≥ 0.1%)",
            w0.x[i],
            w0.y[j],
            100.0 * kept
        ),
    )
}

/// D ∝ k²(n−m)²γ and τ_d ∝ ω_m³.
fn scaling_laws() -> Result<Outcome> {
    let (gamma, t) = (0.3, 7.0);
    let d = decoherence_exponent(3, 1, 0.4, gamma, t);
    let r_k = decoherence_exponent(3, 1, 0.8, gamma, t) / d;
    let r_nm = decoherence_exponent(5, 1, 0.4, gamma, t) / d;
    let base = PhysicalParams::new(1e16, 2.0 * PI * 1e3, 1.0, 1e-5)?;
    let doubled = PhysicalParams { omega_m: 2.0 * base.omega_m, ..base };
    let gamma_abs = 1.0;
    let r_tau = decoherence_timescale(&doubled, gamma_abs)? / decoherence_timescale(&base, gamma_abs)?;
    let pass = (r_k - 4.0).abs() < 1e-12 && (r_nm - 4.0).abs() < 1e-12 && (r_tau / 8.0 - 1.0).abs() <= 0.01;
    outcome(pass, format!("D(2k)/D = {r_k:.12}, D(2Δn)/D = {r_nm:.12} (= 4); τ_d(2ω_m)/τ_d = {r_tau:.5} (8 ± 1%)"))
}

type Check = fn() -> Result<Outcome>;

fn main() {
    let checks: [(&str, Check, Duration); 13] = [
        ("propagator factorization", propagator_factorization, Duration::from_secs(10)),
        ("closed form vs Schrödinger oracle", closed_form_vs_schrodinger, Duration::from_secs(60)),
        ("entanglement cycle", entanglement_cycle, Duration::MAX),
        ("cat identities", cat_identities, Duration::MAX),
        ("two-mode entangled cat", two_mode_entangled_cat, Duration::MAX),
        ("eigenstate property", eigenstate_property, Duration::MAX),
        ("near-Fock preparation", near_fock_preparation, Duration::MAX),
        ("mirror cat negativity", mirror_cat, Duration::MAX),
        ("damped closed form vs Lindblad oracle", damped_vs_lindblad, Duration::from_secs(300)),
        ("decoherence integral identity", decoherence_integral_identity, Duration::MAX),
        ("number distribution preserved", number_distribution_preserved, Duration::MAX),
        ("weak-damping robustness", weak_damping_robustness, Duration::MAX),
        ("scaling laws", scaling_laws, Duration::MAX),
    ];
    let mut failed = Vec::new();
    for (i, (name, check, budget)) in checks.into_iter().enumerate() {
        let id = i + 1;
        let start = Instant::now();
        let result = check();
        let elapsed = start.elapsed();
        let (pass, detail) = match result {
            Ok(o) => (o.pass, o.detail),
            Err(e) => (false, format!("error: {e}")),
        };
        let in_time = elapsed <= budget;
        let pass = pass && in_time;
        let timing = if budget == Duration::MAX {
            format!("{:.2} s", elapsed.as_secs_f64())
        } else {
            format!("{:.2} s, budget {} s", elapsed.as_secs_f64(), budget.as_secs())
        };
        println!("{} {id:>2} {name}: {detail} [{timing}]", if pass { "PASS" } else { "FAIL" });
        if !pass {
            failed.push(id);
        }
    }
    if failed.is_empty() {
        println!("acceptance: all 13 criteria pass");
    } else {
        println!("acceptance: {} of 13 criteria fail: {failed:?}", failed.len());
        std::process::exit(1);
    }
}
