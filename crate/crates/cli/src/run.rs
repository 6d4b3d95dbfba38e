//! Executes a validated [`Plan`] and collects artifacts and summary notes.

use std::f64::consts::PI;
use std::fmt;
use std::time::{Duration, Instant};

use cavmirror::analysis::{
    coherent_wigner, coherent_wigner_auto, entropy_curve, negativity, wigner, wigner_auto, CoherentMixture,
    EntropyScenario, WignerGrid,
};
use cavmirror::catalog::{cat_superposition, eigenstate_residual, zeta_state};
use cavmirror::decoherence::{
    damped_density, damped_field_density, damped_mirror_mixture, decoherence_exponent, decoherence_timescale, PhaseModel,
};
use cavmirror::evolution::{
    field_density, joint_state, mirror_density, mirror_mixture, multimode_joint_state, propagator_matrix, revival_field_state, Picture,
};
use cavmirror::fock::coherent_amplitudes;
use cavmirror::measurement::{
    damped_mirror_cat, damped_mirror_cat_mixture, mirror_cat_mixture, mirror_cat_state, near_fock_state,
};
use cavmirror::oracle::{
    decoherence_integral, dense_propagator, integrate_lindblad, integrate_schrodinger, operator_norm, IntegratorConfig,
};
use cavmirror::{fidelity, trace_distance, DensityOperator, StateVector};
use rayon::prelude::*;

use crate::output::{self, Artifact, Header};
use crate::scenario::{Case, CatName, Mode, OracleKind, OracleSettings, Plan, Subsystem};

/// A failed computation, with the case and time it belongs to.
#[derive(Debug, Clone, PartialEq)]
pub struct RunError(pub String);

impl fmt::Display for RunError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.0)
    }
}

impl std::error::Error for RunError {}

type Result<T> = std::result::Result<T, RunError>;

fn ctx(what: String) -> impl FnOnce(cavmirror::Error) -> RunError {
    move |e| RunError(format!("{what}: {e}"))
}

/// Results of one parameter case (or the single multimode run).
#[derive(Debug, Clone)]
pub struct CaseReport {
    pub label: String,
    pub artifacts: Vec<Artifact>,
    pub notes: Vec<String>,
    /// Largest truncation loss met, before renormalization.
    pub loss: f64,
    pub elapsed: Duration,
}

#[derive(Debug, Default)]
struct Piece {
    artifacts: Vec<Artifact>,
    notes: Vec<String>,
    loss: f64,
}

impl Piece {
    fn absorb(&mut self, other: Piece) {
        self.artifacts.extend(other.artifacts);
        self.notes.extend(other.notes);
        self.loss = self.loss.max(other.loss);
    }
}

struct Ctx<'a> {
    plan: &'a Plan,
    case: &'a Case,
}

impl Ctx<'_> {
    fn file(&self, kind: &str, t: Option<usize>, x: Option<usize>) -> String {
        let mut name = self.plan.outputs.prefix.clone();
        if !self.case.label.is_empty() {
            name.push('_');
            name.push_str(&self.case.label);
        }
        name.push('_');
        name.push_str(kind);
        if let Some(i) = t {
            name.push_str(&format!("_t{i}"));
        }
        if let Some(j) = x {
            name.push_str(&format!("_x{j}"));
        }
        name + ".csv"
    }

    fn header(&self) -> Header {
        let p = &self.case.params;
        let mut h = Header::new()
            .set("scenario", &self.plan.name)
            .set("mode", self.plan.mode.as_str());
        if !self.case.label.is_empty() {
            h = h.set("case", &self.case.label);
        }
        h.set("k", p.k)
            .set("r", p.r)
            .set("gamma", p.gamma)
            .complex("alpha", p.alpha)
            .complex("beta", p.beta)
            .set("field_dim", self.case.trunc.field)
            .set("mirror_dim", self.case.trunc.mirror)
    }

    fn where_(&self, t: f64) -> String {
        if self.case.label.is_empty() {
            format!("t = {t}")
        } else {
            format!("case {}, t = {t}", self.case.label)
        }
    }
}

fn grid_header(h: Header, g: &WignerGrid) -> Header {
    h.set("grid_x", format!("[{}, {}] x {}", g.x[0], g.x[g.x.len() - 1], g.x.len()))
        .set("grid_y", format!("[{}, {}] x {}", g.y[0], g.y[g.y.len() - 1], g.y.len()))
}

fn wigner_of(plan: &Plan, rho: &DensityOperator) -> cavmirror::Result<WignerGrid> {
    if plan.auto_widen {
        wigner_auto(rho, &plan.grid)
    } else {
        wigner(rho, &plan.grid)
    }
}

/// Exact Wigner function of a state written on coherent branches.
fn coherent_wigner_of(plan: &Plan, state: &CoherentMixture) -> cavmirror::Result<WignerGrid> {
    if plan.auto_widen {
        coherent_wigner_auto(state, &plan.grid)
    } else {
        coherent_wigner(state, &plan.grid)
    }
}

fn wigner_note(tag: &str, g: &WignerGrid) -> String {
    let cert = negativity(g, 0.0);
    format!(
        "{tag}: min W = {:.6e} at ({}, {}){}, grid mass {:.9}",
        cert.min,
        cert.x,
        cert.y,
        if cert.negative { " (negative)" } else { "" },
        g.integral()
    )
}

fn cat_state(name: CatName, case: &Case, dim: usize) -> cavmirror::Result<StateVector> {
    let alpha = case.params.alpha;
    match name.spec(alpha) {
        Some(spec) => cat_superposition(&spec, dim),
        None => Ok(zeta_state(alpha, case.params.k, dim, 1.0)?.value),
    }
}

fn compare_note(c: &Ctx, rho: &DensityOperator, tag: &str) -> Result<Option<String>> {
    if c.plan.compare.is_empty() {
        return Ok(None);
    }
    let mut parts = Vec::new();
    for &name in &c.plan.compare {
        let cat = cat_state(name, c.case, rho.dim()).map_err(ctx(format!("{tag}: catalog state")))?;
        let f = fidelity(rho, &cat).map_err(ctx(format!("{tag}: fidelity")))?;
        parts.push(format!("{} {f:.12}", name.as_str()));
    }
    Ok(Some(format!("{tag}: fidelity to {}", parts.join(", "))))
}

fn max_poisson_gap(rho: &DensityOperator, case: &Case) -> f64 {
    let want = coherent_amplitudes(case.params.alpha, rho.dim());
    rho.diagonal().iter().zip(want).map(|(q, c)| (q - c.norm_sqr()).abs()).fold(0.0, f64::max)
}

/// Run `f` for every time (in parallel), keeping time order.
fn over_times(times: &[f64], f: impl Fn(usize, f64) -> Result<Piece> + Sync) -> Result<Piece> {
    let pieces: Vec<Result<Piece>> = times.par_iter().enumerate().map(|(i, &t)| f(i, t)).collect();
    let mut out = Piece::default();
    for p in pieces {
        out.absorb(p?);
    }
    Ok(out)
}

fn over_times_and_outcomes(plan: &Plan, f: impl Fn(usize, f64, usize, f64) -> Result<Piece> + Sync) -> Result<Piece> {
    let jobs: Vec<(usize, f64, usize, f64)> = plan
        .times
        .iter()
        .enumerate()
        .flat_map(|(i, &t)| plan.xs.iter().enumerate().map(move |(j, &x)| (i, t, j, x)))
        .collect();
    let pieces: Vec<Result<Piece>> = jobs.par_iter().map(|&(i, t, j, x)| f(i, t, j, x)).collect();
    let mut out = Piece::default();
    for p in pieces {
        out.absorb(p?);
    }
    Ok(out)
}

fn integrator(o: &OracleSettings) -> IntegratorConfig {
    IntegratorConfig::adaptive(o.atol, o.rtol)
}

fn evolve(c: &Ctx) -> Result<Piece> {
    let (p, trunc) = (&c.case.params, &c.case.trunc);
    let mut out = over_times(&c.plan.times, |i, t| {
        let mut piece = Piece::default();
        let js = joint_state(p, t, trunc).map_err(ctx(c.where_(t)))?;
        piece.loss = js.loss;
        piece.notes.push(format!("{}: joint state loss {:.3e}, norm {:.15}", c.where_(t), js.loss, js.value.norm()));
        if c.plan.outputs.states {
            let h = c.header().set("t", t);
            piece.artifacts.push(Artifact { file: c.file("state", Some(i), None), contents: output::state_csv(&h, &js.value) });
        }
        if !c.plan.compare.is_empty() {
            let rho = js.value.reduced(&[0]).map_err(ctx(c.where_(t)))?;
            piece.notes.extend(compare_note(c, &rho, &c.where_(t))?);
        }
        Ok(piece)
    })?;
    match &c.plan.oracle {
        Some(o) if o.kind == OracleKind::Integrate => {
            let mut psi = joint_state(p, 0.0, trunc).map_err(ctx(c.where_(0.0)))?.value;
            let mut order: Vec<f64> = c.plan.times.clone();
            order.sort_by(f64::total_cmp);
            let (mut now, mut worst) = (0.0, 1.0f64);
            for t in order {
                let run = integrate_schrodinger(&psi, p, t - now, Picture::Interaction, &integrator(o))
                    .map_err(ctx(format!("oracle, {}", c.where_(t))))?;
                psi = run.value;
                now = t;
                let closed = joint_state(p, t, trunc).map_err(ctx(c.where_(t)))?.value;
                worst = worst.min(fidelity(&closed, &psi).map_err(ctx(c.where_(t)))?);
            }
            out.notes.push(format!("oracle (Schrödinger): min fidelity = 1 − {:.3e}", (1.0 - worst).max(0.0)));
        }
        Some(o) => {
            let mut worst = 0.0f64;
            for &t in &c.plan.times {
                let dense = dense_propagator(p, t, trunc, Picture::Full, o.pad).map_err(ctx(c.where_(t)))?;
                let fact = propagator_matrix(p, t, trunc, Picture::Full);
                worst = worst.max(operator_norm(&(dense - fact)));
            }
            out.notes.push(format!("oracle (dense exponential, pad {}): max ‖U_fact − exp(−iHt)‖ = {worst:.3e}", o.pad));
        }
        None => {}
    }
    Ok(out)
}

fn damped(c: &Ctx) -> Result<Piece> {
    let (p, trunc) = (&c.case.params, &c.case.trunc);
    let n_max = c.plan.decoherence_n_max;
    let mut out = over_times(&c.plan.times, |i, t| {
        let mut piece = Piece::default();
        let rho = damped_field_density(p, t, trunc.field, PhaseModel::Exact).map_err(ctx(c.where_(t)))?;
        piece.loss = rho.loss;
        let gap = max_poisson_gap(&rho.value, c.case);
        piece.notes.push(format!(
            "{}: field loss {:.3e}, purity {:.12}, max |P(n) − Poisson| = {gap:.3e}",
            c.where_(t),
            rho.loss,
            rho.value.purity()
        ));
        let h = c.header().set("t", t);
        if c.plan.outputs.states {
            piece.artifacts.push(Artifact { file: c.file("density", Some(i), None), contents: output::density_csv(&h, &rho.value) });
        }
        if c.plan.outputs.number {
            let p = rho.value.diagonal();
            piece.artifacts.push(Artifact { file: c.file("number", Some(i), None), contents: output::number_csv(&h, &p) });
        }
        if c.plan.outputs.wigner {
            let g = wigner_of(c.plan, &rho.value).map_err(ctx(c.where_(t)))?;
            piece.notes.push(wigner_note(&c.where_(t), &g));
            piece.artifacts.push(Artifact { file: c.file("wigner", Some(i), None), contents: output::wigner_csv(&grid_header(h.clone(), &g), &g) });
        }
        if n_max > 0 {
            let mut table = Vec::new();
            let mut gap = 0.0f64;
            for n in 0..=n_max {
                for m in 0..=n_max {
                    let d = decoherence_exponent(n, m, p.k, p.gamma, t);
                    if c.plan.decoherence_quadrature {
                        let q = decoherence_integral(n, m, p.k, p.gamma, t, c.plan.decoherence_steps);
                        gap = gap.max((d - q).abs());
                    }
                    table.push((n, m, d));
                }
            }
            if c.plan.decoherence_quadrature {
                piece.notes.push(format!("{}: max |D − quadrature| = {gap:.3e}", c.where_(t)));
            }
            piece.artifacts.push(Artifact { file: c.file("decoherence", Some(i), None), contents: output::decoherence_csv(&h, &table) });
        }
        Ok(piece)
    })?;
    if let Some(o) = &c.plan.oracle {
        let rho0 = damped_density(p, 0.0, trunc).map_err(ctx(c.where_(0.0)))?.value;
        let mut order = c.plan.times.clone();
        order.sort_by(f64::total_cmp);
        let (mut rho, mut now, mut worst) = (rho0, 0.0, 0.0f64);
        for t in order {
            rho = integrate_lindblad(&rho, p, t - now, Picture::Interaction, &integrator(o))
                .map_err(ctx(format!("oracle, {}", c.where_(t))))?
                .value;
            now = t;
            let closed = damped_density(p, t, trunc).map_err(ctx(c.where_(t)))?;
            out.loss = out.loss.max(closed.loss);
            worst = worst.max(trace_distance(&closed.value, &rho).map_err(ctx(c.where_(t)))?);
        }
        out.notes.push(format!(
            "oracle (Lindblad on {}×{}): max trace distance = {worst:.3e}",
            trunc.field, trunc.mirror
        ));
    }
    Ok(out)
}

fn measure_mirror(c: &Ctx) -> Result<Piece> {
    let p = &c.case.params;
    over_times_and_outcomes(c.plan, |i, t, j, x| {
        let at = format!("{}, x = {x}", c.where_(t));
        let proj = near_fock_state(p, x, t, c.case.trunc.field).map_err(ctx(at.clone()))?;
        let probs: Vec<f64> = proj.state.amplitudes().iter().map(|z| z.norm_sqr()).collect();
        let (n, w) = probs.iter().copied().enumerate().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap_or((0, 0.0));
        let mut piece = Piece::default();
        piece.notes.push(format!("{at}: outcome density {:.6e}, dominant n = {n} with weight {w:.9}", proj.record.norm));
        let h = c.header().set("t", t).set("x", x).set("measured", "mirror position");
        if c.plan.outputs.states {
            piece.artifacts.push(Artifact { file: c.file("state", Some(i), Some(j)), contents: output::state_csv(&h, &proj.state) });
        }
        if c.plan.outputs.number {
            piece.artifacts.push(Artifact { file: c.file("number", Some(i), Some(j)), contents: output::number_csv(&h, &probs) });
        }
        if c.plan.outputs.wigner {
            let g = wigner_of(c.plan, &proj.state.to_density()).map_err(ctx(at.clone()))?;
            piece.notes.push(wigner_note(&at, &g));
            piece.artifacts.push(Artifact { file: c.file("wigner", Some(i), Some(j)), contents: output::wigner_csv(&grid_header(h, &g), &g) });
        }
        Ok(piece)
    })
}

fn measure_field(c: &Ctx) -> Result<Piece> {
    let (p, trunc) = (&c.case.params, &c.case.trunc);
    over_times_and_outcomes(c.plan, |i, t, j, x| {
        let at = format!("{}, x = {x}", c.where_(t));
        let h = c.header().set("t", t).set("x", x).set("measured", "field quadrature");
        let mut piece = Piece::default();
        // The Wigner function comes from the exact coherent-branch form; the
        // Fock-basis state is only built when it is written out.
        let cat = if p.gamma > 0.0 {
            let (cat, record) = damped_mirror_cat_mixture(p, x, t, trunc.field).map_err(ctx(at.clone()))?;
            piece.notes.push(format!("{at}: outcome density {:.6e}, mirror purity {:.9}", record.norm, cat.purity()));
            if c.plan.outputs.states {
                let (rho, _) = damped_mirror_cat(p, x, t, trunc.field, trunc.mirror).map_err(ctx(at.clone()))?;
                piece.artifacts.push(Artifact { file: c.file("density", Some(i), Some(j)), contents: output::density_csv(&h, &rho) });
            }
            cat
        } else {
            let (cat, record) = mirror_cat_mixture(p, x, t, trunc.field).map_err(ctx(at.clone()))?;
            piece.notes.push(format!("{at}: outcome density {:.6e}", record.norm));
            if c.plan.outputs.states {
                let proj = mirror_cat_state(p, x, t, trunc.field, trunc.mirror, trunc.tolerance).map_err(ctx(at.clone()))?;
                piece.artifacts.push(Artifact { file: c.file("state", Some(i), Some(j)), contents: output::state_csv(&h, &proj.state) });
            }
            cat
        };
        if c.plan.outputs.wigner {
            let g = coherent_wigner_of(c.plan, &cat).map_err(ctx(at.clone()))?;
            piece.notes.push(wigner_note(&at, &g));
            piece.artifacts.push(Artifact { file: c.file("wigner", Some(i), Some(j)), contents: output::wigner_csv(&grid_header(h, &g), &g) });
        }
        Ok(piece)
    })
}

/// Exact coherent-branch form of the reduced mirror state.
fn mirror_branches(c: &Ctx, t: f64) -> cavmirror::Result<CoherentMixture> {
    let p = &c.case.params;
    if p.gamma > 0.0 {
        damped_mirror_mixture(p, t, c.case.trunc.field)
    } else {
        mirror_mixture(p, t, c.case.trunc.field)
    }
}

/// The state the wigner and density modes report at time `t`.
fn subsystem_state(c: &Ctx, t: f64, subsystem: Subsystem) -> cavmirror::Result<(DensityOperator, f64)> {
    let (p, trunc) = (&c.case.params, &c.case.trunc);
    let damped = p.gamma > 0.0;
    Ok(match (subsystem, damped) {
        (Subsystem::Field, false) => {
            let r = field_density(p, t, trunc.field)?;
            (r.value, r.loss)
        }
        (Subsystem::Field, true) => {
            let r = damped_field_density(p, t, trunc.field, PhaseModel::Exact)?;
            (r.value, r.loss)
        }
        (Subsystem::Mirror, false) => {
            let r = mirror_density(p, t, trunc.field, trunc.mirror)?;
            (r.value, r.loss)
        }
        (Subsystem::Mirror, true) => {
            let r = damped_density(p, t, trunc)?;
            (r.value.partial_trace(&[1])?, r.loss)
        }
        (Subsystem::Joint, false) => {
            let r = joint_state(p, t, trunc)?;
            (r.value.to_density(), r.loss)
        }
        (Subsystem::Joint, true) => {
            let r = damped_density(p, t, trunc)?;
            (r.value, r.loss)
        }
    })
}

fn subsystem_name(s: Subsystem) -> &'static str {
    match s {
        Subsystem::Field => "field",
        Subsystem::Mirror => "mirror",
        Subsystem::Joint => "joint",
    }
}

fn wigner_mode(c: &Ctx) -> Result<Piece> {
    let sub = c.plan.subsystem;
    over_times(&c.plan.times, |i, t| {
        let h = c.header().set("t", t).set("subsystem", subsystem_name(sub));
        let mut piece = Piece::default();
        // Mirror states are exact mixtures of coherent branches; their Fock
        // form is only needed for the density file and comparisons.
        let needs_fock = sub != Subsystem::Mirror || c.plan.outputs.states || !c.plan.compare.is_empty();
        let rho = if needs_fock {
            let (rho, loss) = subsystem_state(c, t, sub).map_err(ctx(c.where_(t)))?;
            piece.loss = loss;
            Some(rho)
        } else {
            None
        };
        let g = match &rho {
            Some(rho) if sub != Subsystem::Mirror => wigner_of(c.plan, rho),
            _ => coherent_wigner_of(c.plan, &mirror_branches(c, t).map_err(ctx(c.where_(t)))?),
        }
        .map_err(ctx(c.where_(t)))?;
        piece.notes.push(wigner_note(&c.where_(t), &g));
        if let Some(rho) = &rho {
            piece.notes.extend(compare_note(c, rho, &c.where_(t))?);
            if c.plan.outputs.states {
                piece.artifacts.push(Artifact { file: c.file("density", Some(i), None), contents: output::density_csv(&h, rho) });
            }
        }
        if c.plan.outputs.wigner {
            piece.artifacts.push(Artifact { file: c.file("wigner", Some(i), None), contents: output::wigner_csv(&grid_header(h, &g), &g) });
        }
        Ok(piece)
    })
}

fn density_mode(c: &Ctx) -> Result<Piece> {
    let sub = c.plan.subsystem;
    over_times(&c.plan.times, |i, t| {
        let (rho, loss) = subsystem_state(c, t, sub).map_err(ctx(c.where_(t)))?;
        let mut piece = Piece { loss, ..Piece::default() };
        piece.notes.push(format!(
            "{}: {} loss {loss:.3e}, trace {:.15}, purity {:.12}",
            c.where_(t),
            subsystem_name(sub),
            rho.trace(),
            rho.purity()
        ));
        piece.notes.extend(compare_note(c, &rho, &c.where_(t))?);
        let h = c.header().set("t", t).set("subsystem", subsystem_name(sub));
        if c.plan.outputs.states {
            piece.artifacts.push(Artifact { file: c.file("density", Some(i), None), contents: output::density_csv(&h, &rho) });
        }
        if c.plan.outputs.number && sub != Subsystem::Joint {
            piece.artifacts.push(Artifact { file: c.file("number", Some(i), None), contents: output::number_csv(&h, &rho.diagonal()) });
        }
        if c.plan.outputs.wigner && sub != Subsystem::Joint {
            let g = if sub == Subsystem::Mirror {
                coherent_wigner_of(c.plan, &mirror_branches(c, t).map_err(ctx(c.where_(t)))?)
            } else {
                wigner_of(c.plan, &rho)
            }
            .map_err(ctx(c.where_(t)))?;
            piece.notes.push(wigner_note(&c.where_(t), &g));
            piece.artifacts.push(Artifact { file: c.file("wigner", Some(i), None), contents: output::wigner_csv(&grid_header(h, &g), &g) });
        }
        Ok(piece)
    })
}

fn entropy_mode(c: &Ctx) -> Result<Piece> {
    let scenario = EntropyScenario { params: c.case.params, trunc: c.case.trunc };
    let curve = entropy_curve(&scenario, &c.plan.times).map_err(ctx(c.where_(c.plan.times[0])))?;
    let (t_max, s_max) = curve.iter().copied().max_by(|a, b| a.1.total_cmp(&b.1)).unwrap_or((0.0, 0.0));
    let (t_end, s_end) = curve.last().copied().unwrap_or((0.0, 0.0));
    let tag = if c.case.label.is_empty() { String::new() } else { format!("case {}: ", c.case.label) };
    Ok(Piece {
        artifacts: vec![Artifact { file: c.file("entropy", None, None), contents: output::entropy_csv(&c.header(), &curve) }],
        notes: vec![format!("{tag}max S = {s_max:.9} at t = {t_max:.6}; S({t_end:.6}) = {s_end:.3e}")],
        loss: 0.0,
    })
}

fn multimode(plan: &Plan) -> Result<CaseReport> {
    let start = Instant::now();
    let mm = plan.multimode.as_ref().expect("validated multimode plan");
    let times = if plan.times.is_empty() { vec![2.0 * PI] } else { plan.times.clone() };
    let n = mm.config.n_modes();
    let fields: Vec<usize> = (0..n).collect();
    let header = || {
        Header::new()
            .set("scenario", &plan.name)
            .set("mode", plan.mode.as_str())
            .set("etas", format!("{:?}", mm.config.etas))
            .set("k1", mm.config.k1)
            .set(
                "alphas",
                format!("[{}]", mm.config.alphas.iter().map(|a| format!("[{}, {}]", a.re, a.im)).collect::<Vec<_>>().join(", ")),
            )
            .complex("beta", mm.beta)
            .set("field_dims", format!("{:?}", mm.trunc.field))
            .set("mirror_dim", mm.trunc.mirror)
    };
    let piece = over_times(&times, |i, t| {
        let js = multimode_joint_state(&mm.config, mm.beta, t, &mm.trunc).map_err(ctx(format!("t = {t}")))?;
        let mut piece = Piece { loss: js.loss, ..Piece::default() };
        let purity = js.value.reduced(&fields).map_err(ctx(format!("t = {t}")))?.purity();
        let mut note = format!("t = {t}: loss {:.3e}, field–mirror purity {purity:.12}", js.loss);
        if n > 1 {
            let p1 = js.value.reduced(&[0]).map_err(ctx(format!("t = {t}")))?.purity();
            note.push_str(&format!(", mode-0 purity {p1:.12}"));
        }
        piece.notes.push(note);
        if plan.outputs.states {
            let file = format!("{}_state_t{i}.csv", plan.outputs.prefix);
            piece.artifacts.push(Artifact { file, contents: output::state_csv(&header().set("t", t), &js.value) });
        }
        Ok(piece)
    })?;
    let mut notes = piece.notes;
    if mm.config.p.is_some() {
        let state = revival_field_state(&mm.config, &mm.trunc.field).map_err(ctx("revival state".into()))?;
        let r = eigenstate_residual(&state, &mm.config).map_err(ctx("eigenstate check".into()))?;
        notes.push(format!(
            "revival state: relative residual {:.3e} against (a_1⋯a_N)^{} over {} guarded components",
            r.relative_residual,
            mm.config.p.unwrap_or(0),
            r.guarded_components
        ));
    }
    Ok(CaseReport { label: String::new(), artifacts: piece.artifacts, notes, loss: piece.loss, elapsed: start.elapsed() })
}

/// Run every case of `plan` (concurrently) and return the reports in case
/// order.
pub fn execute(plan: &Plan) -> Result<Vec<CaseReport>> {
    if plan.mode == Mode::Multimode {
        return Ok(vec![multimode(plan)?]);
    }
    let reports: Vec<Result<CaseReport>> = plan
        .cases
        .par_iter()
        .map(|case| {
            let start = Instant::now();
            let c = Ctx { plan, case };
            let piece = match plan.mode {
                Mode::Evolve => evolve(&c),
                Mode::Damped => damped(&c),
                Mode::MeasureMirror => measure_mirror(&c),
                Mode::MeasureField => measure_field(&c),
                Mode::Wigner => wigner_mode(&c),
                Mode::Density => density_mode(&c),
                Mode::Entropy => entropy_mode(&c),
                Mode::Multimode => unreachable!("handled above"),
            }?;
            Ok(CaseReport {
                label: case.label.clone(),
                artifacts: piece.artifacts,
                notes: piece.notes,
                loss: piece.loss,
                elapsed: start.elapsed(),
            })
        })
        .collect();
    reports.into_iter().collect()
}

/// Notes that do not depend on a case: the decoherence time for laboratory
/// parameters.
pub fn global_notes(plan: &Plan) -> Result<Vec<String>> {
    let mut notes = Vec::new();
    if let Some((phys, Some(gamma_abs))) = &plan.physical {
        let tau = decoherence_timescale(phys, *gamma_abs).map_err(ctx("decoherence timescale".into()))?;
        notes.push(format!("decoherence time τ_d = {tau:.6e} s (D(0,1) = 1 at Γ = {gamma_abs} s⁻¹)"));
    }
    Ok(notes)
}
