use std::f64::consts::PI;
use std::hint::black_box;

use cavmirror::analysis::{coherent_wigner_unchecked, entropy_curve, wigner_unchecked, EntropyScenario, GridSpec};
use cavmirror::decoherence::{damped_density, damped_field_density, PhaseModel};
use cavmirror::evolution::{field_density, joint_state, mirror_mixture, Picture};
use cavmirror::oracle::{integrate_lindblad, integrate_schrodinger, IntegratorConfig};
use cavmirror::{ScaledParams, Truncation, C64};
use criterion::{criterion_group, criterion_main, Criterion};

fn params(k: f64, alpha: f64, beta: f64) -> ScaledParams {
    ScaledParams::new(k, C64::new(alpha, 0.0), C64::new(beta, 0.0)).unwrap()
}

fn closed_form(c: &mut Criterion) {
    let p = params(0.2, 2.0, 2.0);
    let trunc = Truncation::for_coherent_dynamics(p.k, p.alpha, p.beta, 1e-12);
    c.bench_function("joint_state 26x157", |b| b.iter(|| joint_state(black_box(&p), 1.3, &trunc).unwrap()));

    let scenario = EntropyScenario { params: params(0.5, 2.0, 2.0), trunc };
    let times: Vec<f64> = (0..200).map(|i| 2.0 * PI * i as f64 / 199.0).collect();
    c.bench_function("entropy_curve 200 points", |b| b.iter(|| entropy_curve(black_box(&scenario), &times).unwrap()));

    let damped = params(0.5, 2.0, 0.0).with_gamma(0.1).unwrap();
    c.bench_function("damped_field_density dim 40", |b| {
        b.iter(|| damped_field_density(black_box(&damped), 2.0 * PI, 40, PhaseModel::Exact).unwrap())
    });
}

fn wigner(c: &mut Criterion) {
    let mut g = c.benchmark_group("wigner 121x121");
    g.sample_size(10);
    let p = params(0.5, 2.0, 0.0);
    let field = field_density(&p, 2.0 * PI, 40).unwrap().value;
    let spec = GridSpec::default();
    g.bench_function("fock dim 40", |b| b.iter(|| wigner_unchecked(black_box(&field), &spec).unwrap()));
    let mirror = mirror_mixture(&params(0.5, 2.0, 2.0), PI, 26).unwrap();
    g.bench_function("coherent mixture of 26", |b| b.iter(|| coherent_wigner_unchecked(black_box(&mirror), &spec).unwrap()));
    g.finish();
}

fn oracles(c: &mut Criterion) {
    let mut g = c.benchmark_group("oracle");
    g.sample_size(10);
    let p = params(0.3, 0.8, 0.5);
    let trunc = Truncation::for_coherent_dynamics(p.k, p.alpha, p.beta, 1e-10);
    let psi0 = joint_state(&p, 0.0, &trunc).unwrap().value;
    let cfg = IntegratorConfig::adaptive(1e-10, 1e-10);
    g.bench_function(format!("schrodinger {}x{} to pi", trunc.field, trunc.mirror), |b| {
        b.iter(|| integrate_schrodinger(black_box(&psi0), &p, PI, Picture::Interaction, &cfg).unwrap())
    });
    let pd = params(0.3, 0.8, 0.0).with_gamma(0.2).unwrap();
    let small = Truncation::new(5, 10).with_tolerance(1.0);
    let rho0 = damped_density(&pd, 0.0, &small).unwrap().value;
    g.bench_function("lindblad 5x10 to pi", |b| {
        b.iter(|| integrate_lindblad(black_box(&rho0), &pd, PI, Picture::Interaction, &cfg).unwrap())
    });
    g.finish();
}

criterion_group!(benches, closed_form, wigner, oracles);
criterion_main!(benches);
