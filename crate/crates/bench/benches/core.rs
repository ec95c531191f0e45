use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use flapper_core::aero::{total_loads, AeroEnvironment, WingKinematicState};
use flapper_core::bio::{StealthModel, TrajectoryParams};
use flapper_core::design::DesignPoint;
use flapper_core::drivetrain::MotorDatabase;
use flapper_core::dynamics::{simulate, Physics, SimConfig, SimOptions};
use flapper_core::geometry::{wing_inertia, WingGeometry};
use flapper_core::optimizers::hypervolume;
use flapper_core::pipeline::{EvaluationSettings, Evaluator};

fn geometry_and_aero(c: &mut Criterion) {
    let g = WingGeometry::from_semi_span(0.075, 0.025e-3, 1100.0).unwrap();
    c.bench_function("wing_inertia 2x10x10", |b| b.iter(|| wing_inertia(black_box(&g)).unwrap()));
    let env = AeroEnvironment::default();
    let kin =
        WingKinematicState { phi: 0.4, theta: 0.3, phi_dot: 150.0, theta_dot: -40.0, phi_ddot: 2e4, theta_ddot: 1e3 };
    c.bench_function("total_loads", |b| b.iter(|| total_loads(black_box(&kin), &g, &env)));
}

fn stealth(c: &mut Criterion) {
    let m = StealthModel::default();
    let t = TrajectoryParams::from_design(&DesignPoint::default());
    c.bench_function("mbsd default design", |b| b.iter(|| m.evaluate(black_box(&t))));
}

fn dynamics(c: &mut Criterion) {
    let db = MotorDatabase::builtin();
    let cfg = SimConfig::new(DesignPoint::default(), Physics::default(), SimOptions::reduced(), &db).unwrap();
    let mut group = c.benchmark_group("simulation");
    group.sample_size(10);
    group.bench_function("simulate reduced", |b| b.iter(|| simulate(black_box(&cfg)).unwrap()));
    let ev = Evaluator::new(EvaluationSettings::reduced(), db.clone()).unwrap();
    group.bench_function("evaluate reduced", |b| b.iter(|| ev.evaluate(black_box(&DesignPoint::default()))));
    group.finish();
}

fn optimisers(c: &mut Criterion) {
    let pts: Vec<Vec<f64>> = (0..200)
        .map(|i| {
            let x = i as f64 / 199.0 * 2.0;
            vec![x * x, (x - 2.0).powi(2)]
        })
        .collect();
    c.bench_function("hypervolume 2d, 200 points", |b| b.iter(|| hypervolume(black_box(&pts), &[5.0, 5.0])));
}

criterion_group!(benches, geometry_and_aero, stealth, dynamics, optimisers);
criterion_main!(benches);
