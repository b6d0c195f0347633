use criterion::{black_box, criterion_group, criterion_main, Criterion};
use pm4dof::{
    fk_full_11, fk_reduced, ik_active, ik_full, jacobian_phi, singularity_proximity, GeometricParams, Pose,
    SolverSettings,
};

fn kinematics(c: &mut Criterion) {
    let g = GeometricParams::default();
    let pose = Pose::from_degrees(0.04, 0.70, 6.0, 4.0);
    let q = ik_active(&pose, &g).unwrap();
    let settings = SolverSettings::default();

    c.bench_function("ik_active", |b| b.iter(|| ik_active(black_box(&pose), &g)));
    c.bench_function("ik_full", |b| b.iter(|| ik_full(black_box(&pose), &g)));
    c.bench_function("jacobian_phi", |b| b.iter(|| jacobian_phi(black_box(&pose), &g)));
    c.bench_function("singularity_proximity", |b| b.iter(|| singularity_proximity(black_box(&pose), &g)));
    c.bench_function("fk_reduced/home_guess", |b| b.iter(|| fk_reduced(black_box(&q), &g, &settings)));
    c.bench_function("fk_full_11/home_guess", |b| b.iter(|| fk_full_11(black_box(&q), &g, &settings)));
}

criterion_group!(benches, kinematics);
criterion_main!(benches);
