use criterion::{black_box, criterion_group, criterion_main, Criterion};
use layersolve::{
    assemble_hybrid, builtin_problem_2, double_mesh_error, generalized_shishkin, solve,
    thomas_solve, LStrategy, MeshOptions, Scheme,
};

fn bench_thomas(c: &mut Criterion) {
    let problem = builtin_problem_2(3).unwrap();
    let eps = 2f64.powi(-12);
    let mesh = generalized_shishkin(512, eps, 2.0, &problem, LStrategy::LogN).unwrap();
    let u_prev = vec![1.0; 513];
    let sys = assemble_hybrid(&problem, &mesh, eps, 1.0 / 512.0, &u_prev, 1.0 / 512.0).unwrap();
    c.bench_function("thomas_solve_n512", |b| {
        b.iter(|| thomas_solve(black_box(&sys)).unwrap())
    });
}

fn bench_assembly(c: &mut Criterion) {
    let problem = builtin_problem_2(3).unwrap();
    let eps = 2f64.powi(-12);
    let mesh = generalized_shishkin(512, eps, 2.0, &problem, LStrategy::LogN).unwrap();
    let u_prev = vec![1.0; 513];
    c.bench_function("assemble_hybrid_n512", |b| {
        b.iter(|| {
            assemble_hybrid(
                black_box(&problem),
                black_box(&mesh),
                eps,
                1.0 / 512.0,
                black_box(&u_prev),
                1.0 / 512.0,
            )
            .unwrap()
        })
    });
}

fn bench_solve(c: &mut Criterion) {
    let problem = builtin_problem_2(3).unwrap();
    let opts = MeshOptions::default();
    c.bench_function("solve_hybrid_n64_m64", |b| {
        b.iter(|| {
            solve(
                black_box(&problem),
                Scheme::HybridGeneralizedShishkin,
                64,
                64,
                2f64.powi(-10),
                &opts,
            )
            .unwrap()
        })
    });
}

fn bench_double_mesh_cell(c: &mut Criterion) {
    let problem = builtin_problem_2(3).unwrap();
    let opts = MeshOptions::default();
    c.bench_function("double_mesh_cell_n32_m1024", |b| {
        b.iter(|| {
            double_mesh_error(
                black_box(&problem),
                Scheme::HybridGeneralizedShishkin,
                32,
                1024,
                2f64.powi(-16),
                &opts,
            )
            .unwrap()
        })
    });
}

criterion_group!(benches, bench_thomas, bench_assembly, bench_solve, bench_double_mesh_cell);
criterion_main!(benches);
