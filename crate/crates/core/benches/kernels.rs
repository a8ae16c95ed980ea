//! Kernel timings. With the `parallel` feature each kernel runs on the
//! default rayon pool and on a one-thread pool; without it only the
//! sequential build is measured.

use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use twophase::acf::phi_of;
use twophase::field::{l2_ball_norm, CoefficientKind, CoefficientModel};
use twophase::solver::{continuation_solve, weak_residual, BoundaryData};
use twophase::{par, Grid, ScalarField, TwoPhaseProblem};

fn hoelder_problem() -> TwoPhaseProblem {
    let lam = 0.4;
    let coeff = |a0| {
        CoefficientModel::new(CoefficientKind::Hoelder { a0, c: 0.25, x0: [0.0; 3], alpha: 0.5 }, lam).unwrap()
    };
    let bd = BoundaryData::TwoPlane { beta: 1.0, nu: [1.0, 0.0, 0.0] };
    TwoPhaseProblem::new(coeff(2.0), coeff(1.0), bd, lam).unwrap()
}

fn backends() -> Vec<(&'static str, Option<usize>)> {
    if par::is_parallel() {
        vec![("rayon", None), ("one-thread", Some(1))]
    } else {
        vec![("sequential", None)]
    }
}

fn run_on<R: Send>(threads: Option<usize>, f: impl FnOnce() -> R + Send) -> R {
    #[cfg(feature = "parallel")]
    if let Some(n) = threads {
        return rayon::ThreadPoolBuilder::new().num_threads(n).build().unwrap().install(f);
    }
    let _ = threads;
    f()
}

fn kernels(c: &mut Criterion) {
    let problem = hoelder_problem();
    for cells in [128usize, 256] {
        let g = Grid::new(2, 1.0, cells).unwrap();
        let u = problem.boundary_field(&g);
        let w = ScalarField::from_fn(g, |x| x[0] * x[1]);
        let mut group = c.benchmark_group(format!("kernels/{cells}"));
        for (name, threads) in backends() {
            group.bench_function(BenchmarkId::new("weak_residual", name), |b| {
                b.iter(|| run_on(threads, || weak_residual(black_box(&u), &problem, 0.05)))
            });
            group.bench_function(BenchmarkId::new("phi", name), |b| {
                b.iter(|| run_on(threads, || phi_of(black_box(&u), &[0.0; 3], 0.5).unwrap()))
            });
            group.bench_function(BenchmarkId::new("l2_ball", name), |b| {
                b.iter(|| run_on(threads, || l2_ball_norm(black_box(&w), &[0.0; 3], 0.5).unwrap()))
            });
            group.bench_function(BenchmarkId::new("dot", name), |b| {
                b.iter(|| run_on(threads, || par::dot(black_box(u.values()), w.values())))
            });
        }
        group.finish();
    }
}

fn solve(c: &mut Criterion) {
    let problem = hoelder_problem();
    let g = Grid::new(2, 1.0, 128).unwrap();
    let mut group = c.benchmark_group("solve/128");
    group.sample_size(10);
    for (name, threads) in backends() {
        group.bench_function(name, |b| {
            b.iter(|| run_on(threads, || continuation_solve(&problem, &g, &[0.2, 0.1, 0.0], 1e-10).unwrap()))
        });
    }
    group.finish();
}

criterion_group!(benches, kernels, solve);
criterion_main!(benches);
