//! Microbenchmarks of the hot kernels: octonion multiplication, the
//! closed-form distance on the octonionic plane, bundle assembly and one
//! projection solve.

use criterion::{black_box, criterion_group, criterion_main, Criterion};
use nalgebra::DVector;
use rank1_core::fields::random_admissible;
use rank1_core::operators::assemble_bundle;
use rank1_core::projection::{project, ProjectionSolver};
use rank1_core::quadrature::SampleSet;
use rank1_core::spaces::SpaceId;
use rank1_core::Oct;

fn bench_octonion_mul(c: &mut Criterion) {
    let a = Oct([0.3, -0.1, 0.7, 0.2, -0.5, 0.9, -0.4, 0.6]);
    let b = Oct([0.8, 0.4, -0.6, 0.1, 0.3, -0.2, 0.5, -0.7]);
    c.bench_function("octonion-mul", |bench| {
        bench.iter(|| black_box(a).mul(black_box(&b)))
    });
}

fn bench_oh2_distance(c: &mut Criterion) {
    let space = SpaceId::OH2.space();
    let mut v = DVector::zeros(space.dim());
    let mut w = DVector::zeros(space.dim());
    for k in 0..space.dim() {
        v[k] = 0.1 * ((k + 1) as f64).sin();
        w[k] = 0.1 * ((k + 2) as f64).cos();
    }
    let x = space.exp_basepoint(&v);
    let y = space.exp_basepoint(&w);
    c.bench_function("oh2-distance", |bench| {
        bench.iter(|| space.distance(black_box(&x), black_box(&y)))
    });
}

fn bench_bundle_assembly(c: &mut Criterion) {
    let space = SpaceId::CH2.space();
    let set = SampleSet::antithetic(space.dim(), 1024, 7);
    let (field, x) = random_admissible(&space, 1.0, 0.05, 11);
    c.bench_function("bundle-assembly-ch2-1024", |bench| {
        bench.iter(|| assemble_bundle(&space, black_box(&field), &x, &set))
    });
}

fn bench_projection(c: &mut Criterion) {
    let space = SpaceId::CH2.space();
    let set = SampleSet::antithetic(space.dim(), 512, 7);
    let (field, _) = random_admissible(&space, 1.0, 0.05, 13);
    let solver = ProjectionSolver::default();
    c.bench_function("projection-ch2-512", |bench| {
        bench.iter(|| project(&space, black_box(&field), &set, &solver, None))
    });
}

criterion_group!(
    benches,
    bench_octonion_mul,
    bench_oh2_distance,
    bench_bundle_assembly,
    bench_projection
);
criterion_main!(benches);
