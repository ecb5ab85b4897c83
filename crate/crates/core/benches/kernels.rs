//! Hot-kernel benchmarks.
//!
//! Run `cargo bench -p bolab -- --save-baseline parallel`, then
//! `cargo bench -p bolab --no-default-features -- --baseline parallel`
//! to compare the rayon build against the sequential fallback on the same
//! kernels. Results are identical between the two builds (fixed-chunk
//! reductions); only the wall time differs.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use bolab::besov::{self, BesovParams};
use bolab::commutator::space_commutator;
use bolab::field::PeriodicField;
use bolab::mollify::{make_kernel, mollify_space, KernelAxes, KernelShape};
use bolab::solver::{ProjectionSettings, Projector};
use bolab::synth;
use bolab::Grid;

fn bench_kernels(c: &mut Criterion) {
    let grid = Grid::square(256).unwrap();
    let rough = synth::rough_field(grid, 0.5, 7, synth::SynthMode::Scalar).unwrap();
    let smooth = PeriodicField::from_fn(grid, |x| x[0].sin() * (2.0 * x[1]).cos());
    let kernel = make_kernel(KernelShape::CompactBump, 0.5, KernelAxes::Space, &grid).unwrap();

    let mut group = c.benchmark_group("kernels-256");
    group.sample_size(20);

    group.bench_function("fft-roundtrip", |b| {
        b.iter(|| black_box(rough.to_spectral().to_physical()))
    });

    group.bench_function("mollify-space", |b| {
        b.iter(|| black_box(mollify_space(&rough, &kernel).unwrap()))
    });

    group.bench_function("spectral-shift", |b| {
        b.iter(|| black_box(rough.shift(&[0.37, -0.91])))
    });

    group.bench_function("besov-norm", |b| {
        let params = BesovParams::new(0.5, 2.0, 16).unwrap();
        b.iter(|| black_box(besov::besov_norm(&rough, &params).unwrap()))
    });

    group.bench_function("exponent-estimate", |b| {
        b.iter(|| black_box(besov::estimate_exponent(&rough, 2.0).unwrap()))
    });

    group.bench_function("space-commutator", |b| {
        b.iter(|| black_box(space_commutator(&rough, &smooth, &kernel).unwrap()))
    });

    group.bench_function("variable-coefficient-projection", |b| {
        let rho = PeriodicField::from_fn(grid, |x| 2.0 + 0.5 * x[0].sin() * x[1].sin());
        let u_star = synth::rough_field(grid, 0.5, 3, synth::SynthMode::DivFreeVector)
            .unwrap()
            .add(&smooth.gradient().unwrap());
        b.iter(|| {
            let mut projector = Projector::new(grid, ProjectionSettings::default(), 1e-3);
            black_box(projector.project(&rho, &u_star).unwrap())
        })
    });

    group.finish();
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
