//! Benchmarks of the data-parallel kernels.
//!
//! Run `cargo bench -p torus-vortex` for the rayon build and
//! `cargo bench -p torus-vortex --no-default-features` for the sequential
//! fallback; criterion baselines (`--save-baseline par` / `--baseline par`)
//! compare the two. With the `parallel` feature on, each kernel is also
//! measured inside a single-thread pool for an in-run contrast.

use criterion::{criterion_group, criterion_main, Criterion};
use std::hint::black_box;

use torus_vortex::dynamics::{integrate, symmetric_4v_config, OdeParams};
use torus_vortex::field::{densities, harmonic_current, initial_data};
use torus_vortex::green::GreenTable;
use torus_vortex::pde::{PdeParams, Stepper};

fn bench_kernels(c: &mut Criterion) {
    let table = GreenTable::build(256, 0.25).unwrap();
    let cfg = symmetric_4v_config(-0.15, 0.3).unwrap();

    let mut g = c.benchmark_group("kernels");
    g.sample_size(10);

    g.bench_function("green_table_build_256", |b| {
        b.iter(|| black_box(GreenTable::build(256, 0.25).unwrap()))
    });

    g.bench_function("harmonic_current_256", |b| {
        b.iter(|| black_box(harmonic_current(&cfg, &table, 256).unwrap()))
    });

    let (u0, _) = initial_data(&cfg, &table, 1.0 / 16.0, 256).unwrap();
    g.bench_function("densities_256", |b| {
        b.iter(|| black_box(densities(&u0, 1.0 / 16.0).unwrap()))
    });

    let pp = PdeParams::new(1.0 / 16.0, 1.0, 256, 1e-6, 1.0).unwrap();
    let stepper = Stepper::new(pp);
    g.bench_function("pde_step_256", |b| {
        let mut u = u0.clone();
        b.iter(|| {
            stepper.step(&mut u);
            black_box(u.get(0, 0))
        })
    });

    g.bench_function("integrate_short", |b| {
        let p = OdeParams::new(1.0, 1e-4, 0.005);
        b.iter(|| black_box(integrate(&cfg, &table, &p).unwrap()))
    });

    g.finish();

    // same kernels forced onto one worker, for an in-run comparison
    #[cfg(feature = "parallel")]
    {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(1)
            .build()
            .unwrap();
        let mut g = c.benchmark_group("kernels_single_thread");
        g.sample_size(10);
        g.bench_function("densities_256", |b| {
            b.iter(|| pool.install(|| black_box(densities(&u0, 1.0 / 16.0).unwrap())))
        });
        g.bench_function("pde_step_256", |b| {
            let mut u = u0.clone();
            b.iter(|| {
                pool.install(|| stepper.step(&mut u));
                black_box(u.get(0, 0))
            })
        });
        g.bench_function("harmonic_current_256", |b| {
            b.iter(|| pool.install(|| black_box(harmonic_current(&cfg, &table, 256).unwrap())))
        });
        g.finish();
    }
}

criterion_group!(benches, bench_kernels);
criterion_main!(benches);
