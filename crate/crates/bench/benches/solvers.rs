use std::hint::black_box;

use alr_cli::commands::{sample_core_shell, sample_plane};
use alr_cli::grid::GridSpec;
use alr_core::oracle::mode_transmission_oracle;
use alr_core::presets::{designer_data, inverse_square_data};
use alr_core::problem2::DEFAULT_RADIAL_NODES;
use alr_core::{solve_modes, Complex64, PlaneProblem, SolverConfig, SourceSpec};
use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};

fn core_shell(c: &mut Criterion) {
    let mut g = c.benchmark_group("solve_modes");
    for order in [100usize, 400, 1600] {
        let h = designer_data(0.25, 3.0, order).unwrap();
        let cfg = SolverConfig::new(3.0, 1e-10, order).unwrap();
        g.bench_with_input(BenchmarkId::from_parameter(order), &h, |b, h| {
            b.iter(|| solve_modes(black_box(h), cfg).unwrap())
        });
    }
    g.finish();

    c.bench_function("oracle_mode_50", |b| {
        b.iter(|| mode_transmission_oracle(black_box(50), Complex64::new(0.3, -0.2), 3.0, 1e-12).unwrap())
    });

    let h = inverse_square_data(100).unwrap();
    let sol = solve_modes(&h, SolverConfig::new(3.0, 1e-14, 100).unwrap()).unwrap();
    let spec = GridSpec { extent: 3.0, resolution: 100 };
    c.bench_function("core_shell_grid_100x100", |b| b.iter(|| sample_core_shell(black_box(&sol), &spec)));
}

fn plane(c: &mut Criterion) {
    let mut g = c.benchmark_group("plane_problem");
    g.sample_size(10);
    let source = SourceSpec::cutoff_harmonic(100).unwrap();
    g.bench_function("setup_100_modes", |b| {
        b.iter(|| PlaneProblem::new(black_box(&source), 100, DEFAULT_RADIAL_NODES).unwrap())
    });
    let p = PlaneProblem::new(&source, 100, DEFAULT_RADIAL_NODES).unwrap();
    let sol = p.at_delta(1e-10).unwrap();
    let spec = GridSpec { extent: 4.0, resolution: 100 };
    g.bench_function("grid_100x100", |b| b.iter(|| sample_plane(black_box(&sol), &spec)));
    g.finish();
}

criterion_group!(benches, core_shell, plane);
criterion_main!(benches);
