use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use maxcomm::maximal::{self, brute};
use maxcomm::{CubeFamily, Grid, GridFunction};

fn inputs(grid: Grid) -> (GridFunction, GridFunction) {
    let f = GridFunction::from_profile(grid, |u| (9.0 * u[0]).sin() + (4.0 * u[1]).cos()).unwrap();
    let b = GridFunction::from_profile(grid, |u| (u[0] - 0.4).abs().sqrt() + u[1]).unwrap();
    (f, b)
}

fn grids() -> Vec<(String, Grid)> {
    vec![
        ("1d_128".into(), Grid::unit(1, 128).unwrap()),
        ("2d_16x16".into(), Grid::unit(2, 16).unwrap()),
    ]
}

fn accelerated_vs_brute(c: &mut Criterion) {
    let mut g = c.benchmark_group("hl_maximal");
    g.sample_size(10);
    for (name, grid) in grids() {
        let (f, _) = inputs(grid);
        let fam = CubeFamily::all(grid);
        g.bench_with_input(BenchmarkId::new("accelerated", &name), &f, |bn, f| {
            bn.iter(|| maximal::hl_maximal(black_box(f), &fam).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("brute", &name), &f, |bn, f| {
            bn.iter(|| brute::hl_maximal(black_box(f), &fam).unwrap())
        });
    }
    g.finish();

    let mut g = c.benchmark_group("maximal_commutator");
    g.sample_size(10);
    for (name, grid) in grids() {
        let (f, b) = inputs(grid);
        let fam = CubeFamily::all(grid);
        g.bench_with_input(BenchmarkId::new("accelerated", &name), &f, |bn, f| {
            bn.iter(|| maximal::maximal_commutator(&b, black_box(f), &fam).unwrap())
        });
        g.bench_with_input(BenchmarkId::new("brute", &name), &f, |bn, f| {
            bn.iter(|| brute::maximal_commutator(&b, black_box(f), &fam).unwrap())
        });
    }
    g.finish();
}

#[cfg(feature = "parallel")]
fn sequential_vs_parallel(c: &mut Criterion) {
    let one = rayon::ThreadPoolBuilder::new().num_threads(1).build().unwrap();
    let default = rayon::ThreadPoolBuilder::new().build().unwrap();
    let (f, _) = inputs(Grid::unit(1, 4096).unwrap());
    let fam = CubeFamily::all(*f.grid());
    let (fs, bs) = inputs(Grid::unit(1, 512).unwrap());
    let fam_s = CubeFamily::all(*fs.grid());

    let mut g = c.benchmark_group("threads");
    g.sample_size(10);
    for (label, pool) in [("1", &one), ("default", &default)] {
        g.bench_function(BenchmarkId::new("hl_maximal", label), |bn| {
            bn.iter(|| pool.install(|| maximal::hl_maximal(black_box(&f), &fam).unwrap()))
        });
        g.bench_function(BenchmarkId::new("commutator_sharp", label), |bn| {
            bn.iter(|| pool.install(|| maximal::commutator_sharp(&bs, black_box(&fs), &fam_s).unwrap()))
        });
    }
    g.finish();
}

#[cfg(not(feature = "parallel"))]
fn sequential_vs_parallel(_: &mut Criterion) {}

criterion_group!(benches, accelerated_vs_brute, sequential_vs_parallel);
criterion_main!(benches);
