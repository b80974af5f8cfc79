use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion};
use cutproject::exec;
use cutproject::geometry::{Region, SplitSpace};
use cutproject::lattice::Lattice;
use cutproject::modelset::{count, ModelSetSpec};
use cutproject::variance::{nv_diffraction, nv_montecarlo};
use std::hint::black_box;

fn golden() -> ModelSetSpec {
    ModelSetSpec::new(
        SplitSpace::new(1, 1).unwrap(),
        Lattice::golden(),
        vec![0.0, 0.0],
        Region::interval(0.0, 1.0).unwrap(),
        Region::interval(0.0, 1.0).unwrap(),
    )
    .unwrap()
}

fn planar() -> ModelSetSpec {
    ModelSetSpec::new(
        SplitSpace::new(2, 1).unwrap(),
        Lattice::from_rows(&[
            vec![1.0, 0.0, 0.0],
            vec![0.0, 1.0, 0.0],
            vec![2f64.sqrt(), 3f64.sqrt(), 1.0],
        ])
        .unwrap(),
        vec![0.0; 3],
        Region::interval(-0.5, 0.5).unwrap(),
        Region::ball(vec![0.0, 0.0], 1.0).unwrap(),
    )
    .unwrap()
}

fn modes(c: &mut Criterion) {
    let g = golden();
    let p = planar();
    let mut group = c.benchmark_group("modes");
    group.sample_size(10);
    for (name, parallel) in [("parallel", true), ("sequential", false)] {
        exec::set_parallel(parallel);
        group.bench_with_input(BenchmarkId::new("count_planar_t300", name), &p, |b, s| {
            b.iter(|| count(black_box(s), 300.0).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("montecarlo_golden", name), &g, |b, s| {
            b.iter(|| nv_montecarlo(black_box(s), 50.0, 2000, 1).unwrap())
        });
        group.bench_with_input(BenchmarkId::new("diffraction_golden", name), &g, |b, s| {
            b.iter(|| nv_diffraction(&s.lattice, s.split, &s.search, &s.window, 20.0, 1e-2).unwrap())
        });
    }
    exec::set_parallel(true);
    group.finish();
}

criterion_group!(benches, modes);
criterion_main!(benches);
