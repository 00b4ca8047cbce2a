use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BenchmarkId, Criterion, Throughput};
use pentamesh_core::generate::{box_tet_mesh, BoxGrid};
use pentamesh_core::{extrude, validate, ExtrusionSpec};

fn bench_extrude(c: &mut Criterion) {
    let mut group = c.benchmark_group("extrude");
    for n in [4usize, 8, 12] {
        let base = box_tet_mesh(&BoxGrid::unit(n)).unwrap();
        let spec = ExtrusionSpec::new(0.0, 1.0, 10).unwrap();
        group.throughput(Throughput::Elements((4 * base.tets().len() * 10) as u64));
        group.bench_with_input(BenchmarkId::from_parameter(base.tets().len()), &base, |b, base| {
            b.iter(|| extrude(black_box(base), &spec).unwrap())
        });
    }
    group.finish();
}

fn bench_validate(c: &mut Criterion) {
    let base = box_tet_mesh(&BoxGrid::unit(8)).unwrap();
    let mesh = extrude(&base, &ExtrusionSpec::new(0.0, 1.0, 10).unwrap()).unwrap();
    c.bench_function("validate/122880", |b| b.iter(|| validate(black_box(&mesh))));
}

criterion_group!(benches, bench_extrude, bench_validate);
criterion_main!(benches);
