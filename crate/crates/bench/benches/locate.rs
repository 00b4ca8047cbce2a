use std::hint::black_box;

use criterion::{criterion_group, criterion_main, Criterion};
use pentamesh_core::generate::{box_tet_mesh, BoxGrid};
use pentamesh_core::{extrude, ExtrusionSpec, LocateIndex, PentaMesh, Point4};

fn mesh() -> PentaMesh {
    let base = box_tet_mesh(&BoxGrid::unit(8)).unwrap();
    extrude(&base, &ExtrusionSpec::new(0.0, 1.0, 8).unwrap()).unwrap()
}

/// Low-discrepancy points in [-0.1, 1.1]^4, a few of them outside the mesh.
fn queries(n: usize) -> Vec<Point4> {
    const ALPHA: [f64; 4] = [0.7548776662, 0.5698402910, 0.8191725134, 0.6180339887];
    (0..n)
        .map(|i| Point4::from(ALPHA.map(|a| -0.1 + 1.2 * ((i as f64 + 0.5) * a).fract())))
        .collect()
}

fn bench_locate(c: &mut Criterion) {
    let m = mesh();
    c.bench_function("locate/build/98304", |b| b.iter(|| LocateIndex::build(black_box(&m)).unwrap()));
    let index = LocateIndex::build(&m).unwrap();
    let pts = queries(1000);
    c.bench_function("locate/1000_queries", |b| {
        b.iter(|| {
            for p in &pts {
                black_box(index.locate(p));
            }
        })
    });
}

criterion_group!(benches, bench_locate);
criterion_main!(benches);
