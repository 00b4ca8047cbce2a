#![allow(dead_code)]

use std::collections::BTreeMap;

use pentamesh_core::generate::{box_tet_mesh_with, renumber_nodes, BoxGrid};
use pentamesh_core::mesh::penta_facets;
use pentamesh_core::{PentaMesh, Point3, TetMesh};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Box mesh with random cell counts, randomly removed cells, jittered
/// interior nodes and a random node numbering. Roughly `target` tets.
pub fn random_tet_mesh(seed: u64, target: usize) -> TetMesh {
    let mut r = rng(seed);
    let cells_total = (target / 6).max(1);
    let nx = r.gen_range(1..=((cells_total as f64).cbrt().ceil() as usize * 2).max(1));
    let ny = r.gen_range(1..=((cells_total / nx) as f64).sqrt().ceil().max(1.0) as usize);
    let nz = (cells_total / (nx * ny)).max(1);
    let grid = BoxGrid {
        lo: [0.0; 3],
        hi: [nx as f64, ny as f64, nz as f64],
        cells: [nx, ny, nz],
    };
    let drop: Vec<bool> = (0..nx * ny * nz).map(|_| r.gen_bool(0.1)).collect();
    let keep = |c: [usize; 3]| c == [0, 0, 0] || !drop[c[0] + nx * (c[1] + ny * c[2])];
    let base = box_tet_mesh_with(&grid, keep).unwrap();

    let nodes: Vec<Point3> = base
        .nodes()
        .iter()
        .map(|p| {
            let mut q = *p;
            for a in 0..3 {
                q[a] += r.gen_range(-0.1..0.1);
            }
            q
        })
        .collect();
    let jittered = TetMesh::new(nodes, base.tets().to_vec(), base.boundary_tris().to_vec()).unwrap();
    let mut perm: Vec<usize> = (0..jittered.nodes().len()).collect();
    perm.shuffle(&mut r);
    renumber_nodes(&jittered, &perm).unwrap()
}

/// Multiplicity of every facet over all pentatopes, keyed by sorted nodes.
pub fn facet_multiset(mesh: &PentaMesh) -> BTreeMap<[usize; 4], usize> {
    let mut m = BTreeMap::new();
    for p in mesh.pentas() {
        for mut f in penta_facets(p) {
            f.sort_unstable();
            *m.entry(f).or_insert(0) += 1;
        }
    }
    m
}

pub fn max_abs_diff(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Least-squares slope of `ys` against `xs`.
pub fn ls_slope(xs: &[f64], ys: &[f64]) -> f64 {
    let n = xs.len() as f64;
    let mx = xs.iter().sum::<f64>() / n;
    let my = ys.iter().sum::<f64>() / n;
    let sxy: f64 = xs.iter().zip(ys).map(|(x, y)| (x - mx) * (y - my)).sum();
    let sxx: f64 = xs.iter().map(|x| (x - mx) * (x - mx)).sum();
    sxy / sxx
}
