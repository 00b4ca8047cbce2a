//! Structured tetrahedral meshes of boxes, optionally with removed cells.
//!
//! Each cell is split into six tets along its main diagonal, which gives a
//! conforming mesh for any subset of kept cells.

use std::collections::HashMap;

use crate::error::{Error, Result};
use crate::geometry::Point3;
use crate::mesh::{tet_faces, TetMesh};

/// Boundary tags assigned to the outer faces of the box.
pub const X_MIN: i32 = 1;
pub const X_MAX: i32 = 2;
pub const Y_MIN: i32 = 3;
pub const Y_MAX: i32 = 4;
pub const Z_MIN: i32 = 5;
pub const Z_MAX: i32 = 6;
/// Tag of boundary faces created by removed cells.
pub const HOLE: i32 = 7;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct BoxGrid {
    pub lo: [f64; 3],
    pub hi: [f64; 3],
    pub cells: [usize; 3],
}

impl BoxGrid {
    pub fn unit(n: usize) -> Self {
        Self {
            lo: [0.0; 3],
            hi: [1.0; 3],
            cells: [n; 3],
        }
    }

    fn coord(&self, axis: usize, i: usize) -> f64 {
        let n = self.cells[axis];
        if i == n {
            self.hi[axis]
        } else {
            self.lo[axis] + (self.hi[axis] - self.lo[axis]) * (i as f64 / n as f64)
        }
    }

    /// Centre of cell `c`.
    pub fn cell_center(&self, c: [usize; 3]) -> [f64; 3] {
        std::array::from_fn(|a| 0.5 * (self.coord(a, c[a]) + self.coord(a, c[a] + 1)))
    }
}

/// Six-tets-per-cell mesh of the whole box.
pub fn box_tet_mesh(grid: &BoxGrid) -> Result<TetMesh> {
    box_tet_mesh_with(grid, |_| true)
}

/// Mesh of the cells for which `keep(cell_index)` holds. Unused grid nodes
/// are dropped; outer faces get the `X_MIN..Z_MAX` tags, faces next to a
/// removed cell get [`HOLE`].
pub fn box_tet_mesh_with(grid: &BoxGrid, keep: impl Fn([usize; 3]) -> bool) -> Result<TetMesh> {
    let [nx, ny, nz] = grid.cells;
    if nx == 0 || ny == 0 || nz == 0 || (0..3).any(|a| !(grid.hi[a] > grid.lo[a])) {
        return Err(Error::InvalidMesh(format!("invalid box grid {grid:?}")));
    }
    let grid_id = |i: usize, j: usize, k: usize| i + (nx + 1) * (j + (ny + 1) * k);

    const PERMS: [[usize; 3]; 6] = [
        [0, 1, 2],
        [0, 2, 1],
        [1, 0, 2],
        [1, 2, 0],
        [2, 0, 1],
        [2, 1, 0],
    ];
    let mut grid_tets = Vec::new();
    for k in 0..nz {
        for j in 0..ny {
            for i in 0..nx {
                if !keep([i, j, k]) {
                    continue;
                }
                for perm in PERMS {
                    let mut c = [i, j, k];
                    let mut tet = [grid_id(c[0], c[1], c[2]); 4];
                    for (s, &axis) in perm.iter().enumerate() {
                        c[axis] += 1;
                        tet[s + 1] = grid_id(c[0], c[1], c[2]);
                    }
                    grid_tets.push(tet);
                }
            }
        }
    }
    if grid_tets.is_empty() {
        return Err(Error::NoTets);
    }

    let mut remap = HashMap::new();
    let mut grid_of = Vec::new();
    for t in &grid_tets {
        for &g in t {
            remap.entry(g).or_insert_with(|| {
                grid_of.push(g);
                grid_of.len() - 1
            });
        }
    }
    // Number nodes in grid order so the numbering does not depend on cell order.
    grid_of.sort_unstable();
    let remap: HashMap<usize, usize> = grid_of.iter().enumerate().map(|(i, &g)| (g, i)).collect();
    let ijk = |g: usize| [g % (nx + 1), (g / (nx + 1)) % (ny + 1), g / ((nx + 1) * (ny + 1))];
    let nodes: Vec<Point3> = grid_of
        .iter()
        .map(|&g| {
            let c = ijk(g);
            Point3::new(grid.coord(0, c[0]), grid.coord(1, c[1]), grid.coord(2, c[2]))
        })
        .collect();
    let tets: Vec<[usize; 4]> = grid_tets.iter().map(|t| t.map(|g| remap[&g])).collect();

    let mut face_count: HashMap<[usize; 3], usize> = HashMap::new();
    for t in &tets {
        for mut f in tet_faces(t) {
            f.sort_unstable();
            *face_count.entry(f).or_default() += 1;
        }
    }
    let mut boundary = Vec::new();
    for t in &tets {
        for f in tet_faces(t) {
            let mut key = f;
            key.sort_unstable();
            if face_count[&key] != 1 {
                continue;
            }
            let c = key.map(|n| ijk(grid_of[n]));
            let on = |axis: usize, v: usize| c.iter().all(|p| p[axis] == v);
            let tag = if on(0, 0) {
                X_MIN
            } else if on(0, nx) {
                X_MAX
            } else if on(1, 0) {
                Y_MIN
            } else if on(1, ny) {
                Y_MAX
            } else if on(2, 0) {
                Z_MIN
            } else if on(2, nz) {
                Z_MAX
            } else {
                HOLE
            };
            boundary.push((f, tag));
        }
    }
    TetMesh::new(nodes, tets, boundary)
}

/// Base mesh of a valve-like channel in `(x, y, t)`: the box
/// `[0, 15] x [0, 4] x [0, 12]` without the valve member
/// `6 < x < 8, y > 1`, and without the passage below it (`y < 1`) for
/// `4 < t < 8`, so the channel is split in two during that interval.
/// `refine = 1` gives 15 x 4 x 6 cells, 1920 tets.
pub fn valve_analog_base(refine: usize) -> Result<TetMesh> {
    let r = refine.max(1);
    let grid = BoxGrid {
        lo: [0.0; 3],
        hi: [15.0, 4.0, 12.0],
        cells: [15 * r, 4 * r, 6 * r],
    };
    box_tet_mesh_with(&grid, |c| {
        let [x, y, t] = grid.cell_center(c);
        let under_member = x > 6.0 && x < 8.0;
        !(under_member && (y > 1.0 || (t > 4.0 && t < 8.0)))
    })
}

/// Returns a copy of `mesh` with node `i` renamed to `perm[i]`.
pub fn renumber_nodes(mesh: &TetMesh, perm: &[usize]) -> Result<TetMesh> {
    let n = mesh.nodes().len();
    if perm.len() != n {
        return Err(Error::LengthMismatch {
            what: "node permutation",
            expected: n,
            actual: perm.len(),
        });
    }
    let mut nodes = vec![Point3::origin(); n];
    let mut hit = vec![false; n];
    for (i, &j) in perm.iter().enumerate() {
        if j >= n || std::mem::replace(&mut hit[j], true) {
            return Err(Error::InvalidMesh("node renumbering is not a permutation".into()));
        }
        nodes[j] = mesh.nodes()[i];
    }
    let tets = mesh.tets().iter().map(|t| t.map(|i| perm[i])).collect();
    let tris = mesh
        .boundary_tris()
        .iter()
        .map(|(t, g)| (t.map(|i| perm[i]), *g))
        .collect();
    TetMesh::new(nodes, tets, tris)
}
