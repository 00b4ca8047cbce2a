//! Four-dimensional elastic mesh update.
//!
//! The extruded mesh is treated as a virtual linear elastic solid in four
//! dimensions. Prescribed boundary displacements are propagated into the
//! interior by solving the elastostatic problem
//! `div(lambda tr(eps) I + 2 mu eps) = 0`, and the node coordinates are moved
//! by the resulting displacements.
//!
//! Degrees of freedom are numbered `4 * node + component`.

use std::collections::BTreeSet;

use nalgebra::Vector4;
use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::fields::DisplacementField;
use crate::geometry::{barycentric_gradients, Point4};
use crate::krylov::{pcg, SolveStats};
use crate::mesh::PentaMesh;
use crate::sparse::CsrMatrix;

const ASSEMBLY_CHUNK: usize = 8192;

/// Lame parameters of the virtual solid.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
pub struct ElasticParams {
    pub lambda: f64,
    pub mu: f64,
}

impl Default for ElasticParams {
    fn default() -> Self {
        Self {
            lambda: 1.0,
            mu: 1.0,
        }
    }
}

impl ElasticParams {
    pub fn new(lambda: f64, mu: f64) -> Result<Self> {
        if !(lambda >= 0.0) || !(mu > 0.0) {
            return Err(Error::Config(format!(
                "Lame parameters need lambda >= 0 and mu > 0, got ({lambda}, {mu})"
            )));
        }
        Ok(Self { lambda, mu })
    }
}

/// Per-node 4-vectors, in mesh node order.
#[derive(Debug, Clone, PartialEq)]
pub struct NodalField4 {
    values: Vec<[f64; 4]>,
}

impl NodalField4 {
    pub fn new(values: Vec<[f64; 4]>) -> Result<Self> {
        if values.iter().flatten().any(|v| !v.is_finite()) {
            return Err(Error::InvalidMesh("nodal field has non-finite entries".into()));
        }
        Ok(Self { values })
    }

    pub fn zeros(n: usize) -> Self {
        Self {
            values: vec![[0.0; 4]; n],
        }
    }

    fn from_dofs(x: &[f64]) -> Self {
        Self {
            values: x.chunks_exact(4).map(|c| [c[0], c[1], c[2], c[3]]).collect(),
        }
    }

    pub fn values(&self) -> &[[f64; 4]] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.values.len()
    }

    pub fn is_empty(&self) -> bool {
        self.values.is_empty()
    }

    pub fn max_norm(&self) -> f64 {
        self.values
            .iter()
            .map(|v| Vector4::from(*v).norm())
            .fold(0.0, f64::max)
    }
}

/// A displacement field prescribed on a set of boundary regions.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletEntry {
    pub regions: Vec<i32>,
    pub field: DisplacementField,
}

/// Dirichlet data resolved to mesh degrees of freedom.
#[derive(Debug, Clone, PartialEq)]
pub struct DirichletSet {
    values: Vec<Option<f64>>,
}

/// Two prescriptions of the same dof must agree to this relative tolerance.
const DIRICHLET_AGREEMENT: f64 = 1e-12;

impl DirichletSet {
    /// Evaluates each entry at the undeformed coordinates of the nodes on its
    /// regions. Fails if a region tag is absent from the mesh or if two
    /// entries prescribe different values for the same dof.
    pub fn resolve(mesh: &PentaMesh, entries: &[DirichletEntry]) -> Result<Self> {
        let tags = mesh.region_tags();
        let mut values: Vec<Option<f64>> = vec![None; 4 * mesh.num_nodes()];
        for entry in entries {
            for r in &entry.regions {
                if tags.binary_search(r).is_err() {
                    return Err(Error::Config(format!("region tag {r} does not exist in the mesh")));
                }
            }
            let nodes: BTreeSet<usize> = mesh
                .boundary_facets()
                .iter()
                .filter(|f| entry.regions.contains(&f.tag))
                .flat_map(|f| f.nodes)
                .collect();
            for node in nodes {
                let d = entry.field.eval(&mesh.nodes()[node])?;
                for (dof, v) in d.iter().enumerate() {
                    let Some(v) = *v else { continue };
                    let slot = &mut values[4 * node + dof];
                    match *slot {
                        None => *slot = Some(v),
                        Some(prev) => {
                            let scale = 1f64.max(prev.abs()).max(v.abs());
                            if (prev - v).abs() > DIRICHLET_AGREEMENT * scale {
                                return Err(Error::InconsistentDirichlet {
                                    node,
                                    dof,
                                    first: prev,
                                    second: v,
                                });
                            }
                        }
                    }
                }
            }
        }
        Ok(Self { values })
    }

    /// Builds the set directly from per-dof values (`4 * node + component`).
    pub fn from_values(values: Vec<Option<f64>>) -> Self {
        Self { values }
    }

    pub fn values(&self) -> &[Option<f64>] {
        &self.values
    }

    pub fn constrained_count(&self) -> usize {
        self.values.iter().filter(|v| v.is_some()).count()
    }

    pub fn is_constrained(&self, node: usize, dof: usize) -> bool {
        self.values[4 * node + dof].is_some()
    }
}

#[derive(Debug, Clone)]
pub struct LinearSystem {
    pub matrix: CsrMatrix,
    pub rhs: Vec<f64>,
    /// Dirichlet values per dof once [`apply_dirichlet`] has run.
    pub constraints: Option<Vec<Option<f64>>>,
}

impl LinearSystem {
    pub fn dim(&self) -> usize {
        self.rhs.len()
    }

    pub fn dof(node: usize, component: usize) -> usize {
        4 * node + component
    }
}

/// Element stiffness of a linear pentatope with barycentric gradients `g`.
fn element_matrix(g: &[Vector4<f64>; 5], measure: f64, p: ElasticParams) -> [[f64; 20]; 20] {
    let mut k = [[0.0; 20]; 20];
    for a in 0..5 {
        for b in 0..5 {
            let gab = g[a].dot(&g[b]);
            for i in 0..4 {
                for j in 0..4 {
                    let mut v = p.lambda * g[a][i] * g[b][j] + p.mu * g[a][j] * g[b][i];
                    if i == j {
                        v += p.mu * gab;
                    }
                    k[4 * a + i][4 * b + j] = measure * v;
                }
            }
        }
    }
    k
}

/// Assembles the stiffness matrix of the elastostatic problem. The
/// right-hand side is zero (no body force).
pub fn assemble(mesh: &PentaMesh, params: ElasticParams) -> Result<LinearSystem> {
    let eps = mesh.inversion_threshold();
    let mut matrix = CsrMatrix::from_elements(mesh.num_nodes(), mesh.pentas(), 4);
    let pentas = mesh.pentas();
    for start in (0..pentas.len()).step_by(ASSEMBLY_CHUNK) {
        let end = (start + ASSEMBLY_CHUNK).min(pentas.len());
        let local: Vec<Result<[[f64; 20]; 20]>> = (start..end)
            .into_par_iter()
            .map(|e| {
                let pts = mesh.penta_points(e);
                match barycentric_gradients(&pts) {
                    Some((g, m)) if m > eps => Ok(element_matrix(&g, m, params)),
                    other => Err(Error::InvertedElement {
                        element: e,
                        measure: other.map_or(0.0, |(_, m)| m),
                    }),
                }
            })
            .collect();
        for (off, ke) in local.into_iter().enumerate() {
            let ke = ke?;
            let nodes = &pentas[start + off];
            for a in 0..5 {
                for i in 0..4 {
                    let row = 4 * nodes[a] + i;
                    for b in 0..5 {
                        for j in 0..4 {
                            matrix.add(row, 4 * nodes[b] + j, ke[4 * a + i][4 * b + j]);
                        }
                    }
                }
            }
        }
    }
    let n = matrix.dim();
    Ok(LinearSystem {
        matrix,
        rhs: vec![0.0; n],
        constraints: None,
    })
}

/// Eliminates constrained dofs symmetrically: their columns are moved to
/// the right-hand side and their rows replaced by identity rows. Free
/// boundary dofs keep the natural (traction-free) condition.
pub fn apply_dirichlet(system: LinearSystem, bcs: &DirichletSet) -> Result<LinearSystem> {
    let LinearSystem {
        mut matrix,
        mut rhs,
        ..
    } = system;
    let g = bcs.values();
    if g.len() != rhs.len() {
        return Err(Error::LengthMismatch {
            what: "Dirichlet dofs",
            expected: rhs.len(),
            actual: g.len(),
        });
    }
    if bcs.constrained_count() == 0 {
        return Err(Error::EmptyDirichlet);
    }
    for (row, r) in rhs.iter_mut().enumerate() {
        let (cols, vals) = matrix.row_values_mut(row);
        if let Some(v) = g[row] {
            for (c, a) in cols.iter().zip(vals.iter_mut()) {
                *a = if *c == row { 1.0 } else { 0.0 };
            }
            *r = v;
        } else {
            for (c, a) in cols.iter().zip(vals.iter_mut()) {
                if let Some(v) = g[*c] {
                    *r -= *a * v;
                    *a = 0.0;
                }
            }
        }
    }
    Ok(LinearSystem {
        matrix,
        rhs,
        constraints: Some(g.to_vec()),
    })
}

/// Solves the constrained system with Jacobi-preconditioned CG.
/// `max_iter = None` means ten times the number of dofs.
pub fn solve(system: &LinearSystem, tol: f64, max_iter: Option<usize>) -> Result<(NodalField4, SolveStats)> {
    let n = system.dim();
    let mut x = vec![0.0; n];
    if let Some(c) = &system.constraints {
        for (xi, ci) in x.iter_mut().zip(c) {
            if let Some(v) = ci {
                *xi = *v;
            }
        }
    }
    let stats = pcg(&system.matrix, &system.rhs, &mut x, tol, max_iter.unwrap_or(10 * n))?;
    if let Some(c) = &system.constraints {
        for (xi, ci) in x.iter_mut().zip(c) {
            if let Some(v) = ci {
                *xi = *v;
            }
        }
    }
    Ok((NodalField4::from_dofs(&x), stats))
}

/// `x = x_# + d`; connectivity and vertex order are kept, so the result may
/// contain inverted elements and should be validated.
pub fn update_coords(mesh: &PentaMesh, d: &NodalField4) -> Result<PentaMesh> {
    if d.len() != mesh.num_nodes() {
        return Err(Error::LengthMismatch {
            what: "displacement field",
            expected: mesh.num_nodes(),
            actual: d.len(),
        });
    }
    let nodes = mesh
        .nodes()
        .iter()
        .zip(d.values())
        .map(|(p, v)| Point4::from(p.coords + Vector4::from(*v)))
        .collect();
    mesh.with_nodes(nodes)
}

#[derive(Debug, Clone)]
pub struct Deformation {
    pub mesh: PentaMesh,
    pub displacement: NodalField4,
    pub stats: SolveStats,
}

/// Assemble, constrain, solve and move the nodes in one call.
pub fn deform(
    mesh: &PentaMesh,
    params: ElasticParams,
    entries: &[DirichletEntry],
    tol: f64,
    max_iter: Option<usize>,
) -> Result<Deformation> {
    let bcs = DirichletSet::resolve(mesh, entries)?;
    let system = apply_dirichlet(assemble(mesh, params)?, &bcs)?;
    let (displacement, stats) = solve(&system, tol, max_iter)?;
    let mesh = update_coords(mesh, &displacement)?;
    Ok(Deformation {
        mesh,
        displacement,
        stats,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::Point4;

    fn unit_grads() -> ([Vector4<f64>; 5], f64) {
        let v = [
            Point4::new(0.0, 0.0, 0.0, 0.0),
            Point4::new(1.0, 0.0, 0.0, 0.0),
            Point4::new(0.0, 1.0, 0.0, 0.0),
            Point4::new(0.0, 0.0, 1.0, 0.0),
            Point4::new(0.0, 0.0, 0.0, 1.0),
        ];
        barycentric_gradients(&v).unwrap()
    }

    #[test]
    fn element_matrix_is_symmetric_with_translation_kernel() {
        let (g, m) = unit_grads();
        let k = element_matrix(&g, m, ElasticParams::default());
        for r in 0..20 {
            for c in 0..20 {
                assert!((k[r][c] - k[c][r]).abs() < 1e-15);
            }
            for comp in 0..4 {
                let s: f64 = (0..5).map(|b| k[r][4 * b + comp]).sum();
                assert!(s.abs() < 1e-14);
            }
        }
    }

    #[test]
    fn element_energy_of_uniform_stretch() {
        // d = (x1, 0, 0, 0): eps = e1 e1^T, energy density lambda + 2 mu
        let (g, m) = unit_grads();
        let p = ElasticParams::new(0.5, 2.0).unwrap();
        let k = element_matrix(&g, m, p);
        let xs = [0.0, 1.0, 0.0, 0.0, 0.0];
        let mut d = [0.0; 20];
        for a in 0..5 {
            d[4 * a] = xs[a];
        }
        let e: f64 = (0..20).map(|r| (0..20).map(|c| d[r] * k[r][c] * d[c]).sum::<f64>()).sum();
        assert!((e - m * (p.lambda + 2.0 * p.mu)).abs() < 1e-14);
    }

    #[test]
    fn invalid_lame_parameters() {
        assert!(ElasticParams::new(-1.0, 1.0).is_err());
        assert!(ElasticParams::new(1.0, 0.0).is_err());
    }
}
