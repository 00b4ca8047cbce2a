//! Space-time finite element solver for scalar advection-diffusion
//! `u_t + a . grad u - kappa lap u = s` on a pentatope mesh.
//!
//! The whole space-time domain is one slab. The initial condition enters
//! weakly through an integral over the initial slice, Dirichlet regions are
//! imposed strongly and every other boundary part gets the natural condition.
//! Optional SUPG stabilization uses the space-time advection `(a, 1)`.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fields::ScalarField;
use crate::geometry::{barycentric_gradients, facet_volume4, Point4};
use crate::krylov::{gmres, SolveStats};
use crate::mesh::{PentaMesh, BOTTOM};
use crate::quadrature::SimplexRule;
use crate::sparse::CsrMatrix;

const ASSEMBLY_CHUNK: usize = 8192;
/// Krylov subspace size between restarts.
pub const GMRES_RESTART: usize = 60;

/// Spatial advection velocity.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Advection {
    Constant([f64; 3]),
    /// One vector per mesh node, interpolated linearly.
    PerNode(Vec<[f64; 3]>),
}

impl Default for Advection {
    fn default() -> Self {
        Advection::Constant([0.0; 3])
    }
}

/// A scalar field prescribed strongly on the nodes of some boundary regions.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarDirichlet {
    pub regions: Vec<i32>,
    pub field: ScalarField,
}

fn default_initial_regions() -> Vec<i32> {
    vec![BOTTOM]
}

fn default_source() -> ScalarField {
    ScalarField::Constant { value: 0.0 }
}

fn default_true() -> bool {
    true
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScalarProblem {
    #[serde(default)]
    pub advection: Advection,
    pub kappa: f64,
    #[serde(default = "default_source")]
    pub source: ScalarField,
    /// Entries are applied in order; a node on several regions takes the
    /// value of the first entry that covers it.
    #[serde(default)]
    pub dirichlet: Vec<ScalarDirichlet>,
    pub initial: ScalarField,
    /// Facet tags forming the initial slice.
    #[serde(default = "default_initial_regions")]
    pub initial_regions: Vec<i32>,
    #[serde(default = "default_true")]
    pub supg: bool,
}

impl ScalarProblem {
    fn check(&self, mesh: &PentaMesh) -> Result<()> {
        if !(self.kappa > 0.0) || !self.kappa.is_finite() {
            return Err(Error::Config(format!("kappa must be positive, got {}", self.kappa)));
        }
        if let Advection::PerNode(v) = &self.advection {
            if v.len() != mesh.num_nodes() {
                return Err(Error::LengthMismatch {
                    what: "advection field",
                    expected: mesh.num_nodes(),
                    actual: v.len(),
                });
            }
        }
        let tags = mesh.region_tags();
        if !self
            .initial_regions
            .iter()
            .any(|r| tags.binary_search(r).is_ok())
        {
            return Err(Error::MissingBottom(self.initial_regions.clone()));
        }
        for d in &self.dirichlet {
            if let Some(r) = d.regions.iter().find(|r| tags.binary_search(r).is_err()) {
                return Err(Error::Config(format!("region tag {r} does not exist in the mesh")));
            }
        }
        Ok(())
    }
}

/// SUPG parameter of an element with the given measure:
/// `(tau_adv^-2 + tau_diff^-2)^(-1/2)` with `tau_adv = h / (2 |a_st|)`,
/// `tau_diff = h^2 / (4 kappa)` and `h = (24 measure)^(1/4)`.
pub fn supg_tau(measure: f64, a_st: [f64; 4], kappa: f64) -> f64 {
    let h = (24.0 * measure).powf(0.25);
    let speed = a_st.iter().map(|v| v * v).sum::<f64>().sqrt();
    let inv_adv = 2.0 * speed / h;
    let inv_diff = 4.0 * kappa / (h * h);
    1.0 / (inv_adv * inv_adv + inv_diff * inv_diff).sqrt()
}

fn interpolate_at(points: &[Point4; 5], l: &[f64; 5]) -> Point4 {
    let mut c = nalgebra::Vector4::zeros();
    for (p, w) in points.iter().zip(l) {
        c += p.coords * *w;
    }
    Point4::from(c)
}

/// Element matrix and load vector.
fn element_system(
    mesh: &PentaMesh,
    prob: &ScalarProblem,
    rule: &SimplexRule<5>,
    e: usize,
    eps: f64,
) -> Result<([[f64; 5]; 5], [f64; 5])> {
    let pts = mesh.penta_points(e);
    let (g, m) = match barycentric_gradients(&pts) {
        Some((g, m)) if m > eps => (g, m),
        other => {
            return Err(Error::InvertedElement {
                element: e,
                measure: other.map_or(0.0, |(_, m)| m),
            })
        }
    };
    let nodes = mesh.pentas()[e];
    let adv_at = |l: &[f64; 5]| -> [f64; 4] {
        match &prob.advection {
            Advection::Constant(a) => [a[0], a[1], a[2], 1.0],
            Advection::PerNode(v) => {
                let mut a = [0.0, 0.0, 0.0, 1.0];
                for k in 0..5 {
                    for c in 0..3 {
                        a[c] += l[k] * v[nodes[k]][c];
                    }
                }
                a
            }
        }
    };
    let tau = if prob.supg {
        supg_tau(m, adv_at(&[0.2; 5]), prob.kappa)
    } else {
        0.0
    };

    let mut k = [[0.0; 5]; 5];
    let mut f = [0.0; 5];
    for a in 0..5 {
        for b in 0..5 {
            let diff: f64 = (0..3).map(|i| g[a][i] * g[b][i]).sum();
            k[a][b] += m * prob.kappa * diff;
        }
    }
    for (l, w) in rule.iter() {
        let a_st = adv_at(l);
        let s = prob.source.eval(&interpolate_at(&pts, l));
        let stream: [f64; 5] = std::array::from_fn(|b| (0..4).map(|i| a_st[i] * g[b][i]).sum());
        let wm = w * m;
        for a in 0..5 {
            let test = l[a] + tau * stream[a];
            for b in 0..5 {
                k[a][b] += wm * test * stream[b];
            }
            f[a] += wm * test * s;
        }
    }
    Ok((k, f))
}

/// Assembles the stabilized space-time system, imposes Dirichlet data and
/// solves it with restarted GMRES. Returns nodal values in mesh node order.
/// `max_iter = None` means ten times the number of nodes.
pub fn assemble_solve(
    mesh: &PentaMesh,
    prob: &ScalarProblem,
    tol: f64,
    max_iter: Option<usize>,
) -> Result<(Vec<f64>, SolveStats)> {
    prob.check(mesh)?;
    let n = mesh.num_nodes();
    let eps = mesh.inversion_threshold();
    let rule = SimplexRule::<5>::degree2();
    let mut matrix = CsrMatrix::from_elements(n, mesh.pentas(), 1);
    let mut rhs = vec![0.0; n];
    let pentas = mesh.pentas();
    for start in (0..pentas.len()).step_by(ASSEMBLY_CHUNK) {
        let end = (start + ASSEMBLY_CHUNK).min(pentas.len());
        let local: Vec<Result<_>> = (start..end)
            .into_par_iter()
            .map(|e| element_system(mesh, prob, &rule, e, eps))
            .collect();
        for (off, res) in local.into_iter().enumerate() {
            let (ke, fe) = res?;
            let nodes = &pentas[start + off];
            for a in 0..5 {
                for b in 0..5 {
                    matrix.add(nodes[a], nodes[b], ke[a][b]);
                }
                rhs[nodes[a]] += fe[a];
            }
        }
    }

    // weak initial condition over the initial slice
    let facet_rule = SimplexRule::<4>::degree2();
    for f in mesh
        .boundary_facets()
        .iter()
        .filter(|f| prob.initial_regions.contains(&f.tag))
    {
        let pts = f.nodes.map(|i| mesh.nodes()[i]);
        let vol = facet_volume4(&pts);
        for (l, w) in facet_rule.iter() {
            let mut x = nalgebra::Vector4::zeros();
            for (p, li) in pts.iter().zip(l) {
                x += p.coords * *li;
            }
            let u0 = prob.initial.eval(&Point4::from(x));
            for a in 0..4 {
                for b in 0..4 {
                    matrix.add(f.nodes[a], f.nodes[b], w * vol * l[a] * l[b]);
                }
                rhs[f.nodes[a]] += w * vol * l[a] * u0;
            }
        }
    }

    let constraints = resolve_dirichlet(mesh, &prob.dirichlet);
    for (row, r) in rhs.iter_mut().enumerate() {
        let (cols, vals) = matrix.row_values_mut(row);
        if let Some(v) = constraints[row] {
            for (c, a) in cols.iter().zip(vals.iter_mut()) {
                *a = if *c == row { 1.0 } else { 0.0 };
            }
            *r = v;
        } else {
            for (c, a) in cols.iter().zip(vals.iter_mut()) {
                if let Some(v) = constraints[*c] {
                    *r -= *a * v;
                    *a = 0.0;
                }
            }
        }
    }

    let mut x: Vec<f64> = constraints.iter().map(|c| c.unwrap_or(0.0)).collect();
    let stats = gmres(&matrix, &rhs, &mut x, tol, max_iter.unwrap_or(10 * n), GMRES_RESTART)?;
    for (xi, c) in x.iter_mut().zip(&constraints) {
        if let Some(v) = c {
            *xi = *v;
        }
    }
    Ok((x, stats))
}

/// Nodal Dirichlet values; the first entry covering a node wins.
pub fn resolve_dirichlet(mesh: &PentaMesh, entries: &[ScalarDirichlet]) -> Vec<Option<f64>> {
    let mut values = vec![None; mesh.num_nodes()];
    for entry in entries {
        for f in mesh
            .boundary_facets()
            .iter()
            .filter(|f| entry.regions.contains(&f.tag))
        {
            for &node in &f.nodes {
                if values[node].is_none() {
                    values[node] = Some(entry.field.eval(&mesh.nodes()[node]));
                }
            }
        }
    }
    values
}

/// `||u_h - exact||_L2` over the space-time domain, integrated with a
/// degree-5 rule.
pub fn l2_error(mesh: &PentaMesh, u: &[f64], exact: impl Fn(&Point4) -> f64 + Sync) -> f64 {
    let rule = SimplexRule::<5>::grundmann_moeller(2);
    let total: Vec<f64> = (0..mesh.num_pentas())
        .into_par_iter()
        .map(|e| {
            let pts = mesh.penta_points(e);
            let nodes = mesh.pentas()[e];
            let m = mesh.measure(e).abs();
            rule.iter()
                .map(|(l, w)| {
                    let uh: f64 = (0..5).map(|k| l[k] * u[nodes[k]]).sum();
                    let d = uh - exact(&interpolate_at(&pts, l));
                    w * m * d * d
                })
                .sum()
        })
        .collect();
    total.iter().sum::<f64>().sqrt()
}

/// `||u_h - exact||_L2` over the boundary facets carrying one of `tags`.
pub fn facet_l2_error(mesh: &PentaMesh, u: &[f64], tags: &[i32], exact: impl Fn(&Point4) -> f64) -> f64 {
    let rule = SimplexRule::<4>::grundmann_moeller(2);
    let mut total = 0.0;
    for f in mesh.boundary_facets().iter().filter(|f| tags.contains(&f.tag)) {
        let pts = f.nodes.map(|i| mesh.nodes()[i]);
        let vol = facet_volume4(&pts);
        for (l, w) in rule.iter() {
            let mut x = nalgebra::Vector4::zeros();
            let mut uh = 0.0;
            for k in 0..4 {
                x += pts[k].coords * l[k];
                uh += l[k] * u[f.nodes[k]];
            }
            let d = uh - exact(&Point4::from(x));
            total += w * vol * d * d;
        }
    }
    total.sqrt()
}
