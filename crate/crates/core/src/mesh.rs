//! Tetrahedral and pentatope meshes, boundary extraction and integrity checks.

use std::collections::{BTreeSet, HashMap};

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{simplex_measure4, tet_volume, Point3, Point4};

/// Region tag of the facets on the first time slice of an extrusion.
pub const BOTTOM: i32 = -1;
/// Region tag of the facets on the last time slice of an extrusion.
pub const TOP: i32 = -2;

/// Relative factor of the inversion threshold, see [`PentaMesh::inversion_threshold`].
pub const INVERSION_EPS: f64 = 1e-14;

fn check_finite(coords: &[f64], node: usize) -> Result<()> {
    if coords.iter().all(|c| c.is_finite()) {
        Ok(())
    } else {
        Err(Error::InvalidMesh(format!("node {node} has non-finite coordinates")))
    }
}

fn sorted<const N: usize>(mut a: [usize; N]) -> [usize; N] {
    a.sort_unstable();
    a
}

/// A 3D tetrahedral mesh with tagged boundary triangles.
#[derive(Debug, Clone, PartialEq)]
pub struct TetMesh {
    nodes: Vec<Point3>,
    tets: Vec<[usize; 4]>,
    boundary_tris: Vec<([usize; 3], i32)>,
}

impl TetMesh {
    /// Builds a mesh, flipping negatively oriented tets and completing the
    /// boundary: faces owned by a single tet that are not listed in
    /// `boundary_tris` are appended with tag 0.
    pub fn new(
        nodes: Vec<Point3>,
        mut tets: Vec<[usize; 4]>,
        boundary_tris: Vec<([usize; 3], i32)>,
    ) -> Result<Self> {
        for (i, p) in nodes.iter().enumerate() {
            check_finite(p.coords.as_slice(), i)?;
        }
        let n = nodes.len();
        for (e, t) in tets.iter_mut().enumerate() {
            if t.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!("tet {e} references a missing node")));
            }
            let vol = tet_volume(&t.map(|i| nodes[i]));
            if vol == 0.0 || !vol.is_finite() {
                return Err(Error::InvalidMesh(format!("tet {e} is degenerate")));
            }
            if vol < 0.0 {
                t.swap(2, 3);
            }
        }

        let mut face_count: HashMap<[usize; 3], usize> = HashMap::new();
        for t in &tets {
            for f in tet_faces(t) {
                *face_count.entry(sorted(f)).or_default() += 1;
            }
        }
        if let Some((f, c)) = face_count.iter().find(|(_, &c)| c > 2) {
            return Err(Error::InvalidMesh(format!(
                "triangle {f:?} is shared by {c} tets"
            )));
        }

        let mut seen = BTreeSet::new();
        for (tri, _) in &boundary_tris {
            if tri.iter().any(|&i| i >= n) {
                return Err(Error::InvalidMesh(format!(
                    "boundary triangle {tri:?} references a missing node"
                )));
            }
            let key = sorted(*tri);
            if face_count.get(&key) != Some(&1) {
                return Err(Error::InvalidMesh(format!(
                    "boundary triangle {tri:?} is not a face of exactly one tet"
                )));
            }
            if !seen.insert(key) {
                return Err(Error::InvalidMesh(format!(
                    "boundary triangle {tri:?} listed twice"
                )));
            }
        }

        let mut boundary_tris = boundary_tris;
        for t in &tets {
            for f in tet_faces(t) {
                let key = sorted(f);
                if face_count[&key] == 1 && seen.insert(key) {
                    boundary_tris.push((f, 0));
                }
            }
        }
        Ok(Self {
            nodes,
            tets,
            boundary_tris,
        })
    }

    pub fn nodes(&self) -> &[Point3] {
        &self.nodes
    }

    pub fn tets(&self) -> &[[usize; 4]] {
        &self.tets
    }

    pub fn boundary_tris(&self) -> &[([usize; 3], i32)] {
        &self.boundary_tris
    }

    pub fn tet_points(&self, e: usize) -> [Point3; 4] {
        self.tets[e].map(|i| self.nodes[i])
    }

    pub fn volume(&self) -> f64 {
        (0..self.tets.len())
            .map(|e| tet_volume(&self.tet_points(e)))
            .sum()
    }
}

/// The four triangular faces of a tet, each opposite one vertex.
pub fn tet_faces(t: &[usize; 4]) -> [[usize; 3]; 4] {
    [
        [t[1], t[2], t[3]],
        [t[0], t[2], t[3]],
        [t[0], t[1], t[3]],
        [t[0], t[1], t[2]],
    ]
}

/// The five tetrahedral facets of a pentatope, each opposite one vertex.
pub fn penta_facets(p: &[usize; 5]) -> [[usize; 4]; 5] {
    [
        [p[1], p[2], p[3], p[4]],
        [p[0], p[2], p[3], p[4]],
        [p[0], p[1], p[3], p[4]],
        [p[0], p[1], p[2], p[4]],
        [p[0], p[1], p[2], p[3]],
    ]
}

/// Origin of an extruded node: the base mesh node and the time layer.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct Provenance {
    pub base: usize,
    pub layer: usize,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct BoundaryFacet {
    pub nodes: [usize; 4],
    pub tag: i32,
}

/// A 4D simplex mesh with tagged boundary facets.
#[derive(Debug, Clone, PartialEq)]
pub struct PentaMesh {
    nodes: Vec<Point4>,
    pentas: Vec<[usize; 5]>,
    boundary_facets: Vec<BoundaryFacet>,
    provenance: Option<Vec<Provenance>>,
}

impl PentaMesh {
    /// Builds a mesh and reorders the vertices of every negatively oriented
    /// pentatope so that all measures are positive.
    pub fn new(
        nodes: Vec<Point4>,
        pentas: Vec<[usize; 5]>,
        boundary_facets: Vec<BoundaryFacet>,
        provenance: Option<Vec<Provenance>>,
    ) -> Result<Self> {
        let mut mesh = Self::from_raw(nodes, pentas, boundary_facets, provenance)?;
        let nodes = &mesh.nodes;
        mesh.pentas.par_iter_mut().for_each(|p| {
            if simplex_measure4(&p.map(|i| nodes[i])) < 0.0 {
                p.swap(3, 4);
            }
        });
        Ok(mesh)
    }

    /// Builds a mesh keeping the stored vertex order, so inverted elements
    /// stay inverted. Only index ranges and coordinate finiteness are checked.
    pub fn from_raw(
        nodes: Vec<Point4>,
        pentas: Vec<[usize; 5]>,
        boundary_facets: Vec<BoundaryFacet>,
        provenance: Option<Vec<Provenance>>,
    ) -> Result<Self> {
        for (i, p) in nodes.iter().enumerate() {
            check_finite(p.coords.as_slice(), i)?;
        }
        let n = nodes.len();
        if let Some(e) = pentas.iter().position(|p| p.iter().any(|&i| i >= n)) {
            return Err(Error::InvalidMesh(format!("pentatope {e} references a missing node")));
        }
        if let Some(f) = boundary_facets.iter().find(|f| f.nodes.iter().any(|&i| i >= n)) {
            return Err(Error::InvalidMesh(format!(
                "facet {:?} references a missing node",
                f.nodes
            )));
        }
        if let Some(prov) = &provenance {
            if prov.len() != n {
                return Err(Error::LengthMismatch {
                    what: "provenance",
                    expected: n,
                    actual: prov.len(),
                });
            }
        }
        Ok(Self {
            nodes,
            pentas,
            boundary_facets,
            provenance,
        })
    }

    pub fn nodes(&self) -> &[Point4] {
        &self.nodes
    }

    pub fn pentas(&self) -> &[[usize; 5]] {
        &self.pentas
    }

    pub fn boundary_facets(&self) -> &[BoundaryFacet] {
        &self.boundary_facets
    }

    pub fn provenance(&self) -> Option<&[Provenance]> {
        self.provenance.as_deref()
    }

    pub fn num_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn num_pentas(&self) -> usize {
        self.pentas.len()
    }

    pub fn penta_points(&self, e: usize) -> [Point4; 5] {
        self.pentas[e].map(|i| self.nodes[i])
    }

    pub fn measure(&self, e: usize) -> f64 {
        simplex_measure4(&self.penta_points(e))
    }

    pub fn measures(&self) -> Vec<f64> {
        (0..self.pentas.len())
            .into_par_iter()
            .map(|e| self.measure(e))
            .collect()
    }

    /// Sum of signed element measures.
    pub fn total_measure(&self) -> f64 {
        self.measures().iter().sum()
    }

    /// Axis-aligned bounding box `(lo, hi)`; `None` for a mesh without nodes.
    pub fn bounding_box(&self) -> Option<(Point4, Point4)> {
        let first = *self.nodes.first()?;
        Some(self.nodes.iter().fold((first, first), |(lo, hi), p| {
            (lo.inf(p), hi.sup(p))
        }))
    }

    /// `INVERSION_EPS * diag^4` with `diag` the bounding box diagonal.
    pub fn inversion_threshold(&self) -> f64 {
        match self.bounding_box() {
            Some((lo, hi)) => INVERSION_EPS * (hi - lo).norm().powi(4),
            None => 0.0,
        }
    }

    /// Sorted, de-duplicated region tags carried by the boundary facets.
    pub fn region_tags(&self) -> Vec<i32> {
        let set: BTreeSet<i32> = self.boundary_facets.iter().map(|f| f.tag).collect();
        set.into_iter().collect()
    }

    /// Same connectivity with new node coordinates (vertex order preserved).
    pub fn with_nodes(&self, nodes: Vec<Point4>) -> Result<Self> {
        if nodes.len() != self.nodes.len() {
            return Err(Error::LengthMismatch {
                what: "node coordinates",
                expected: self.nodes.len(),
                actual: nodes.len(),
            });
        }
        for (i, p) in nodes.iter().enumerate() {
            check_finite(p.coords.as_slice(), i)?;
        }
        Ok(Self {
            nodes,
            ..self.clone()
        })
    }

    /// Maps node coordinates componentwise to `(x + offset) * scale`.
    /// Vertex order is untouched, so a negative scale inverts every element.
    pub fn shift_scale(&self, offset: [f64; 4], scale: [f64; 4]) -> Result<Self> {
        if let Some(axis) = scale.iter().position(|&s| s == 0.0) {
            return Err(Error::ZeroScale { axis });
        }
        let nodes = self
            .nodes
            .iter()
            .map(|p| Point4::from(std::array::from_fn::<f64, 4, _>(|k| (p[k] + offset[k]) * scale[k])))
            .collect();
        self.with_nodes(nodes)
    }

    /// Offset and scale that map the bounding box onto `[lo, hi]`.
    pub fn fit_box(&self, lo: [f64; 4], hi: [f64; 4]) -> Result<([f64; 4], [f64; 4])> {
        let (blo, bhi) = self.bounding_box().ok_or(Error::EmptyMesh)?;
        let mut offset = [0.0; 4];
        let mut scale = [0.0; 4];
        for k in 0..4 {
            let width = bhi[k] - blo[k];
            if width <= 0.0 {
                return Err(Error::ZeroScale { axis: k });
            }
            scale[k] = (hi[k] - lo[k]) / width;
            offset[k] = lo[k] / scale[k] - blo[k];
        }
        Ok((offset, scale))
    }

    /// Relabels coordinate axes: new axis `k` is old axis `perm[k]`.
    /// Elements are reoriented for odd permutations.
    pub fn permute_axes(&self, perm: [usize; 4]) -> Result<Self> {
        let mut seen = [false; 4];
        for &k in &perm {
            if k > 3 || std::mem::replace(&mut seen[k], true) {
                return Err(Error::Config(format!("{perm:?} is not a permutation of 0..4")));
            }
        }
        let mut inversions = 0;
        for i in 0..4 {
            for j in i + 1..4 {
                if perm[i] > perm[j] {
                    inversions += 1;
                }
            }
        }
        let nodes = self
            .nodes
            .iter()
            .map(|p| Point4::new(p[perm[0]], p[perm[1]], p[perm[2]], p[perm[3]]))
            .collect();
        let mut out = self.with_nodes(nodes)?;
        if inversions % 2 == 1 {
            for p in &mut out.pentas {
                p.swap(3, 4);
            }
        }
        Ok(out)
    }
}

/// Tetra-facets referenced by exactly one pentatope, each with its owner,
/// sorted by facet key (ascending node indices).
pub fn extract_boundary_facets(mesh: &PentaMesh) -> Result<Vec<([usize; 4], usize)>> {
    let counts = facet_multiplicity(mesh);
    let mut out = Vec::new();
    for (key, (count, owner)) in counts {
        match count {
            1 => out.push((key, owner)),
            2 => {}
            _ => return Err(Error::Conformity { facet: key, count }),
        }
    }
    out.sort_unstable();
    Ok(out)
}

fn facet_multiplicity(mesh: &PentaMesh) -> HashMap<[usize; 4], (usize, usize)> {
    let mut counts: HashMap<[usize; 4], (usize, usize)> =
        HashMap::with_capacity(mesh.num_pentas() * 3);
    for (e, p) in mesh.pentas().iter().enumerate() {
        for f in penta_facets(p) {
            counts.entry(sorted(f)).or_insert((0, e)).0 += 1;
        }
    }
    counts
}

#[derive(Debug, Clone, PartialEq)]
pub struct ValidationReport {
    pub min_measure: f64,
    pub max_measure: f64,
    /// Elements with measure at or below [`PentaMesh::inversion_threshold`].
    pub inverted_count: usize,
    /// Facets shared by more than two elements, interior facets tagged as
    /// boundary, and boundary facets missing from the tag list (or vice versa).
    pub nonconforming_facet_count: usize,
    pub orphan_node_count: usize,
    /// Largest ratio of longest to shortest edge over all elements.
    pub max_edge_ratio: f64,
    pub passed: bool,
}

pub fn validate(mesh: &PentaMesh) -> ValidationReport {
    let eps = mesh.inversion_threshold();
    let measures = mesh.measures();
    let (min_measure, max_measure) = if measures.is_empty() {
        (0.0, 0.0)
    } else {
        measures
            .iter()
            .fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &m| {
                (lo.min(m), hi.max(m))
            })
    };
    let inverted_count = measures.iter().filter(|&&m| m <= eps).count();

    let max_edge_ratio = (0..mesh.num_pentas())
        .into_par_iter()
        .map(|e| {
            let v = mesh.penta_points(e);
            let (mut lo, mut hi) = (f64::INFINITY, 0.0f64);
            for i in 0..5 {
                for j in i + 1..5 {
                    let l = (v[i] - v[j]).norm();
                    lo = lo.min(l);
                    hi = hi.max(l);
                }
            }
            if lo > 0.0 {
                hi / lo
            } else {
                f64::INFINITY
            }
        })
        .reduce(|| 0.0, f64::max);

    let multiplicity = facet_multiplicity(mesh);
    let mut declared: HashMap<[usize; 4], usize> = HashMap::new();
    for f in mesh.boundary_facets() {
        *declared.entry(sorted(f.nodes)).or_default() += 1;
    }
    let mut nonconforming = 0;
    for (key, &(count, _)) in &multiplicity {
        let tagged = declared.get(key).copied().unwrap_or(0);
        let bad = match count {
            1 => tagged != 1,
            2 => tagged != 0,
            _ => true,
        };
        if bad {
            nonconforming += 1;
        }
    }
    nonconforming += declared
        .keys()
        .filter(|k| !multiplicity.contains_key(*k))
        .count();

    let mut used = vec![false; mesh.num_nodes()];
    for p in mesh.pentas() {
        for &i in p {
            used[i] = true;
        }
    }
    let orphan_node_count = used.iter().filter(|u| !**u).count();

    ValidationReport {
        min_measure,
        max_measure,
        inverted_count,
        nonconforming_facet_count: nonconforming,
        orphan_node_count,
        max_edge_ratio,
        passed: inverted_count == 0 && nonconforming == 0 && orphan_node_count == 0,
    }
}
