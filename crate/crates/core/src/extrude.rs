//! Extrusion of a tetrahedral mesh into a pentatope mesh.
//!
//! Every tet is swept over each time layer into a hyperprism with bottom
//! vertices `b0..b3` and lifted copies `t0..t3`. Sorting the vertices by
//! global node index, the prism is split into the four monotone paths
//!
//! ```text
//! (b0 b1 b2 b3 t3) (b0 b1 b2 t2 t3) (b0 b1 t1 t2 t3) (b0 t0 t1 t2 t3)
//! ```
//!
//! The split of a side face (triangle x interval) only depends on the
//! relative order of its three base nodes, so neighbouring prisms agree on
//! their shared sides and the result is conforming for any node numbering.

use std::collections::HashMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::Point4;
use crate::mesh::{penta_facets, BoundaryFacet, PentaMesh, Provenance, TetMesh, BOTTOM, TOP};

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ExtrusionSpec {
    pub t_lo: f64,
    pub t_hi: f64,
    pub layers: usize,
}

impl ExtrusionSpec {
    pub fn new(t_lo: f64, t_hi: f64, layers: usize) -> Result<Self> {
        let spec = Self { t_lo, t_hi, layers };
        spec.check()?;
        Ok(spec)
    }

    fn check(&self) -> Result<()> {
        if self.layers < 1 || !(self.t_hi > self.t_lo) || !self.t_lo.is_finite() || !self.t_hi.is_finite()
        {
            return Err(Error::NonconvexSpec {
                t_lo: self.t_lo,
                t_hi: self.t_hi,
                layers: self.layers,
            });
        }
        Ok(())
    }

    /// Time coordinate of layer boundary `k`.
    pub fn time(&self, k: usize) -> f64 {
        if k == self.layers {
            self.t_hi
        } else {
            self.t_lo + (self.t_hi - self.t_lo) * (k as f64 / self.layers as f64)
        }
    }

    pub fn layer_width(&self) -> f64 {
        (self.t_hi - self.t_lo) / self.layers as f64
    }
}

/// Splits the prism spanned by `bottom` and its lifted copy `top` into four
/// pentatopes. Vertex order within each pentatope is the path order; callers
/// normalize orientation.
pub fn split_prism(bottom: [usize; 4], top: [usize; 4]) -> Result<[[usize; 5]; 4]> {
    let all = [
        bottom[0], bottom[1], bottom[2], bottom[3], top[0], top[1], top[2], top[3],
    ];
    let mut check = all;
    check.sort_unstable();
    if check.windows(2).any(|w| w[0] == w[1]) {
        return Err(Error::DegeneratePrism(all));
    }
    let mut order = [0, 1, 2, 3];
    order.sort_unstable_by_key(|&i| bottom[i]);
    let b = order.map(|i| bottom[i]);
    let t = order.map(|i| top[i]);
    Ok([
        [b[0], b[1], b[2], b[3], t[3]],
        [b[0], b[1], b[2], t[2], t[3]],
        [b[0], b[1], t[1], t[2], t[3]],
        [b[0], t[0], t[1], t[2], t[3]],
    ])
}

pub fn extrude(base: &TetMesh, spec: &ExtrusionSpec) -> Result<PentaMesh> {
    spec.check()?;
    let n = base.nodes().len();
    let layers = spec.layers;

    let mut nodes = Vec::with_capacity(n * (layers + 1));
    let mut provenance = Vec::with_capacity(n * (layers + 1));
    for k in 0..=layers {
        let t = spec.time(k);
        for (i, p) in base.nodes().iter().enumerate() {
            nodes.push(Point4::new(p.x, p.y, p.z, t));
            provenance.push(Provenance { base: i, layer: k });
        }
    }

    let boundary_tag: HashMap<[usize; 3], i32> = base
        .boundary_tris()
        .iter()
        .map(|(tri, tag)| {
            let mut key = *tri;
            key.sort_unstable();
            (key, *tag)
        })
        .collect();

    let per_tet: Vec<(Vec<[usize; 5]>, Vec<BoundaryFacet>)> = base
        .tets()
        .par_iter()
        .map(|tet| {
            let mut pentas = Vec::with_capacity(4 * layers);
            let mut facets = Vec::new();
            let mut opposite_face = [[0usize; 3]; 4];
            for (j, face) in opposite_face.iter_mut().enumerate() {
                let mut f: Vec<usize> = (0..4).filter(|&q| q != j).map(|q| tet[q]).collect();
                f.sort_unstable();
                *face = [f[0], f[1], f[2]];
            }
            for k in 0..layers {
                let bottom = tet.map(|i| k * n + i);
                let top = tet.map(|i| (k + 1) * n + i);
                let split = split_prism(bottom, top).expect("base tets have distinct nodes");
                if k == 0 {
                    facets.push(BoundaryFacet { nodes: bottom, tag: BOTTOM });
                }
                if k + 1 == layers {
                    facets.push(BoundaryFacet { nodes: top, tag: TOP });
                }
                for p in &split {
                    for (v, facet) in penta_facets(p).iter().enumerate() {
                        let dropped = p[v] % n;
                        // The facet leaves the side face opposite `dropped` only
                        // if that base node occurs once in the pentatope.
                        if p.iter().filter(|&&q| q % n == dropped).count() != 1 {
                            continue;
                        }
                        let j = tet.iter().position(|&q| q == dropped).unwrap();
                        if let Some(&tag) = boundary_tag.get(&opposite_face[j]) {
                            facets.push(BoundaryFacet { nodes: *facet, tag });
                        }
                    }
                }
                pentas.extend_from_slice(&split);
            }
            (pentas, facets)
        })
        .collect();

    let mut pentas = Vec::with_capacity(4 * base.tets().len() * layers);
    let mut facets = Vec::new();
    for (p, f) in per_tet {
        pentas.extend(p);
        facets.extend(f);
    }
    PentaMesh::new(nodes, pentas, facets, Some(provenance))
}
