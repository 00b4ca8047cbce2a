//! Point location in pentatope meshes and barycentric interpolation of
//! nodal fields.
//!
//! Queries first test the elements whose centroids are nearest to the point,
//! then fall back to a scan of all elements. Points outside the mesh are
//! assigned to the element with the nearest centroid and evaluated with the
//! unclipped barycentric coordinates of that element (linear extrapolation).

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::geometry::{centroid4, BarycentricMap, Point3, Point4};
use crate::io::vtk::{PointArray, PointData};
use crate::mesh::{PentaMesh, TetMesh};

/// Containment tolerance on barycentric coordinates.
pub const EPS_BARY: f64 = 1e-10;
/// Number of nearest-centroid candidates tested before the full scan.
pub const CANDIDATES: usize = 32;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum LocateStatus {
    Inside,
    Extrapolated,
}

impl LocateStatus {
    /// Integer code used in output files.
    pub fn code(self) -> i32 {
        match self {
            LocateStatus::Inside => 0,
            LocateStatus::Extrapolated => 1,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LocateResult {
    pub element: usize,
    pub barycentric: [f64; 5],
    pub status: LocateStatus,
}

#[derive(Debug, Clone, Copy)]
struct Candidate {
    dist2: f64,
    element: usize,
}

impl PartialEq for Candidate {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}
impl Eq for Candidate {}
impl PartialOrd for Candidate {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}
impl Ord for Candidate {
    fn cmp(&self, other: &Self) -> Ordering {
        self.dist2
            .total_cmp(&other.dist2)
            .then(self.element.cmp(&other.element))
    }
}

/// Static kd-tree over element centroids plus per-element barycentric maps.
#[derive(Debug, Clone)]
pub struct LocateIndex {
    centroids: Vec<Point4>,
    maps: Vec<Option<BarycentricMap>>,
    /// Largest centroid-to-vertex distance over all elements.
    reach: f64,
    /// Element indices in kd order: the median of each range splits it on
    /// axis `depth % 4`.
    order: Vec<usize>,
}

impl LocateIndex {
    pub fn build(mesh: &PentaMesh) -> Result<Self> {
        if mesh.num_pentas() == 0 {
            return Err(Error::EmptyMesh);
        }
        let (centroids, maps): (Vec<_>, Vec<_>) = (0..mesh.num_pentas())
            .into_par_iter()
            .map(|e| {
                let pts = mesh.penta_points(e);
                (centroid4(&pts), BarycentricMap::new(&pts))
            })
            .unzip();
        let reach = (0..mesh.num_pentas())
            .into_par_iter()
            .map(|e| {
                let c = centroids[e];
                mesh.pentas()[e]
                    .iter()
                    .map(|&i| (mesh.nodes()[i] - c).norm())
                    .fold(0.0, f64::max)
            })
            .reduce(|| 0.0, f64::max);
        let mut order: Vec<usize> = (0..centroids.len()).collect();
        kd_sort(&mut order, &centroids, 0);
        Ok(Self {
            centroids,
            maps,
            reach,
            order,
        })
    }

    pub fn len(&self) -> usize {
        self.centroids.len()
    }

    pub fn is_empty(&self) -> bool {
        self.centroids.is_empty()
    }

    /// The `k` elements with centroids nearest to `p`, nearest first, ties
    /// broken by element index.
    pub fn nearest(&self, p: &Point4, k: usize) -> Vec<usize> {
        let mut heap = BinaryHeap::with_capacity(k + 1);
        if k > 0 {
            self.search(&self.order, 0, p, k, &mut heap);
        }
        let mut out: Vec<Candidate> = heap.into_vec();
        out.sort();
        out.into_iter().map(|c| c.element).collect()
    }

    fn search(&self, range: &[usize], depth: usize, p: &Point4, k: usize, heap: &mut BinaryHeap<Candidate>) {
        if range.is_empty() {
            return;
        }
        let mid = range.len() / 2;
        let e = range[mid];
        let c = &self.centroids[e];
        let cand = Candidate {
            dist2: (c - p).norm_squared(),
            element: e,
        };
        if heap.len() < k {
            heap.push(cand);
        } else if cand < *heap.peek().unwrap() {
            heap.pop();
            heap.push(cand);
        }
        let axis = depth % 4;
        let diff = p[axis] - c[axis];
        let (near, far) = if diff < 0.0 {
            (&range[..mid], &range[mid + 1..])
        } else {
            (&range[mid + 1..], &range[..mid])
        };
        self.search(near, depth + 1, p, k, heap);
        if heap.len() < k || diff * diff <= heap.peek().unwrap().dist2 {
            self.search(far, depth + 1, p, k, heap);
        }
    }

    /// All elements containing `p` (barycentric coordinates `>= -EPS_BARY`),
    /// in ascending order.
    pub fn containing(&self, p: &Point4) -> Vec<usize> {
        // a containing element has its centroid within `reach` of p, up to
        // the containment tolerance
        let r = self.reach * (1.0 + 1e-6) + 1e-12;
        let mut out = Vec::new();
        self.within(&self.order, 0, p, r * r, &mut out);
        out.retain(|&e| self.contains(e, p).is_some());
        out.sort_unstable();
        out
    }

    fn within(&self, range: &[usize], depth: usize, p: &Point4, r2: f64, out: &mut Vec<usize>) {
        if range.is_empty() {
            return;
        }
        let mid = range.len() / 2;
        let e = range[mid];
        let c = &self.centroids[e];
        if (c - p).norm_squared() <= r2 {
            out.push(e);
        }
        let axis = depth % 4;
        let diff = p[axis] - c[axis];
        if diff <= 0.0 || diff * diff <= r2 {
            self.within(&range[..mid], depth + 1, p, r2, out);
        }
        if diff >= 0.0 || diff * diff <= r2 {
            self.within(&range[mid + 1..], depth + 1, p, r2, out);
        }
    }

    /// Barycentric coordinates of `p` in element `e`; `None` if degenerate.
    pub fn barycentric(&self, e: usize, p: &Point4) -> Option<[f64; 5]> {
        self.maps[e].as_ref().map(|m| m.coords(p))
    }

    fn contains(&self, e: usize, p: &Point4) -> Option<[f64; 5]> {
        self.barycentric(e, p)
            .filter(|l| l.iter().all(|&v| v >= -EPS_BARY))
    }

    pub fn locate(&self, p: &Point4) -> LocateResult {
        let near = self.nearest(p, CANDIDATES);
        let mut sorted = near.clone();
        sorted.sort_unstable();
        let hit = sorted
            .iter()
            .find_map(|&e| self.contains(e, p).map(|l| (e, l)))
            .or_else(|| (0..self.len()).find_map(|e| self.contains(e, p).map(|l| (e, l))));
        if let Some((element, barycentric)) = hit {
            return LocateResult {
                element,
                barycentric,
                status: LocateStatus::Inside,
            };
        }
        let element = near
            .iter()
            .copied()
            .find(|&e| self.maps[e].is_some())
            .or_else(|| {
                // every nearby element is degenerate: nearest valid one by scan
                (0..self.len())
                    .filter(|&e| self.maps[e].is_some())
                    .min_by(|&a, &b| {
                        let da = (self.centroids[a] - p).norm_squared();
                        let db = (self.centroids[b] - p).norm_squared();
                        da.total_cmp(&db).then(a.cmp(&b))
                    })
            })
            .expect("mesh has at least one non-degenerate element");
        LocateResult {
            element,
            barycentric: self.barycentric(element, p).unwrap(),
            status: LocateStatus::Extrapolated,
        }
    }
}

fn kd_sort(idx: &mut [usize], pts: &[Point4], depth: usize) {
    if idx.len() <= 1 {
        return;
    }
    let axis = depth % 4;
    let mid = idx.len() / 2;
    idx.select_nth_unstable_by(mid, |&a, &b| {
        pts[a][axis].total_cmp(&pts[b][axis]).then(a.cmp(&b))
    });
    let (lo, hi) = idx.split_at_mut(mid);
    kd_sort(lo, pts, depth + 1);
    kd_sort(&mut hi[1..], pts, depth + 1);
}

/// Scalar or 4-vector values per node (or per query point).
#[derive(Debug, Clone, PartialEq)]
pub enum NodalField {
    Scalar(Vec<f64>),
    Vector(Vec<[f64; 4]>),
}

impl NodalField {
    pub fn len(&self) -> usize {
        match self {
            NodalField::Scalar(v) => v.len(),
            NodalField::Vector(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }

    pub fn components(&self) -> usize {
        match self {
            NodalField::Scalar(_) => 1,
            NodalField::Vector(_) => 4,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Interpolation {
    pub values: NodalField,
    pub located: Vec<LocateResult>,
}

/// Evaluates the piecewise linear field at each point:
/// `sum_i lambda_i * value(node_i)` of the located element.
pub fn interpolate(
    index: &LocateIndex,
    mesh: &PentaMesh,
    field: &NodalField,
    points: &[Point4],
) -> Result<Interpolation> {
    if field.len() != mesh.num_nodes() {
        return Err(Error::LengthMismatch {
            what: "nodal field",
            expected: mesh.num_nodes(),
            actual: field.len(),
        });
    }
    let located: Vec<LocateResult> = points.par_iter().map(|p| index.locate(p)).collect();
    let values = match field {
        NodalField::Scalar(v) => NodalField::Scalar(
            located
                .iter()
                .map(|r| {
                    let nodes = mesh.pentas()[r.element];
                    (0..5).map(|i| r.barycentric[i] * v[nodes[i]]).sum()
                })
                .collect(),
        ),
        NodalField::Vector(v) => NodalField::Vector(
            located
                .iter()
                .map(|r| {
                    let nodes = mesh.pentas()[r.element];
                    std::array::from_fn(|c| (0..5).map(|i| r.barycentric[i] * v[nodes[i]][c]).sum())
                })
                .collect(),
        ),
    };
    Ok(Interpolation { values, located })
}

#[derive(Debug, Clone, PartialEq)]
pub enum SliceQuery {
    /// Spatial tet mesh; its nodes are queried at the job time.
    Mesh(TetMesh),
    /// Raw space-time points.
    Points(Vec<Point4>),
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceJob {
    pub query: SliceQuery,
    pub time: f64,
    pub fields: Vec<String>,
    /// Allowed distance of the query time outside the mesh time range.
    /// Defaults to [`default_time_margin`].
    pub margin: Option<f64>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SliceOutput {
    pub points: Vec<Point3>,
    pub tets: Vec<[usize; 4]>,
    /// One array per requested field, followed by the `status` array.
    pub arrays: Vec<PointArray>,
}

/// Default time margin: the largest `x4` extent of a single element. For a
/// mesh extruded in time this is one layer width.
pub fn default_time_margin(mesh: &PentaMesh) -> f64 {
    mesh.pentas()
        .par_iter()
        .map(|p| {
            let (lo, hi) = p.iter().fold((f64::INFINITY, f64::NEG_INFINITY), |(lo, hi), &i| {
                let t = mesh.nodes()[i][3];
                (lo.min(t), hi.max(t))
            });
            hi - lo
        })
        .reduce(|| 0.0, f64::max)
}

pub fn slice(
    job: &SliceJob,
    mesh: &PentaMesh,
    index: &LocateIndex,
    fields: &[(String, NodalField)],
) -> Result<SliceOutput> {
    let (lo, hi) = mesh.bounding_box().ok_or(Error::EmptyMesh)?;
    let margin = job.margin.unwrap_or_else(|| default_time_margin(mesh));
    let check_time = |t: f64| {
        if t < lo[3] - margin || t > hi[3] + margin || !t.is_finite() {
            Err(Error::TimeOutOfRange {
                time: t,
                lo: lo[3],
                hi: hi[3],
                margin,
            })
        } else {
            Ok(())
        }
    };
    let (points4, points, tets): (Vec<Point4>, Vec<Point3>, Vec<[usize; 4]>) = match &job.query {
        SliceQuery::Mesh(m) => {
            check_time(job.time)?;
            (
                m.nodes()
                    .iter()
                    .map(|p| Point4::new(p.x, p.y, p.z, job.time))
                    .collect(),
                m.nodes().to_vec(),
                m.tets().to_vec(),
            )
        }
        SliceQuery::Points(pts) => {
            for p in pts {
                check_time(p[3])?;
            }
            (
                pts.clone(),
                pts.iter().map(|p| Point3::new(p[0], p[1], p[2])).collect(),
                Vec::new(),
            )
        }
    };

    let mut arrays = Vec::with_capacity(job.fields.len() + 1);
    let mut located = None;
    for name in &job.fields {
        let (_, field) = fields
            .iter()
            .find(|(n, _)| n == name)
            .ok_or_else(|| Error::Config(format!("unknown field `{name}`")))?;
        let interp = interpolate(index, mesh, field, &points4)?;
        let data = match interp.values {
            NodalField::Scalar(v) => PointData::Scalar(v),
            NodalField::Vector(v) => PointData::Vector4(v),
        };
        arrays.push(PointArray {
            name: name.clone(),
            data,
        });
        located.get_or_insert(interp.located);
    }
    let located =
        located.unwrap_or_else(|| points4.par_iter().map(|p| index.locate(p)).collect());
    arrays.push(PointArray {
        name: "status".into(),
        data: PointData::Int(located.iter().map(|r| r.status.code()).collect()),
    });
    Ok(SliceOutput {
        points,
        tets,
        arrays,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::mesh::{BoundaryFacet, PentaMesh};

    fn unit_penta() -> PentaMesh {
        let nodes = vec![
            Point4::new(0.0, 0.0, 0.0, 0.0),
            Point4::new(1.0, 0.0, 0.0, 0.0),
            Point4::new(0.0, 1.0, 0.0, 0.0),
            Point4::new(0.0, 0.0, 1.0, 0.0),
            Point4::new(0.0, 0.0, 0.0, 1.0),
        ];
        PentaMesh::new(nodes, vec![[0, 1, 2, 3, 4]], Vec::<BoundaryFacet>::new(), None).unwrap()
    }

    #[test]
    fn empty_mesh_has_no_index() {
        let m = PentaMesh::new(vec![], vec![], vec![], None).unwrap();
        assert!(matches!(LocateIndex::build(&m), Err(Error::EmptyMesh)));
    }

    #[test]
    fn single_element_is_always_nearest() {
        let idx = LocateIndex::build(&unit_penta()).unwrap();
        for p in [Point4::new(5.0, 5.0, 5.0, 5.0), Point4::new(-1.0, 0.0, 0.2, 0.0)] {
            assert_eq!(idx.nearest(&p, 3), vec![0]);
            let r = idx.locate(&p);
            assert_eq!(r.status, LocateStatus::Extrapolated);
            assert!((r.barycentric.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }

    #[test]
    fn centroid_and_vertex_queries() {
        let m = unit_penta();
        let idx = LocateIndex::build(&m).unwrap();
        let r = idx.locate(&centroid4(&m.penta_points(0)));
        assert_eq!(r.status, LocateStatus::Inside);
        for l in r.barycentric {
            assert!((l - 0.2).abs() < 1e-15);
        }
        let r = idx.locate(&m.nodes()[2]);
        assert_eq!(r.status, LocateStatus::Inside);
        assert!((r.barycentric[2] - 1.0).abs() < 1e-15);
    }

    #[test]
    fn kd_tree_matches_brute_force() {
        // scattered centroids from a deterministic pseudo-random sequence
        let mut s = 12345u64;
        let mut next = || {
            s = s.wrapping_mul(6364136223846793005).wrapping_add(1442695040888963407);
            (s >> 11) as f64 / (1u64 << 53) as f64
        };
        let centroids: Vec<Point4> = (0..500).map(|_| Point4::new(next(), next(), next(), next())).collect();
        let mut order: Vec<usize> = (0..centroids.len()).collect();
        kd_sort(&mut order, &centroids, 0);
        let idx = LocateIndex {
            maps: vec![None; centroids.len()],
            reach: 0.0,
            centroids,
            order,
        };
        for _ in 0..50 {
            let p = Point4::new(next(), next(), next(), next());
            let mut brute: Vec<(f64, usize)> = idx
                .centroids
                .iter()
                .enumerate()
                .map(|(i, c)| ((c - p).norm_squared(), i))
                .collect();
            brute.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)));
            let expect: Vec<usize> = brute.iter().take(7).map(|b| b.1).collect();
            assert_eq!(idx.nearest(&p, 7), expect);
        }
    }
}
