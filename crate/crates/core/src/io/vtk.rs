//! Legacy ASCII VTK writer for slice output.

use std::fmt::Write as _;
use std::path::Path;

use crate::error::{Error, Result};
use crate::geometry::Point3;

const VTK_VERTEX: u8 = 1;
const VTK_TETRA: u8 = 10;

#[derive(Debug, Clone, PartialEq)]
pub enum PointData {
    Scalar(Vec<f64>),
    /// Written as four scalar arrays `name_0` .. `name_3`.
    Vector4(Vec<[f64; 4]>),
    Int(Vec<i32>),
}

impl PointData {
    pub fn len(&self) -> usize {
        match self {
            PointData::Scalar(v) => v.len(),
            PointData::Vector4(v) => v.len(),
            PointData::Int(v) => v.len(),
        }
    }

    pub fn is_empty(&self) -> bool {
        self.len() == 0
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PointArray {
    pub name: String,
    pub data: PointData,
}

fn sanitize(name: &str) -> String {
    name.chars()
        .map(|c| if c.is_whitespace() { '_' } else { c })
        .collect()
}

fn scalars(s: &mut String, name: &str, ty: &str, values: impl Iterator<Item = String>) {
    let _ = writeln!(s, "SCALARS {name} {ty} 1");
    s.push_str("LOOKUP_TABLE default\n");
    for v in values {
        s.push_str(&v);
        s.push('\n');
    }
}

/// Unstructured grid of tetrahedra with point data. Without tets every
/// point becomes a vertex cell.
pub fn format_vtk(points: &[Point3], tets: &[[usize; 4]], arrays: &[PointArray]) -> Result<String> {
    let n = points.len();
    for a in arrays {
        if a.data.len() != n {
            return Err(Error::LengthMismatch {
                what: "point data array",
                expected: n,
                actual: a.data.len(),
            });
        }
    }
    if let Some(t) = tets.iter().find(|t| t.iter().any(|&i| i >= n)) {
        return Err(Error::InvalidMesh(format!("tet {t:?} references a missing point")));
    }
    let mut s = String::new();
    s.push_str("# vtk DataFile Version 3.0\nslice\nASCII\nDATASET UNSTRUCTURED_GRID\n");
    let _ = writeln!(s, "POINTS {n} double");
    for p in points {
        let _ = writeln!(s, "{:e} {:e} {:e}", p.x, p.y, p.z);
    }
    if tets.is_empty() {
        let _ = writeln!(s, "CELLS {n} {}", 2 * n);
        for i in 0..n {
            let _ = writeln!(s, "1 {i}");
        }
        let _ = writeln!(s, "CELL_TYPES {n}");
        for _ in 0..n {
            let _ = writeln!(s, "{VTK_VERTEX}");
        }
    } else {
        let m = tets.len();
        let _ = writeln!(s, "CELLS {m} {}", 5 * m);
        for t in tets {
            let _ = writeln!(s, "4 {} {} {} {}", t[0], t[1], t[2], t[3]);
        }
        let _ = writeln!(s, "CELL_TYPES {m}");
        for _ in 0..m {
            let _ = writeln!(s, "{VTK_TETRA}");
        }
    }
    if !arrays.is_empty() {
        let _ = writeln!(s, "POINT_DATA {n}");
    }
    for a in arrays {
        let name = sanitize(&a.name);
        match &a.data {
            PointData::Scalar(v) => scalars(&mut s, &name, "double", v.iter().map(|x| format!("{x:e}"))),
            PointData::Int(v) => scalars(&mut s, &name, "int", v.iter().map(|x| x.to_string())),
            PointData::Vector4(v) => {
                for c in 0..4 {
                    scalars(&mut s, &format!("{name}_{c}"), "double", v.iter().map(|x| format!("{:e}", x[c])));
                }
            }
        }
    }
    Ok(s)
}

pub fn write_vtk_slice(path: impl AsRef<Path>, points: &[Point3], tets: &[[usize; 4]], arrays: &[PointArray]) -> Result<()> {
    let path = path.as_ref();
    let text = format_vtk(points, tets, arrays)?;
    std::fs::write(path, text).map_err(|e| Error::io(path, e))
}
