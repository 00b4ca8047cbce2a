//! Simplex geometry in three and four dimensions.

use nalgebra::{Matrix3, Matrix4, Vector4};

/// A location in 4D computational space `(x1, x2, x3, x4)`.
pub type Point4 = nalgebra::Point4<f64>;
/// A location in 3D space.
pub type Point3 = nalgebra::Point3<f64>;

/// Signed 4-content of the simplex `v0..v4`: `det[v1-v0, .., v4-v0] / 24`.
///
/// Degenerate input yields zero.
pub fn simplex_measure4(v: &[Point4; 5]) -> f64 {
    edge_matrix4(v).determinant() / 24.0
}

/// Signed volume of the tetrahedron `v0..v3`.
pub fn tet_volume(v: &[Point3; 4]) -> f64 {
    let m = Matrix3::from_columns(&[v[1] - v[0], v[2] - v[0], v[3] - v[0]]);
    m.determinant() / 6.0
}

/// Unsigned 3-volume of a tetrahedron embedded in 4D (Gram determinant).
pub fn facet_volume4(v: &[Point4; 4]) -> f64 {
    let e = [v[1] - v[0], v[2] - v[0], v[3] - v[0]];
    let mut g = Matrix3::zeros();
    for i in 0..3 {
        for j in 0..3 {
            g[(i, j)] = e[i].dot(&e[j]);
        }
    }
    g.determinant().max(0.0).sqrt() / 6.0
}

pub(crate) fn edge_matrix4(v: &[Point4; 5]) -> Matrix4<f64> {
    Matrix4::from_columns(&[v[1] - v[0], v[2] - v[0], v[3] - v[0], v[4] - v[0]])
}

/// Constant gradients of the five barycentric coordinates of a pentatope,
/// together with its signed measure. `None` for a singular simplex.
pub fn barycentric_gradients(v: &[Point4; 5]) -> Option<([Vector4<f64>; 5], f64)> {
    let j = edge_matrix4(v);
    let measure = j.determinant() / 24.0;
    let inv = j.try_inverse()?;
    let mut grads = [Vector4::zeros(); 5];
    for i in 0..4 {
        grads[i + 1] = inv.row(i).transpose();
    }
    grads[0] = -(grads[1] + grads[2] + grads[3] + grads[4]);
    Some((grads, measure))
}

/// Affine map from a point to its five barycentric coordinates.
///
/// `lambda[1..5] = inv * (p - v0)`, `lambda[0] = 1 - sum`.
#[derive(Debug, Clone)]
pub struct BarycentricMap {
    origin: Point4,
    inv: Matrix4<f64>,
}

impl BarycentricMap {
    pub fn new(v: &[Point4; 5]) -> Option<Self> {
        let inv = edge_matrix4(v).try_inverse()?;
        Some(Self { origin: v[0], inv })
    }

    pub fn coords(&self, p: &Point4) -> [f64; 5] {
        let l = self.inv * (p - self.origin);
        [1.0 - (l[0] + l[1] + l[2] + l[3]), l[0], l[1], l[2], l[3]]
    }
}

pub fn centroid4(v: &[Point4; 5]) -> Point4 {
    let mut c = Vector4::zeros();
    for p in v {
        c += p.coords;
    }
    Point4::from(c / 5.0)
}
