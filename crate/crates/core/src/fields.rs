//! Analytic boundary data: 4-vector displacement fields for the mesh update
//! and scalar fields for the space-time solver.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::geometry::Point4;

/// Heaviside step with `H(0) = 1`.
pub fn heaviside(x: f64) -> f64 {
    if x >= 0.0 {
        1.0
    } else {
        0.0
    }
}

/// Gate motion closing a channel exit:
/// `d[component] = amplitude * H(x1 - threshold) * (x1 / length_x - offset)
///                 * (1 - x3 / length_z) * (x4 / period)`.
///
/// Defaults are the micrometre/microsecond values of the valve example.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ValveGate {
    pub amplitude: f64,
    pub threshold: f64,
    pub length_x: f64,
    pub offset: f64,
    pub length_z: f64,
    pub period: f64,
    pub component: usize,
}

impl Default for ValveGate {
    fn default() -> Self {
        Self {
            amplitude: 2.0,
            threshold: 10.0,
            length_x: 5.0,
            offset: 2.0,
            length_z: 4.0,
            period: 12.0,
            component: 2,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SumTerm {
    pub coef: f64,
    pub field: FieldKind,
    #[serde(default = "all_dofs")]
    pub dofs: Vec<usize>,
}

fn all_dofs() -> Vec<usize> {
    vec![0, 1, 2, 3]
}

fn default_c() -> f64 {
    0.9
}

/// Displacement field kinds, serialized as `{"kind": .., "params": {..}}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum FieldKind {
    Constant {
        value: [f64; 4],
    },
    /// `matrix * x + offset`, `matrix` given row by row.
    Affine {
        matrix: [[f64; 4]; 4],
        offset: [f64; 4],
    },
    ValveGate(ValveGate),
    /// Maps the square `max(|x2|, |x3|) = 1` towards a circle:
    /// `d2 = c (sqrt(1 - x3^2 / 2) - 1) x2`, `d3 = c (sqrt(1 - x2^2 / 2) - 1) x3`.
    SquareToCircle {
        #[serde(default = "default_c")]
        c: f64,
    },
    ScaledSum {
        terms: Vec<SumTerm>,
    },
}

impl FieldKind {
    /// Evaluates all four components, `None` for components a sum term
    /// leaves unconstrained.
    fn eval_raw(&self, x: &Point4) -> Result<[Option<f64>; 4]> {
        Ok(match self {
            FieldKind::Constant { value } => value.map(Some),
            FieldKind::Affine { matrix, offset } => std::array::from_fn(|i| {
                Some((0..4).map(|j| matrix[i][j] * x[j]).sum::<f64>() + offset[i])
            }),
            FieldKind::ValveGate(g) => {
                let v = g.amplitude
                    * heaviside(x[0] - g.threshold)
                    * (x[0] / g.length_x - g.offset)
                    * (1.0 - x[2] / g.length_z)
                    * (x[3] / g.period);
                let mut d = [Some(0.0); 4];
                d[g.component.min(3)] = Some(v);
                d
            }
            FieldKind::SquareToCircle { c } => {
                let lim = std::f64::consts::SQRT_2;
                if x[1].abs() > lim || x[2].abs() > lim {
                    return Err(Error::DomainError(format!(
                        "square-to-circle map needs |x2|, |x3| <= sqrt(2), got ({}, {})",
                        x[1], x[2]
                    )));
                }
                let d2 = c * ((1.0 - x[2] * x[2] / 2.0).sqrt() - 1.0) * x[1];
                let d3 = c * ((1.0 - x[1] * x[1] / 2.0).sqrt() - 1.0) * x[2];
                [Some(0.0), Some(d2), Some(d3), Some(0.0)]
            }
            FieldKind::ScaledSum { terms } => {
                let mut acc = [Some(0.0); 4];
                for t in terms {
                    let v = t.field.eval_raw(x)?;
                    for k in 0..4 {
                        acc[k] = match (acc[k], v[k], t.dofs.contains(&k)) {
                            (Some(a), Some(b), true) => Some(a + t.coef * b),
                            _ => None,
                        };
                    }
                }
                acc
            }
        })
    }
}

/// A displacement field restricted to a set of active components.
#[derive(Debug, Clone, PartialEq)]
pub struct DisplacementField {
    pub kind: FieldKind,
    pub active: [bool; 4],
}

impl DisplacementField {
    pub fn new(kind: FieldKind, dofs: &[usize]) -> Result<Self> {
        let mut active = [false; 4];
        for &d in dofs {
            if d > 3 {
                return Err(Error::Config(format!("dof index {d} out of range 0..4")));
            }
            active[d] = true;
        }
        Ok(Self { kind, active })
    }

    pub fn all(kind: FieldKind) -> Self {
        Self {
            kind,
            active: [true; 4],
        }
    }

    /// Prescribed components at `x`; inactive components are `None`.
    pub fn eval(&self, x: &Point4) -> Result<[Option<f64>; 4]> {
        let raw = self.kind.eval_raw(x)?;
        Ok(std::array::from_fn(|k| if self.active[k] { raw[k] } else { None }))
    }
}

/// Scalar analytic fields of `(x, y, z, t)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "params", rename_all = "SCREAMING_SNAKE_CASE")]
pub enum ScalarField {
    Constant {
        value: f64,
    },
    /// `gradient . x + offset`
    Linear {
        gradient: [f64; 4],
        #[serde(default)]
        offset: f64,
    },
    /// `amplitude * prod_i sin(k_i x_i + phase_i) * exp(-decay * t)` over the
    /// three spatial axes.
    SineProduct {
        amplitude: f64,
        wavenumbers: [f64; 3],
        #[serde(default)]
        phases: [f64; 3],
        #[serde(default)]
        decay: f64,
    },
    /// Linear ramp along one axis from `v_from` at `from` to `v_to` at `to`,
    /// constant outside.
    Ramp {
        axis: usize,
        from: f64,
        to: f64,
        v_from: f64,
        v_to: f64,
    },
}

impl ScalarField {
    pub fn eval(&self, x: &Point4) -> f64 {
        match self {
            ScalarField::Constant { value } => *value,
            ScalarField::Linear { gradient, offset } => {
                (0..4).map(|k| gradient[k] * x[k]).sum::<f64>() + offset
            }
            ScalarField::SineProduct {
                amplitude,
                wavenumbers,
                phases,
                decay,
            } => {
                amplitude
                    * (0..3)
                        .map(|k| (wavenumbers[k] * x[k] + phases[k]).sin())
                        .product::<f64>()
                    * (-decay * x[3]).exp()
            }
            ScalarField::Ramp {
                axis,
                from,
                to,
                v_from,
                v_to,
            } => {
                let s = ((x[(*axis).min(3)] - from) / (to - from)).clamp(0.0, 1.0);
                v_from + s * (v_to - v_from)
            }
        }
    }
}
