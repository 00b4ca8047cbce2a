//! Run configuration documents (JSON).
//!
//! Relative paths are resolved against the directory of the configuration
//! file. See the repository README for the full schema.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::emum::{DirichletEntry, ElasticParams};
use crate::error::{Error, Result};
use crate::extrude::ExtrusionSpec;
use crate::fields::{DisplacementField, FieldKind};
use crate::geometry::Point4;
use crate::mesh::PentaMesh;
use crate::scalar::ScalarProblem;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExtrusionConfig {
    pub t_lo: f64,
    pub t_hi: f64,
    pub layers: usize,
}

impl ExtrusionConfig {
    pub fn spec(&self) -> Result<ExtrusionSpec> {
        ExtrusionSpec::new(self.t_lo, self.t_hi, self.layers)
    }
}

/// Either explicit `(x + offset) * scale`, or a fit of the bounding box onto
/// `[lo, hi]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged, deny_unknown_fields)]
pub enum ShiftScale {
    Explicit { offset: [f64; 4], scale: [f64; 4] },
    Fit { lo: [f64; 4], hi: [f64; 4] },
}

impl ShiftScale {
    pub fn apply(&self, mesh: &PentaMesh) -> Result<PentaMesh> {
        let (offset, scale) = match self {
            ShiftScale::Explicit { offset, scale } => (*offset, *scale),
            ShiftScale::Fit { lo, hi } => mesh.fit_box(*lo, *hi)?,
        };
        mesh.shift_scale(offset, scale)
    }
}

fn all_dofs() -> Vec<usize> {
    vec![0, 1, 2, 3]
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct DirichletConfig {
    pub regions: Vec<i32>,
    #[serde(default = "all_dofs")]
    pub dofs: Vec<usize>,
    pub field: FieldKind,
}

impl DirichletConfig {
    pub fn entry(&self) -> Result<DirichletEntry> {
        Ok(DirichletEntry {
            regions: self.regions.clone(),
            field: DisplacementField::new(self.field.clone(), &self.dofs)?,
        })
    }
}

fn default_tol() -> f64 {
    1e-10
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SolverConfig {
    #[serde(default = "default_tol")]
    pub tol: f64,
    #[serde(default)]
    pub max_iter: Option<usize>,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: default_tol(),
            max_iter: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SliceConfig {
    pub time: f64,
    /// Tet mesh (MSH) whose nodes are queried at `time`.
    #[serde(default)]
    pub query_mesh: Option<PathBuf>,
    /// Raw space-time query points, used when `query_mesh` is absent.
    #[serde(default)]
    pub points: Option<Vec<[f64; 4]>>,
    #[serde(default)]
    pub fields: Vec<String>,
    #[serde(default)]
    pub margin: Option<f64>,
    /// Output file name inside the output directory.
    #[serde(default)]
    pub output: Option<String>,
}

impl SliceConfig {
    pub fn output_name(&self, index: usize) -> String {
        self.output
            .clone()
            .unwrap_or_else(|| format!("slice_{index:03}.vtk"))
    }

    pub fn raw_points(&self) -> Option<Vec<Point4>> {
        self.points
            .as_ref()
            .map(|p| p.iter().map(|q| Point4::new(q[0], q[1], q[2], q[3])).collect())
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    /// Base tet mesh (MSH 2.2 ASCII).
    #[serde(default)]
    pub input: Option<PathBuf>,
    #[serde(default)]
    pub extrusion: Option<ExtrusionConfig>,
    /// Axis permutation applied after extrusion: new axis `k` is old axis
    /// `axes[k]`.
    #[serde(default)]
    pub axes: Option<[usize; 4]>,
    #[serde(default)]
    pub shift_scale: Option<ShiftScale>,
    #[serde(default)]
    pub elastic: ElasticParams,
    #[serde(default)]
    pub dirichlet: Vec<DirichletConfig>,
    #[serde(default)]
    pub solver: SolverConfig,
    #[serde(default)]
    pub problem: Option<ScalarProblem>,
    #[serde(default)]
    pub slices: Vec<SliceConfig>,
    #[serde(default)]
    pub output_dir: Option<PathBuf>,
}

impl RunConfig {
    /// Parses a document without touching the filesystem.
    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }

    /// Reads a configuration, resolves relative paths against its directory
    /// (the output directory defaults to that directory) and checks that all
    /// input files exist.
    pub fn load(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_json(&text)?;
        let base = path.parent().unwrap_or(Path::new("")).to_path_buf();
        cfg.resolve_paths(&base);
        cfg.check_inputs()?;
        Ok(cfg)
    }

    pub fn resolve_paths(&mut self, base: &Path) {
        let join = |p: &mut PathBuf| {
            if p.is_relative() {
                *p = base.join(&*p);
            }
        };
        if let Some(p) = &mut self.input {
            join(p);
        }
        for s in &mut self.slices {
            if let Some(p) = &mut s.query_mesh {
                join(p);
            }
        }
        match &mut self.output_dir {
            Some(p) => join(p),
            None => self.output_dir = Some(base.to_path_buf()),
        }
    }

    pub fn check_inputs(&self) -> Result<()> {
        let inputs = self
            .input
            .iter()
            .chain(self.slices.iter().filter_map(|s| s.query_mesh.as_ref()));
        for p in inputs {
            if !p.is_file() {
                return Err(Error::Config(format!("input file {} does not exist", p.display())));
            }
        }
        for (i, s) in self.slices.iter().enumerate() {
            if s.query_mesh.is_some() == s.points.is_some() {
                return Err(Error::Config(format!(
                    "slice {i} needs exactly one of `query_mesh` and `points`"
                )));
            }
        }
        Ok(())
    }

    /// Every region tag named by the configuration must exist in `mesh`.
    pub fn check_regions(&self, mesh: &PentaMesh) -> Result<()> {
        let tags = mesh.region_tags();
        let named = self
            .dirichlet
            .iter()
            .flat_map(|d| d.regions.iter())
            .chain(
                self.problem
                    .iter()
                    .flat_map(|p| p.dirichlet.iter().flat_map(|d| d.regions.iter())),
            );
        for r in named {
            if tags.binary_search(r).is_err() {
                return Err(Error::Config(format!("region tag {r} does not exist in the mesh")));
            }
        }
        Ok(())
    }

    pub fn dirichlet_entries(&self) -> Result<Vec<DirichletEntry>> {
        self.dirichlet.iter().map(DirichletConfig::entry).collect()
    }

    pub fn output_dir(&self) -> PathBuf {
        self.output_dir.clone().unwrap_or_else(|| PathBuf::from("."))
    }
}
